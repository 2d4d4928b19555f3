"""Compiled kernels versus the numpy fallback on representative workloads.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each row
reports the best wall time of both backends and checks that their outputs
agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nilcube import kernels
from nilcube.groups import AbelianGroup, make_heisenberg
from nilcube.host_kra import _tables, hk_generators
from nilcube.cubes import faces, peel_order, sign


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def workloads(rng: np.random.Generator):
    filt = make_heisenberg(3)
    mul, inv, level = _tables(filt)
    order = np.array(peel_order(3))
    configs = rng.integers(0, filt.group.order, size=(200_000, 8))
    yield "hk_peel_batch heis3 n=3 x200k", lambda c: kernels.hk_peel_batch(
        configs, mul, inv, level, order, use_compiled=c)

    A = AbelianGroup((3, 3))
    fv = [f.vertices() for f in faces(3, 1)]
    signs = [sign(u) for u in range(4)]
    rows = rng.integers(0, A.order, size=(200_000, 8))
    yield "face_sum_batch Z3^2 n=3 x200k", lambda c: kernels.face_sum_batch(
        rows, A.mul_table(), A.inv_array(), fv, signs, A.identity, use_compiled=c)

    gens = np.array(hk_generators(filt, 2), dtype=np.int32)
    yield "closure_bfs heis3 n=2", lambda c: kernels.closure_bfs(
        gens, filt.group.mul_table(), filt.group.identity, 10**6, use_compiled=c)

    m = 9
    basis = np.zeros((41, 41), dtype=np.int64)
    hrows = rng.integers(0, m, size=(3000, 41))
    yield "hnf_insert_rows 3000x41 mod 9", lambda c: kernels.hnf_insert_rows(
        basis.copy(), hrows, m, use_compiled=c)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernels unavailable; only the fallback can run")
        return
    rng = np.random.default_rng(0)
    print(f"{'workload':36s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}  agree")
    for name, fn in workloads(rng):
        tc, oc = _best(lambda: fn(True), args.repeat)
        tp, op = _best(lambda: fn(False), args.repeat)
        agree = np.array_equal(np.asarray(oc), np.asarray(op))
        print(f"{name:36s} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
