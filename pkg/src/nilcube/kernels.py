"""Backend selection for the hot loops.

The compiled extension is used when it imports and ``NILCUBE_PURE_PYTHON``
is unset; otherwise the numpy fallback runs.  Both give identical results.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_compiled = None
if os.environ.get("NILCUBE_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _impl(use_compiled: bool | None):
    if use_compiled is None:
        use_compiled = _compiled is not None
    if use_compiled and _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    return _compiled if use_compiled else _pykernels


def _i32(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int32)


def hk_peel_batch(configs, mul, inv, level, order, use_compiled: bool | None = None) -> np.ndarray:
    configs = _i32(configs)
    if configs.ndim != 2:
        raise ValueError("configurations must be a 2-d array")
    if configs.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    out = _impl(use_compiled).hk_peel_batch(configs, _i32(mul), _i32(inv), _i32(level), _i32(order))
    return np.asarray(out, dtype=bool)


def face_sum_batch(configs, add, neg, face_vertices, signs, identity: int,
                   use_compiled: bool | None = None) -> np.ndarray:
    configs = _i32(configs)
    if configs.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    fv = _i32(face_vertices).reshape(len(face_vertices), -1)
    sg = np.ascontiguousarray(signs, dtype=np.int8)
    out = _impl(use_compiled).face_sum_batch(configs, _i32(add), _i32(neg), fv, sg, int(identity))
    return np.asarray(out, dtype=bool)


def closure_bfs(gens, mul, identity: int, limit: int, use_compiled: bool | None = None):
    """Sorted int64 codes of the generated subgroup, or ``None`` past ``limit``."""
    gens = _i32(gens)
    base = mul.shape[0]
    if float(base) ** gens.shape[1] >= 2.0**62:
        raise OverflowError("configuration codes would overflow 64 bits")
    return _impl(use_compiled).closure_bfs(gens, _i32(mul), int(identity), int(limit))


def hnf_insert_rows(basis: np.ndarray, rows, m: int, use_compiled: bool | None = None) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        return basis
    return _impl(use_compiled).hnf_insert_rows(basis, rows, int(m))


def decode_codes(codes: np.ndarray, base: int, length: int) -> np.ndarray:
    """Inverse of the configuration coding used by :func:`closure_bfs`."""
    powers = base ** np.arange(length, dtype=np.int64)
    return ((np.asarray(codes, dtype=np.int64)[:, None] // powers[None, :]) % base).astype(np.int32)


def encode_configs(configs, base: int) -> np.ndarray:
    configs = np.asarray(configs, dtype=np.int64)
    powers = base ** np.arange(configs.shape[1], dtype=np.int64)
    return configs @ powers
