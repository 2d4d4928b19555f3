"""Pure-Python (numpy) versions of the compiled kernels, same signatures and results."""

from __future__ import annotations

import numpy as np


def _popcount(v: int) -> int:
    return bin(v).count("1")


def hk_peel_batch(configs, mul, inv, level, order):
    cur = np.array(configs, dtype=np.int64, copy=True)
    nb, nv = cur.shape
    ok = np.ones(nb, dtype=bool)
    for v in order:
        v = int(v)
        g = cur[:, v]
        ok &= level[g] >= _popcount(v)
        gi = inv[g]
        for w in range(v, nv):
            if (w & v) == v:
                cur[:, w] = mul[gi, cur[:, w]]
    return ok.astype(np.uint8)


def face_sum_batch(configs, add, neg, face_vertices, signs, identity):
    configs = np.asarray(configs)
    ok = np.ones(configs.shape[0], dtype=bool)
    for fv in face_vertices:
        acc = np.full(configs.shape[0], identity, dtype=np.int64)
        for v, sg in zip(fv, signs):
            x = configs[:, v]
            if sg < 0:
                x = neg[x]
            acc = add[acc, x]
        ok &= acc == identity
    return ok.astype(np.uint8)


def closure_bfs(gens, mul, identity, limit):
    gens = np.asarray(gens, dtype=np.int64)
    base = mul.shape[0]
    nv = gens.shape[1]
    powers = base ** np.arange(nv, dtype=np.int64)
    start = np.array([identity * int(powers.sum())], dtype=np.int64)
    seen = start
    frontier = start
    while frontier.size:
        cfg = (frontier[:, None] // powers[None, :]) % base
        found = []
        for g in gens:
            prod = mul[cfg, g[None, :]]
            found.append(prod.astype(np.int64) @ powers)
        new = np.unique(np.concatenate(found))
        new = new[~np.isin(new, seen, assume_unique=True)]
        seen = np.union1d(seen, new)
        if seen.size > limit:
            return None
        frontier = new
    return seen


def hnf_insert_rows(basis, rows, m):
    n = basis.shape[0]
    m = int(m)
    for row in rows:
        buf = [int(x) % m for x in row]
        for i in range(n):
            b = buf[i]
            if b == 0:
                continue
            a = int(basis[i, i])
            x0, y0, x1, y1 = 1, 0, 0, 1
            g, t = a, b
            while t:
                q = g // t
                g, t = t, g - q * t
                x0, x1 = x1, x0 - q * x1
                y0, y1 = y1, y0 - q * y1
            ag, bg = a // g, b // g
            for j in range(i, n):
                bi = int(basis[i, j])
                ri = buf[j]
                basis[i, j] = (x0 * bi + y0 * ri) % m
                buf[j] = (ag * ri - bg * bi) % m
            if basis[i, i] == 0:
                basis[i, i] = m
    return basis
