# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; ``_pykernels`` holds behaviourally identical fallbacks."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t

cnp.import_array()

cdef enum:
    MAX_VERTS = 64


cdef inline int _popcount(unsigned int v) nogil:
    cdef int c = 0
    while v:
        v &= v - 1
        c += 1
    return c


def hk_peel_batch(const int32_t[:, ::1] configs,
                  const int32_t[:, ::1] mul,
                  const int32_t[::1] inv,
                  const int32_t[::1] level,
                  const int32_t[::1] order):
    """1 where the row reduces to the identity by face peeling, else 0."""
    cdef Py_ssize_t nb = configs.shape[0], nv = configs.shape[1]
    if nv > MAX_VERTS:
        raise ValueError("configuration too large for the compiled kernel")
    out = np.ones(nb, dtype=np.uint8)
    cdef uint8_t[::1] res = out
    cdef int32_t buf[MAX_VERTS]
    cdef Py_ssize_t b, i, j, w
    cdef int v, g, gi
    with nogil:
        for b in range(nb):
            for i in range(nv):
                buf[i] = configs[b, i]
            for j in range(nv):
                v = order[j]
                g = buf[v]
                if level[g] < _popcount(v):
                    res[b] = 0
                    break
                gi = inv[g]
                for w in range(v, nv):
                    if (w & v) == v:
                        buf[w] = mul[gi, buf[w]]
    return out


def face_sum_batch(const int32_t[:, ::1] configs,
                   const int32_t[:, ::1] add,
                   const int32_t[::1] neg,
                   const int32_t[:, ::1] face_vertices,
                   const int8_t[::1] signs,
                   int identity):
    """1 where every listed face has alternating sum equal to ``identity``."""
    cdef Py_ssize_t nb = configs.shape[0], nf = face_vertices.shape[0], m = face_vertices.shape[1]
    out = np.ones(nb, dtype=np.uint8)
    cdef uint8_t[::1] res = out
    cdef Py_ssize_t b, f, j
    cdef int acc, x
    with nogil:
        for b in range(nb):
            for f in range(nf):
                acc = identity
                for j in range(m):
                    x = configs[b, face_vertices[f, j]]
                    if signs[j] < 0:
                        x = neg[x]
                    acc = add[acc, x]
                if acc != identity:
                    res[b] = 0
                    break
    return out


cdef inline uint64_t _hash(uint64_t key) nogil:
    key ^= key >> 33
    key *= 0xff51afd7ed558ccdULL
    key ^= key >> 33
    key *= 0xc4ceb9fe1a85ec53ULL
    key ^= key >> 33
    return key


def closure_bfs(const int32_t[:, ::1] gens,
                const int32_t[:, ::1] mul,
                int identity,
                int64_t limit):
    """Codes (base ``|G|``, vertex 0 least significant) of the subgroup of
    ``G^L`` generated by ``gens``; returns ``None`` once more than ``limit``
    elements are found."""
    cdef Py_ssize_t ng = gens.shape[0], nv = gens.shape[1]
    cdef int64_t base = mul.shape[0]
    if nv > MAX_VERTS:
        raise ValueError("configuration too large for the compiled kernel")
    cdef int64_t cap = 1 << 12
    table_arr = np.full(cap, -1, dtype=np.int64)
    elems_arr = np.empty(cap // 2, dtype=np.int64)
    cdef int64_t[::1] table = table_arr
    cdef int64_t[::1] elems = elems_arr
    cdef int64_t count = 0, head = 0, code, newcode, pw
    cdef uint64_t mask = cap - 1, h
    cdef int32_t cur[MAX_VERTS]
    cdef Py_ssize_t i, k, j
    cdef int64_t start = 0
    pw = 1
    for i in range(nv):
        start += identity * pw
        pw *= base
    h = _hash(<uint64_t>start) & mask
    table[h] = start
    elems[0] = start
    count = 1
    while head < count:
        code = elems[head]
        head += 1
        for i in range(nv):
            cur[i] = code % base
            code //= base
        for k in range(ng):
            newcode = 0
            pw = 1
            for i in range(nv):
                newcode += mul[cur[i], gens[k, i]] * pw
                pw *= base
            h = _hash(<uint64_t>newcode) & mask
            while table[h] != -1 and table[h] != newcode:
                h = (h + 1) & mask
            if table[h] == newcode:
                continue
            table[h] = newcode
            if count >= elems.shape[0]:
                elems_arr = np.resize(elems_arr, elems.shape[0] * 2)
                elems = elems_arr
            elems[count] = newcode
            count += 1
            if count > limit:
                return None
            if 2 * count > cap:
                cap *= 4
                mask = cap - 1
                table_arr = np.full(cap, -1, dtype=np.int64)
                table = table_arr
                for j in range(count):
                    h = _hash(<uint64_t>elems[j]) & mask
                    while table[h] != -1:
                        h = (h + 1) & mask
                    table[h] = elems[j]
    return np.sort(elems_arr[:count])


cdef inline int64_t _mod(int64_t a, int64_t m) nogil:
    a %= m
    return a + m if a < 0 else a


def hnf_insert_rows(int64_t[:, ::1] basis, const int64_t[:, ::1] rows, int64_t m):
    """Insert each row into the triangular basis of a lattice containing
    ``m Z^n``, in place, by extended-gcd row steps with entries kept mod ``m``."""
    cdef Py_ssize_t n = basis.shape[0], nr = rows.shape[0]
    cdef Py_ssize_t r, i, j
    cdef int64_t a, b, g, x, y, x0, y0, x1, y1, q, t, bi, ri, ag, bg
    buf_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] buf = buf_arr
    for r in range(nr):
        for j in range(n):
            buf[j] = _mod(rows[r, j], m)
        for i in range(n):
            b = buf[i]
            if b == 0:
                continue
            a = basis[i, i]
            # extended gcd of (a, b)
            x0, y0, x1, y1 = 1, 0, 0, 1
            g, t = a, b
            while t != 0:
                q = g // t
                g, t = t, g - q * t
                x0, x1 = x1, x0 - q * x1
                y0, y1 = y1, y0 - q * y1
            x, y = x0, y0
            ag = a // g
            bg = b // g
            for j in range(i, n):
                bi = basis[i, j]
                ri = buf[j]
                basis[i, j] = _mod(x * bi + y * ri, m)
                buf[j] = _mod(ag * ri - bg * bi, m)
            if basis[i, i] == 0:
                basis[i, i] = m
    return basis
