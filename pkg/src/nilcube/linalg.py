"""Integer linear algebra: congruence systems mod ``m``, Smith normal form,
and decomposition of small finite abelian groups into cyclic factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from . import kernels

# rows are pushed through the compiled insertion in blocks of this size
_BLOCK = 512


@dataclass
class Certificate:
    """Integer combination ``sum lambda_e * equation_e`` whose left side
    vanishes mod ``modulus`` while its right side equals ``value != 0``."""

    combination: dict
    value: int
    modulus: int

    def verify(self, A: np.ndarray, b: np.ndarray) -> bool:
        m = self.modulus
        lhs = np.zeros(A.shape[1], dtype=object)
        rhs = 0
        for e, lam in self.combination.items():
            lhs = lhs + lam * A[e].astype(object)
            rhs += lam * int(b[e])
        return all(int(x) % m == 0 for x in lhs) and rhs % m == self.value % m != 0


@dataclass
class ModSolveResult:
    solution: list | None
    certificate: Certificate | None = None
    pivots: list = field(default_factory=list)

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _augmented(A: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    # unknown 0 goes to the last unknown column so back-substitution fixes it first
    return np.mod(np.column_stack([A[:, ::-1], b]), m).astype(np.int64)


def _tracked_basis(rows: np.ndarray, m: int):
    """Pure-Python insertion that also records each basis row as a
    combination of input rows (mod ``m``)."""
    n = rows.shape[1]
    basis = [[m if i == j else 0 for j in range(n)] for i in range(n)]
    combos: list[dict] = [{} for _ in range(n)]
    for e, row in enumerate(rows):
        buf = [int(x) % m for x in row]
        combo = {e: 1}
        for i in range(n):
            bval = buf[i]
            if bval == 0:
                continue
            a = basis[i][i]
            g, x, y = _xgcd(a, bval)
            ag, bg = a // g, bval // g
            bi_row = basis[i]
            basis[i] = [(x * p + y * q) % m for p, q in zip(bi_row, buf)]
            buf = [(ag * q - bg * p) % m for p, q in zip(bi_row, buf)]
            old = combos[i]
            new_bi: dict = {}
            new_r: dict = {}
            for key in set(old) | set(combo):
                p, q = old.get(key, 0), combo.get(key, 0)
                u = (x * p + y * q) % m
                w = (ag * q - bg * p) % m
                if u:
                    new_bi[key] = u
                if w:
                    new_r[key] = w
            combos[i], combo = new_bi, new_r
            if basis[i][i] == 0:
                basis[i][i] = m
    return basis, combos


def solve_linear_mod(A, b, m: int, use_compiled: bool | None = None) -> ModSolveResult:
    """Solve ``A x = b (mod m)``.

    Returns the lexicographically least solution with entries in ``[0, m)``,
    or a :class:`Certificate` of inconsistency.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    nvar = A.shape[1]
    if m == 1:
        return ModSolveResult([0] * nvar)
    aug = _augmented(A, b, m)
    uniq, first = np.unique(aug, axis=0, return_index=True) if len(aug) else (aug, np.zeros(0, int))
    order = np.argsort(first)
    uniq, first = uniq[order], first[order]
    basis = np.zeros((nvar + 1, nvar + 1), dtype=np.int64)
    np.fill_diagonal(basis, m)
    bad_at = None
    for start in range(0, len(uniq), _BLOCK):
        kernels.hnf_insert_rows(basis, uniq[start : start + _BLOCK], m, use_compiled=use_compiled)
        if basis[nvar, nvar] != m:
            bad_at = min(start + _BLOCK, len(uniq))
            break
    if bad_at is not None:
        tb, combos = _tracked_basis(uniq[:bad_at], m)
        value = tb[nvar][nvar] % m
        combination = {int(first[e]): c for e, c in sorted(combos[nvar].items())}
        cert = Certificate(combination, value, m)
        if not cert.verify(A, b):  # pragma: no cover - algebraic invariant
            raise AssertionError("inconsistency certificate failed verification")
        return ModSolveResult(None, cert)
    x = [0] * nvar  # indexed by column
    for i in range(nvar - 1, -1, -1):
        p = int(basis[i, i])
        r = int(basis[i, nvar]) - sum(int(basis[i, j]) * x[j] for j in range(i + 1, nvar))
        r %= m
        if r % p:  # pragma: no cover - excluded by the triangular form
            raise AssertionError("back substitution hit a non-divisible pivot")
        x[i] = (r // p) % (m // p)
    sol = x[::-1]
    if np.any(np.mod(A @ np.array(sol, dtype=np.int64) - b, m)):  # pragma: no cover
        raise AssertionError("solution does not satisfy the system")
    return ModSolveResult(sol, None, [int(basis[i, i]) for i in range(nvar)][::-1])


def smith_normal_form(M: Sequence[Sequence[int]]):
    """``(diag, U, V)`` with ``U @ M @ V`` diagonal, ``diag`` the invariant factors
    (each dividing the next), ``U`` and ``V`` unimodular; Python ints throughout."""
    A = [list(map(int, row)) for row in M]
    r = len(A)
    c = len(A[0]) if r else 0
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        A[dst] = [x + k * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for row in A:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]

    t = 0
    while t < min(r, c):
        nz = [(abs(A[i][j]), i, j) for i in range(t, r) for j in range(t, c) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, r):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(i, t, -q)
                    if A[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, c):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(j, t, -q)
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # divisibility of the remaining block by the pivot
            bad = next(
                ((i, j) for i in range(t + 1, r) for j in range(t + 1, c) if A[i][j] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = [A[i][i] for i in range(min(r, c))]
    return diag, U, V


def _int_inverse(V: list[list[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix via exact fractions."""
    from fractions import Fraction

    n = len(V)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(V)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    inv = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in inv for x in row):
        raise ArithmeticError("matrix is not unimodular")
    return [[int(x) for x in row] for row in inv]


@dataclass
class AbelianDecomposition:
    """``moduli`` are invariant factors; ``generators[j]`` has order ``moduli[j]``.
    ``coords[x]`` gives the exponent vector of element ``x``."""

    moduli: tuple
    generators: list
    coords: dict
    elements_by_coords: dict


def decompose_abelian(
    elements: Sequence[Hashable],
    mul: Callable[[Hashable, Hashable], Hashable],
    identity: Hashable,
) -> AbelianDecomposition:
    elements = list(elements)
    target = set(elements)

    def power(g, e):
        out = identity
        for _ in range(e):
            out = mul(out, g)
        return out

    def order(g):
        k, h = 1, g
        while h != identity:
            h = mul(h, g)
            k += 1
        return k

    def span(gens):
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    gens: list = []
    covered = {identity}
    for g in elements:
        if g not in covered:
            gens.append(g)
            covered = span(gens)
            if len(covered) == len(target):
                break
    if not gens:
        return AbelianDecomposition((), [], {identity: ()}, {(): identity})
    orders = [order(g) for g in gens]
    relations = []
    for i, o in enumerate(orders):
        relations.append([o if j == i else 0 for j in range(len(gens))])
    first_seen: dict = {}
    for vec in np.ndindex(*orders):
        x = identity
        for g, e in zip(gens, vec):
            x = mul(x, power(g, e))
        if x in first_seen:
            relations.append([a - b for a, b in zip(vec, first_seen[x])])
        else:
            first_seen[x] = vec
    diag, _, V = smith_normal_form(relations)
    Vinv = _int_inverse(V)
    new_gens, moduli = [], []
    for j, d in enumerate(diag):
        if abs(d) == 1:
            continue
        h = identity
        for i, g in enumerate(gens):
            e = Vinv[j][i] % orders[i]
            h = mul(h, power(g, e))
        new_gens.append(h)
        moduli.append(abs(d))
    coords: dict = {}
    by_coords: dict = {}
    for vec in np.ndindex(*moduli):
        x = identity
        for g, e in zip(new_gens, vec):
            x = mul(x, power(g, e))
        vec = tuple(int(e) for e in vec)
        coords[x] = vec
        by_coords[vec] = x
    if len(coords) != len(target):  # pragma: no cover - algebraic invariant
        raise ArithmeticError("cyclic decomposition does not cover the group")
    return AbelianDecomposition(tuple(moduli), new_gens, coords, by_coords)


def integer_row_basis(A) -> list[list[int]]:
    """Echelon rows spanning the same integer lattice as the rows of ``A``."""
    basis: dict[int, list[int]] = {}
    A = np.asarray(A, dtype=np.int64)
    if A.ndim == 2 and len(A):
        A = np.unique(A, axis=0)  # repeated rows span nothing new
    for row in A.tolist():
        row = [int(x) for x in row]
        for col in range(len(row)):
            if not row[col]:
                continue
            if col not in basis:
                if row[col] < 0:
                    row = [-x for x in row]
                basis[col] = row
                break
            piv = basis[col]
            g, x, y = _xgcd(piv[col], row[col])
            a, b = piv[col] // g, row[col] // g
            basis[col] = [x * p + y * q for p, q in zip(piv, row)]
            row = [a * q - b * p for p, q in zip(piv, row)]
    return [basis[c] for c in sorted(basis)]


def torsion_exponent(A) -> int:
    """Largest invariant factor of the integer matrix ``A`` (1 if none)."""
    rows = integer_row_basis(A)
    if not rows:
        return 1
    diag, _, _ = smith_normal_form(rows)
    nz = [abs(d) for d in diag if d]
    return max(nz) if nz else 1
