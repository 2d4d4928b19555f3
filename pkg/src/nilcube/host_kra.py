"""Host-Kra cube groups, nilmanifold cubespaces ``G/Gamma`` and the spaces ``D_s(A)``.

An ``n``-configuration ``c`` over a filtered group lies in ``HK^n`` exactly
when it factors as an ordered product of face elements ``[g_v]_{F_v}``,
where ``F_v`` is the upper face ``{w >= v}`` and ``g_v`` lies in the
filtration level ``|v|``.  Peeling reads these factors off one vertex at a
time (vertices by increasing weight); the subgroup closure of all
generators ``[g]_F`` serves as an independent oracle.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .cubes import DEFAULT_MAX_DIM, dim_of, faces, peel_order, sign, weight
from .cubespace import ENUMERATION_CAP, CubeSpace, encode_rows
from .errors import CapExceeded, GroupAxiomError, InvalidCodimension, UnsupportedCarrier
from .groups import AbelianGroup, FiniteGroup, Filtration, degree_filtration

CLOSURE_LIMIT = 5 * 10**7


@lru_cache(maxsize=None)
def _upper_sets(n: int) -> tuple[tuple[int, ...], ...]:
    size = 1 << n
    return tuple(tuple(w for w in range(size) if (w & v) == v) for v in range(size))


def _tables(f: Filtration):
    grp = f.group
    return grp.mul_table(), grp.inv_array(), f.level


def hk_generators(f: Filtration, n: int) -> list[tuple[int, ...]]:
    """Face elements ``[g]_F`` for ``F`` of codimension ``k`` and ``g`` in a
    generating set of ``G_k``, ``0 <= k <= n``."""
    ident = f.group.identity
    out = []
    for k in range(n + 1):
        gens = f.generators[k] if k < len(f.generators) else ()
        for face in faces(n, k):
            verts = set(face.vertices())
            for g in gens:
                out.append(tuple(g if w in verts else ident for w in range(1 << n)))
    return out


def hk_closure(f: Filtration, n: int, limit: int = CLOSURE_LIMIT, use_compiled: bool | None = None):
    """Sorted codes of the subgroup of ``G^(2^n)`` generated by the face elements."""
    gens = hk_generators(f, n)
    mul = f.group.mul_table()
    if not gens:
        gens = [tuple([f.group.identity] * (1 << n))]
    codes = kernels.closure_bfs(np.array(gens), mul, f.group.identity, limit, use_compiled=use_compiled)
    if codes is None:
        raise CapExceeded(f"HK^{n} closure exceeds {limit} elements")
    return codes


def hk_peel_record(f: Filtration, c: Sequence[int]) -> tuple[int, ...] | None:
    """The factors ``g_v`` (indexed by vertex) of ``c``, or ``None`` if ``c`` is not in ``HK^n``."""
    n = dim_of(c)
    grp = f.group
    cur = list(c)
    record = [grp.identity] * len(cur)
    for v in peel_order(n):
        g = cur[v]
        if g not in f.G(weight(v)):
            return None
        record[v] = g
        gi = grp.inv(g)
        for w in _upper_sets(n)[v]:
            cur[w] = grp.mul(gi, cur[w])
    return tuple(record)


def hk_from_record(f: Filtration, record: Sequence[int]) -> tuple[int, ...]:
    """Ordered product of ``[g_v]_{F_v}``; inverse of :func:`hk_peel_record`."""
    n = dim_of(record)
    grp = f.group
    out = [grp.identity] * len(record)
    for v in peel_order(n):
        for w in _upper_sets(n)[v]:
            out[w] = grp.mul(out[w], record[v])
    return tuple(out)


def hk_membership_batch(f: Filtration, configs, use_compiled: bool | None = None) -> np.ndarray:
    configs = np.asarray(configs)
    n = dim_of(range(configs.shape[1]))
    mul, inv, level = _tables(f)
    return kernels.hk_peel_batch(configs, mul, inv, level, np.array(peel_order(n)), use_compiled=use_compiled)


def hk_membership(f: Filtration, c: Sequence[int], method: str = "peel") -> bool:
    """Decide ``c in HK^n(G_.)`` by peeling, by subgroup closure, or both (which must agree)."""
    if method not in ("peel", "bfs", "both"):
        raise ValueError(f"unknown method {method!r}")
    n = dim_of(c)
    if any(not 0 <= g < f.group.order for g in c):
        raise ValueError("configuration entries must be group elements")
    peel = bfs = None
    if method in ("peel", "both"):
        peel = bool(hk_membership_batch(f, np.array([c]))[0])
    if method in ("bfs", "both"):
        codes = _cached_closure(f, n)
        code = int(kernels.encode_configs(np.array([c]), f.group.order)[0])
        i = np.searchsorted(codes, code)
        bfs = bool(i < len(codes) and codes[i] == code)
    if method == "both" and peel != bfs:
        raise AssertionError(f"peeling and closure disagree on {tuple(c)}")
    return peel if peel is not None else bfs


_closure_cache: dict = {}


def _cached_closure(f: Filtration, n: int) -> np.ndarray:
    key = (id(f), n)
    if key not in _closure_cache:
        _closure_cache[key] = (f, hk_closure(f, n))
    return _closure_cache[key][1]


def hk_size(f: Filtration, n: int) -> int:
    """``prod_v |G_{|v|}|``, the order of ``HK^n`` given unique factorization."""
    out = 1
    for v in range(1 << n):
        out *= len(f.G(weight(v)))
    return out


class NilmanifoldSpace(CubeSpace):
    """Cosets ``g Gamma`` of a finite filtered group with projected Host-Kra cubes.

    Point ids follow the least element of each coset.  With a trivial
    lattice the points are the group elements themselves.
    """

    def __init__(
        self,
        filtration: Filtration,
        lattice: Iterable[int] | None = None,
        *,
        max_dim: int = DEFAULT_MAX_DIM,
        name: str | None = None,
        enumeration_cap: int = ENUMERATION_CAP,
    ) -> None:
        grp = filtration.group
        lat = frozenset([grp.identity] if lattice is None else (int(g) for g in lattice))
        if not lat or not grp.is_subgroup(lat):
            raise GroupAxiomError("lattice is not a subgroup")
        coset_of = np.full(grp.order, -1, dtype=np.int64)
        reps: list[int] = []
        members: list[list[int]] = []
        for g in grp.elements():
            if coset_of[g] < 0:
                cos = sorted(grp.mul(g, h) for h in lat)
                coset_of[cos] = len(reps)
                reps.append(g)
                members.append(cos)
        labels = [grp.label(r) if len(lat) == 1 else grp.label(r) + "G" for r in reps]
        super().__init__(
            len(reps),
            max_dim=max_dim,
            labels=labels,
            name=name or f"{grp.name}/{len(lat)}",
            claimed_degree=filtration.degree,
            enumeration_cap=enumeration_cap,
        )
        self.filtration = filtration
        self.group = grp
        self.lattice = lat
        self.coset_of = coset_of
        self.reps = np.array(reps, dtype=np.int64)
        self.members = members
        mul = grp.mul_table()
        # act[g, p] = coset of g * rep(p)
        self.act = coset_of[mul[:, self.reps]]
        self.trivial_lattice = len(lat) == 1
        self._lift_memo: dict = {}

    def left_multiplication(self, g: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.act[g])

    # -- membership -------------------------------------------------------
    def _oracle_batch(self, rows: np.ndarray) -> np.ndarray:
        if self.trivial_lattice:
            return hk_membership_batch(self.filtration, self.reps[rows])
        return np.fromiter((self.find_lift(tuple(int(x) for x in r)) is not None for r in rows),
                           dtype=bool, count=len(rows))

    def _oracle(self, c: tuple) -> bool:
        return bool(self._oracle_batch(np.array([c]))[0])

    def find_lift(self, c: Sequence[int]) -> tuple[int, ...] | None:
        """A Host-Kra cube over ``c`` (entries in the cosets ``c(w)``), or ``None``.

        Backtracking peel: at each vertex pick a coset member in the right
        filtration level, then strip it off the upper face.  Left
        multiplication commutes with the lattice, so states are point ids.
        """
        n = dim_of(c)
        order = peel_order(n)
        grp = self.group
        level = self.filtration.level
        uppers = _upper_sets(n)
        memo = self._lift_memo

        def rec(j: int, state: tuple) -> list | None:
            if j == len(order):
                return []
            key = (n, j, state)
            if key in memo and memo[key] is None:
                return None
            v = order[j]
            k = weight(v)
            for e in self.members[state[v]]:
                if level[e] < k:
                    continue
                ei = grp.inv(e)
                new = list(state)
                for w in uppers[v]:
                    new[w] = int(self.act[ei, new[w]])
                rest = rec(j + 1, tuple(new))
                if rest is not None:
                    return [e] + rest
            memo[key] = None
            return None

        choice = rec(0, tuple(int(x) for x in c))
        if choice is None:
            return None
        record = [grp.identity] * (1 << n)
        for v, e in zip(order, choice):
            record[v] = e
        lift = hk_from_record(self.filtration, record)
        if tuple(int(self.coset_of[g]) for g in lift) != tuple(c):  # pragma: no cover
            raise AssertionError("lift does not project to the configuration")
        return lift

    # -- enumeration --------------------------------------------------------
    def _enumerate(self, n: int) -> np.ndarray:
        ident = int(self.coset_of[self.group.identity])
        return self._build(self.act, ident, self.npoints, n)

    def _build(self, act: np.ndarray, ident: int, npoints: int, n: int) -> np.ndarray:
        """Projected cubes, built right to left: ``S <- [g]_{F_v} . S`` over vertices
        in reverse peel order, deduplicating after every vertex."""
        size = 1 << n
        S = np.full((1, size), ident, dtype=np.int64)
        uppers = _upper_sets(n)
        for v in reversed(peel_order(n)):
            up = list(uppers[v])
            level = sorted(self.filtration.G(weight(v)))
            if len(level) == 1:
                continue
            blocks = []
            for g in level:
                T = S.copy()
                T[:, up] = act[g][S[:, up]]
                blocks.append(T)
            S = np.concatenate(blocks)
            codes = np.unique(encode_rows(S, npoints))
            if len(codes) > self.enumeration_cap:
                raise CapExceeded(f"more than {self.enumeration_cap} cubes at dimension {n}")
            S = kernels.decode_codes(codes, npoints, size).astype(np.int64)
        return S

    def project_cubes(self, assignment, n: int) -> np.ndarray | None:
        """Images of all ``n``-cubes under a point assignment, built directly on
        the image when the assignment is compatible with left multiplication
        (``None`` otherwise)."""
        assignment = np.asarray(assignment, dtype=np.int64)
        m = int(assignment.max()) + 1
        reps = np.array([int(np.nonzero(assignment == y)[0][0]) for y in range(m)])
        induced = assignment[self.act[:, reps]]  # (|G|, m)
        if not np.array_equal(induced[:, assignment], assignment[self.act]):
            return None
        ident = int(assignment[self.coset_of[self.group.identity]])
        return self._build(induced, ident, m, n)


class HostKraSpace(NilmanifoldSpace):
    """The group itself with cubes ``HK^n(G_.)``."""

    def __init__(self, filtration: Filtration, **kw) -> None:
        super().__init__(filtration, None, **kw)


class DkSpace(NilmanifoldSpace):
    """``D_s(A)``: all configurations of dimension ``<= s`` are cubes; beyond
    that, a cube is one whose ``(s+1)``-faces all have zero alternating sum."""

    def __init__(self, group: FiniteGroup, s: int, **kw) -> None:
        if s < 1:
            raise InvalidCodimension("D_s needs s >= 1")
        if not group.is_abelian:
            raise UnsupportedCarrier("D_s needs an abelian group")
        kw.setdefault("name", f"D{s}({group.name})")
        super().__init__(degree_filtration(group, s), None, **kw)
        self.s = s
        self.abelian = group

    def _oracle_batch(self, rows: np.ndarray) -> np.ndarray:
        n = dim_of(range(rows.shape[1]))
        if n <= self.s:
            return np.ones(len(rows), dtype=bool)
        d = self.s + 1
        fv = [face.vertices() for face in faces(n, n - d)]
        signs = [sign(u) for u in range(1 << d)]
        grp = self.abelian
        return kernels.face_sum_batch(rows, grp.mul_table(), grp.inv_array(), fv, signs, grp.identity)

    def _oracle(self, c: tuple) -> bool:
        return bool(self._oracle_batch(np.array([c]))[0])


def dk_space(A: FiniteGroup, s: int, max_dim: int = DEFAULT_MAX_DIM) -> DkSpace:
    return DkSpace(A, s, max_dim=max_dim)


def nilmanifold_space(f: Filtration, lattice: Iterable[int] | None = None,
                      max_dim: int = DEFAULT_MAX_DIM) -> NilmanifoldSpace:
    return NilmanifoldSpace(f, lattice, max_dim=max_dim)


def one_point_space(max_dim: int = DEFAULT_MAX_DIM) -> NilmanifoldSpace:
    return NilmanifoldSpace(degree_filtration(AbelianGroup(()), 0), None, max_dim=max_dim, name="pt")
