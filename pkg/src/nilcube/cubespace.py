"""Finite cubespaces, their axiom checkers, canonical factors and structure groups.

Points are the integers ``0 .. npoints-1``.  Cube sets at each dimension are
either served by a membership oracle or materialized as sorted integer codes
(base ``npoints``, vertex 0 least significant) once they have been enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .cubes import DEFAULT_MAX_DIM, corner, dim_of, faces_with_top, weight
from .errors import (
    CapExceeded,
    CheckResult,
    DimensionMismatch,
    NotANilspace,
    StructureExtractionError,
)

ENUMERATION_CAP = 10**6
# above this many elementary checks the axiom checkers switch to sampling
EXHAUSTIVE_WORK = 4 * 10**6


def encode_rows(rows: np.ndarray, base: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2:
        raise DimensionMismatch("expected a 2-d array of configurations")
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    if float(base) ** rows.shape[1] >= 2.0**62:
        raise OverflowError("configuration codes would overflow 64 bits")
    return kernels.encode_configs(rows, base)


class CubeSpace:
    """Base class.  Subclasses implement :meth:`_oracle` (single configuration,
    dimension >= 1) and may override :meth:`_oracle_batch` and :meth:`_enumerate`."""

    def __init__(
        self,
        npoints: int,
        *,
        max_dim: int = DEFAULT_MAX_DIM,
        labels: Sequence[str] | None = None,
        name: str = "X",
        claimed_degree: int | None = None,
        enumeration_cap: int = ENUMERATION_CAP,
    ) -> None:
        if npoints < 1:
            raise ValueError("a cubespace needs at least one point")
        self.npoints = npoints
        self.max_dim = max_dim
        self.labels = list(labels) if labels is not None else None
        self.name = name
        self.claimed_degree = claimed_degree
        self.enumeration_cap = enumeration_cap
        self._codes: dict[int, np.ndarray] = {}
        self._memo: dict[tuple, bool] = {}

    # -- basic protocol -------------------------------------------------
    @property
    def points(self) -> range:
        return range(self.npoints)

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def _check_dim(self, n: int) -> None:
        if n < 0 or n > self.max_dim:
            raise DimensionMismatch(f"dimension {n} outside 0..{self.max_dim} for {self.name}")

    def _oracle(self, c: tuple) -> bool:
        raise NotImplementedError

    def _oracle_batch(self, rows: np.ndarray) -> np.ndarray:
        return np.fromiter((self._oracle(tuple(int(x) for x in r)) for r in rows), dtype=bool, count=len(rows))

    def _enumerate(self, n: int) -> np.ndarray:
        return extend_to_cubes(self, n, limit=self.enumeration_cap)

    def is_cube(self, c: Sequence[int]) -> bool:
        n = dim_of(c)
        self._check_dim(n)
        c = tuple(int(x) for x in c)
        if any(not 0 <= x < self.npoints for x in c):
            raise ValueError(f"configuration {c} uses points outside the space")
        if n == 0:
            return True
        if n in self._codes:
            code = int(encode_rows(np.array([c]), self.npoints)[0])
            arr = self._codes[n]
            i = np.searchsorted(arr, code)
            return bool(i < len(arr) and arr[i] == code)
        if c not in self._memo:
            self._memo[c] = bool(self._oracle(c))
        return self._memo[c]

    def is_cube_batch(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2:
            raise DimensionMismatch("expected a 2-d array of configurations")
        n = dim_of(range(rows.shape[1]))
        self._check_dim(n)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        if n == 0:
            return np.ones(rows.shape[0], dtype=bool)
        if n in self._codes:
            codes = self._codes[n]
            q = encode_rows(rows, self.npoints)
            pos = np.minimum(np.searchsorted(codes, q), max(len(codes) - 1, 0))
            return codes[pos] == q if len(codes) else np.zeros(len(q), dtype=bool)
        return np.asarray(self._oracle_batch(rows), dtype=bool)

    def cubes(self, n: int) -> np.ndarray:
        """All ``n``-cubes as rows of an ``int32`` array, sorted by code."""
        self._check_dim(n)
        if n not in self._codes:
            if n == 0:
                self._codes[0] = np.arange(self.npoints, dtype=np.int64)
            else:
                rows = np.asarray(self._enumerate(n), dtype=np.int64).reshape(-1, 1 << n)
                self._codes[n] = np.unique(encode_rows(rows, self.npoints))
        return kernels.decode_codes(self._codes[n], self.npoints, 1 << n)

    def cube_codes(self, n: int) -> np.ndarray:
        self.cubes(n)
        return self._codes[n]

    def count_cubes(self, n: int) -> int:
        return len(self.cube_codes(n))

    def is_materialized(self, n: int) -> bool:
        return n in self._codes

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} |X|={self.npoints}>"


def extend_to_cubes(
    space: CubeSpace,
    n: int,
    candidates: Sequence[Iterable[int]] | None = None,
    stop: int | None = None,
    limit: int | None = None,
) -> np.ndarray:
    """Breadth-first backtracking over vertices ``0 .. stop-1``.

    ``candidates[v]`` restricts the value at vertex ``v``.  A partial
    assignment survives when every face whose largest vertex has just been
    assigned is a cube.  Returns the surviving rows.
    """
    size = 1 << n
    stop = size if stop is None else stop
    rows = np.zeros((1, 0), dtype=np.int64)
    allpts = np.arange(space.npoints, dtype=np.int64)
    for v in range(stop):
        cand = allpts if candidates is None else np.asarray(sorted(set(candidates[v])), dtype=np.int64)
        if len(cand) == 0:
            return np.zeros((0, v + 1), dtype=np.int64)
        k = rows.shape[0]
        rows = np.column_stack([np.repeat(rows, len(cand), axis=0), np.tile(cand, k)])
        for fv in faces_with_top(v, n):
            if len(rows) == 0:
                break
            rows = rows[space.is_cube_batch(rows[:, list(fv)])]
        if limit is not None and len(rows) > limit:
            raise CapExceeded(f"more than {limit} partial configurations at vertex {v}", partial=None)
        if len(rows) == 0:
            return np.zeros((0, v + 1), dtype=np.int64)
    return rows


class ExplicitCubeSpace(CubeSpace):
    """Cube sets given outright for dimensions ``1 .. max_dim``."""

    def __init__(self, npoints: int, cubes: dict, **kw) -> None:
        kw.setdefault("max_dim", max(cubes) if cubes else 1)
        super().__init__(npoints, **kw)
        for n in range(1, self.max_dim + 1):
            rows = np.asarray(list(cubes.get(n, [])), dtype=np.int64).reshape(-1, 1 << n)
            self._codes[n] = np.unique(encode_rows(rows, npoints))

    def _oracle(self, c: tuple) -> bool:  # every dimension is materialized
        return False

    @classmethod
    def copy_of(cls, space: CubeSpace, max_dim: int, remove: dict | None = None, **kw) -> "ExplicitCubeSpace":
        """Snapshot of ``space`` up to ``max_dim``, optionally dropping listed cubes."""
        remove = remove or {}
        cubes = {}
        for n in range(1, max_dim + 1):
            drop = {tuple(c) for c in remove.get(n, [])}
            cubes[n] = [tuple(int(x) for x in r) for r in space.cubes(n) if tuple(int(x) for x in r) not in drop]
        kw.setdefault("name", space.name + "'")
        kw.setdefault("labels", space.labels)
        return cls(space.npoints, cubes, max_dim=max_dim, **kw)


class QuotientSpace(CubeSpace):
    """Image of ``source`` under a point assignment; cubes are images of source cubes."""

    def __init__(self, source: CubeSpace, assignment: Sequence[int], **kw) -> None:
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.shape != (source.npoints,):
            raise ValueError("assignment must give one target point per source point")
        npts = int(assignment.max()) + 1
        if set(assignment.tolist()) != set(range(npts)):
            raise ValueError("assignment must be onto 0..m-1")
        kw.setdefault("max_dim", source.max_dim)
        super().__init__(npts, **kw)
        self.source = source
        self.assignment = assignment
        self.fibers = [np.nonzero(assignment == y)[0] for y in range(npts)]

    def _enumerate(self, n: int) -> np.ndarray:
        project = getattr(self.source, "project_cubes", None)
        if project is not None:
            rows = project(self.assignment, n)
            if rows is not None:
                return rows
        return self.assignment[self.source.cubes(n)]

    def _oracle_batch(self, rows: np.ndarray) -> np.ndarray:
        n = dim_of(range(rows.shape[1]))
        return np.isin(encode_rows(rows, self.npoints), self.cube_codes(n))

    def _oracle(self, c: tuple) -> bool:
        return bool(self._oracle_batch(np.array([c]))[0])

    def has_lift(self, c: Sequence[int]) -> bool:
        """Membership decided by searching for a source cube over ``c``."""
        n = dim_of(c)
        cands = [self.fibers[y] for y in c]
        return len(extend_to_cubes(self.source, n, candidates=cands)) > 0


class FactorMap:
    def __init__(self, source: CubeSpace, target: CubeSpace, assignment: Sequence[int]) -> None:
        self.source = source
        self.target = target
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.fibers = [np.nonzero(self.assignment == y)[0] for y in range(target.npoints)]
        if any(len(f) == 0 for f in self.fibers):
            raise ValueError("factor maps must be onto")

    def __call__(self, x: int) -> int:
        return int(self.assignment[x])

    def apply(self, c):
        return self.assignment[np.asarray(c, dtype=np.int64)]

    def fiber_of(self, x: int) -> np.ndarray:
        return self.fibers[self(x)]

    def partition(self) -> frozenset:
        return frozenset(frozenset(int(x) for x in f) for f in self.fibers)

    def check(self, max_n: int | None = None) -> CheckResult:
        """Images of cubes are cubes and every target cube has a cube above it."""
        max_n = min(self.source.max_dim, self.target.max_dim) if max_n is None else max_n
        for n in range(1, max_n + 1):
            img = np.unique(encode_rows(self.apply(self.source.cubes(n)), self.target.npoints))
            tgt = self.target.cube_codes(n)
            bad = np.setdiff1d(img, tgt)
            if len(bad):
                return CheckResult(False, witness=("image not a cube", n, int(bad[0])))
            missing = np.setdiff1d(tgt, img)
            if len(missing):
                return CheckResult(False, witness=("target cube without lift", n, int(missing[0])))
        return CheckResult(True)


# -- axiom checkers -----------------------------------------------------


def check_ergodic(X: CubeSpace) -> CheckResult:
    N = X.npoints
    xs, ys = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    rows = np.column_stack([xs.ravel(), ys.ravel()])
    ok = X.is_cube_batch(rows)
    if ok.all():
        return CheckResult(True, counts={"pairs": N * N})
    i = int(np.argmin(ok))
    return CheckResult(False, witness=tuple(int(v) for v in rows[i]), detail="pair is not an edge")


def _halves(cubes: np.ndarray, n: int, k: int, base: int):
    lo = [w for w in range(1 << n) if not (w >> (k - 1)) & 1]
    hi = [w | (1 << (k - 1)) for w in lo]
    return encode_rows(cubes[:, lo], base), encode_rows(cubes[:, hi], base)


def check_glueing(X: CubeSpace, max_n: int | None = None, seed: int = 0,
                  work_limit: int = EXHAUSTIVE_WORK) -> CheckResult:
    """``[c1,c2]`` and ``[c2,c3]`` cubes imply ``[c1,c3]`` is a cube, along every coordinate."""
    max_n = X.max_dim if max_n is None else max_n
    rng = np.random.default_rng(seed)
    checked = 0
    coverage = "exhaustive"
    for n in range(1, max_n + 1):
        cubes = X.cubes(n)
        sub = 1 << (n - 1)
        for k in range(1, n + 1):
            lo, hi = _halves(cubes, n, k, X.npoints)
            pairs = set(zip(lo.tolist(), hi.tolist()))
            uppers: dict = {}
            lowers: dict = {}
            for a, b in pairs:
                uppers.setdefault(a, []).append(b)
                lowers.setdefault(b, []).append(a)
            work = sum(len(lowers.get(m, [])) * len(uppers.get(m, [])) for m in uppers)
            if work <= work_limit:
                for mid in sorted(uppers):
                    for a in sorted(lowers.get(mid, [])):
                        for c in sorted(uppers[mid]):
                            checked += 1
                            if (a, c) not in pairs:
                                return _glue_witness(X, n, k, a, mid, c, sub)
            else:
                coverage = "sampled"
                mids = [m for m in uppers if m in lowers]
                for _ in range(work_limit // 4):
                    mid = mids[rng.integers(len(mids))]
                    a = lowers[mid][rng.integers(len(lowers[mid]))]
                    c = uppers[mid][rng.integers(len(uppers[mid]))]
                    checked += 1
                    if (a, c) not in pairs:
                        return _glue_witness(X, n, k, a, mid, c, sub)
    if coverage == "sampled":
        coverage = f"sampled:{checked}"
    return CheckResult(True, coverage=coverage, counts={"triples": checked})


def _glue_witness(X, n, k, a, mid, c, sub):
    dec = [tuple(int(v) for v in kernels.decode_codes(np.array([code]), X.npoints, sub)[0]) for code in (a, mid, c)]
    return CheckResult(False, witness={"dimension": n, "coordinate": k, "c1": dec[0], "c2": dec[1], "c3": dec[2]},
                       detail=f"[c1,c2] and [c2,c3] are {n}-cubes along coordinate {k} but [c1,c3] is not")


def check_uniqueness(X: CubeSpace, k: int) -> CheckResult:
    """Two ``k``-cubes agreeing off the top vertex coincide."""
    if k == 0:
        ok = X.npoints == 1
        return CheckResult(ok, witness=None if ok else (0, 1))
    cubes = X.cubes(k)
    size = 1 << k
    heads = encode_rows(cubes[:, : size - 1], X.npoints)
    order = np.argsort(heads, kind="stable")
    h = heads[order]
    dup = np.nonzero(h[1:] == h[:-1])[0]
    if len(dup):
        i, j = order[dup[0]], order[dup[0] + 1]
        return CheckResult(False, witness=(tuple(map(int, cubes[i])), tuple(map(int, cubes[j]))),
                           detail="two distinct cubes agree off the top vertex")
    return CheckResult(True, counts={"cubes": len(cubes)})


def check_completion(X: CubeSpace, n: int, limit: int = ENUMERATION_CAP) -> CheckResult:
    """Every corner (configuration on all vertices but the top whose faces
    avoiding the top are cubes) extends to an ``n``-cube."""
    if n == 0:
        return CheckResult(True)
    size = 1 << n
    corners = extend_to_cubes(X, n, stop=size - 1, limit=limit)
    completed = np.unique(encode_rows(X.cubes(n)[:, : size - 1], X.npoints))
    codes = encode_rows(corners, X.npoints)
    ok = np.isin(codes, completed)
    if ok.all():
        return CheckResult(True, counts={"corners": len(corners)})
    i = int(np.argmin(ok))
    return CheckResult(False, witness=tuple(int(v) for v in corners[i]),
                       detail=f"corner with no completion to an {n}-cube")


def check_cube_symmetries(X: CubeSpace, max_n: int | None = None) -> CheckResult:
    """Cube sets are closed under faces, coordinate permutations and reflections."""
    from .cubes import Face, permute_coordinates, reflect, restrict

    max_n = X.max_dim if max_n is None else max_n
    for n in range(1, max_n + 1):
        codes = set(X.cube_codes(n).tolist())
        for c in X.cubes(n):
            c = tuple(int(v) for v in c)
            for k in range(1, n + 1):
                for other in (reflect(c, k),):
                    if int(encode_rows(np.array([other]), X.npoints)[0]) not in codes:
                        return CheckResult(False, witness=(c, "reflect", k))
                for b in (0, 1):
                    if n > 1 and not X.is_cube(restrict(c, Face(n, ((k, b),)))):
                        return CheckResult(False, witness=(c, "face", k, b))
            for i, j in combinations(range(1, n + 1), 2):
                perm = list(range(1, n + 1))
                perm[i - 1], perm[j - 1] = j, i
                other = permute_coordinates(c, perm)
                if int(encode_rows(np.array([other]), X.npoints)[0]) not in codes:
                    return CheckResult(False, witness=(c, "swap", i, j))
    return CheckResult(True)


# -- canonical factors --------------------------------------------------


def corner_relation(X: CubeSpace, k: int) -> np.ndarray:
    """``R[x, y]`` is true when the corner ``x..x y`` is a ``(k+1)``-cube."""
    N = X.npoints
    size = 1 << (k + 1)
    xs, ys = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    rows = np.repeat(xs.reshape(-1, 1), size, axis=1)
    rows[:, -1] = ys.ravel()
    return X.is_cube_batch(rows).reshape(N, N)


def canonical_factor(X: CubeSpace, k: int) -> FactorMap:
    """Quotient by ``x ~ y`` iff the ``(k+1)``-corner with top ``y`` over ``x`` is a cube.

    The relation is checked to be an equivalence first.
    """
    if k < 0:
        raise ValueError("canonical factors are indexed by k >= 0")
    if k + 1 > X.max_dim:
        raise DimensionMismatch(f"need cubes of dimension {k + 1}, cap is {X.max_dim}")
    R = corner_relation(X, k)
    N = X.npoints
    diag = np.nonzero(~np.diag(R))[0]
    if len(diag):
        x = int(diag[0])
        raise NotANilspace("corner relation is not reflexive", witness=corner(x, x, k + 1))
    asym = np.argwhere(R & ~R.T)
    if len(asym):
        x, y = map(int, asym[0])
        raise NotANilspace("corner relation is not symmetric", witness=(x, y))
    two_step = (R.astype(np.int64) @ R.astype(np.int64)) > 0
    bad = np.argwhere(two_step & ~R)
    if len(bad):
        x, z = map(int, bad[0])
        y = int(np.nonzero(R[x] & R[:, z])[0][0])
        raise NotANilspace("corner relation is not transitive", witness=(x, y, z))
    assign = np.full(N, -1, dtype=np.int64)
    nxt = 0
    for x in range(N):
        if assign[x] < 0:
            assign[R[x]] = nxt
            nxt += 1
    degree = X.claimed_degree
    target = QuotientSpace(
        X,
        assign,
        name=f"pi{k}({X.name})",
        max_dim=X.max_dim,
        claimed_degree=None if degree is None else min(degree, k),
    )
    return FactorMap(X, target, assign)


# -- structure group ----------------------------------------------------


@dataclass
class StructureGroupAction:
    """A finite abelian group acting freely on ``X`` with orbits the fibers
    of ``factor``.  ``table[a, x]`` is ``a . x``."""

    group: object
    table: np.ndarray
    factor: FactorMap
    degree: int

    def act(self, a: int, x: int) -> int:
        return int(self.table[a, x])

    def act_config(self, alpha: Sequence[int], c: Sequence[int]) -> tuple:
        return tuple(int(self.table[a, x]) for a, x in zip(alpha, c))

    def maps(self) -> list[tuple]:
        return [tuple(int(v) for v in row) for row in self.table]

    def difference(self, x: int, y: int) -> int:
        """The unique ``a`` with ``a . x = y``."""
        hits = np.nonzero(self.table[:, x] == y)[0]
        if len(hits) != 1:
            raise StructureExtractionError(f"points {x} and {y} are not in one orbit", witness=(x, y))
        return int(hits[0])

    def differences(self, xs, ys) -> np.ndarray:
        inv = self._inverse_table
        return inv[np.asarray(xs), np.asarray(ys)]

    @property
    def _inverse_table(self) -> np.ndarray:
        if not hasattr(self, "_inv_cache"):
            N = self.table.shape[1]
            inv = np.full((N, N), -1, dtype=np.int64)
            for a in range(self.table.shape[0]):
                inv[np.arange(N), self.table[a]] = a
            self._inv_cache = inv
        return self._inv_cache


def structure_group(X: CubeSpace, s: int, node_limit: int | None = None) -> StructureGroupAction:
    """Fiber-preserving ``s``-translations of ``X`` over ``canonical_factor(X, s-1)``.

    Verifies the group is abelian, acts freely, and is transitive on fibers.
    The result is cached on the space.
    """
    if s < 1:
        raise ValueError("structure groups exist for degree s >= 1")
    cache = X.__dict__.setdefault("_structure_groups", {})
    if node_limit is None and s in cache:
        return cache[s]
    sg = _extract_structure_group(X, s, node_limit)
    if node_limit is None:
        cache[s] = sg
    return sg


def _extract_structure_group(X: CubeSpace, s: int, node_limit: int | None) -> StructureGroupAction:
    from .groups import AbelianGroup
    from .linalg import decompose_abelian
    from .translations import enumerate_translations

    fm = canonical_factor(X, s - 1)
    N = X.npoints
    ident = tuple(range(N))
    if all(len(f) == 1 for f in fm.fibers):
        return StructureGroupAction(AbelianGroup(()), np.array([ident]), fm, s)
    cands = [fm.fiber_of(x) for x in range(N)]
    tg = enumerate_translations(X, s, candidates=cands, node_limit=node_limit)
    maps = sorted(tg.elements)
    mapset = set(maps)

    def compose(p, q):  # p after q
        return tuple(p[q[x]] for x in range(N))

    for p in maps:
        for q in maps:
            pq = compose(p, q)
            if pq != compose(q, p):
                raise StructureExtractionError("fiber-preserving translations do not commute", witness=(p, q))
            if pq not in mapset:
                raise StructureExtractionError("fiber-preserving translations are not closed", witness=(p, q))
    for p in maps:
        if p != ident and any(p[x] == x for x in range(N)):
            x = next(x for x in range(N) if p[x] == x)
            raise StructureExtractionError("action is not free", witness=(p, x))
    for x in range(N):
        orbit = {p[x] for p in maps}
        if orbit != set(int(v) for v in fm.fiber_of(x)):
            raise StructureExtractionError("action is not transitive on a fiber", witness=x)
    dec = decompose_abelian(maps, compose, ident)
    grp = AbelianGroup(dec.moduli)
    table = np.zeros((grp.order, N), dtype=np.int64)
    for p, vec in dec.coords.items():
        table[grp.from_digits(vec)] = p
    return StructureGroupAction(grp, table, fm, s)


class ExtensionSpace(CubeSpace):
    """Points ``(b, a)`` of ``base x A``, coded ``b * |A| + a``.

    A configuration is a cube when its base part is a cube and, on every
    ``(s+1)``-face, the alternating sum of the ``A`` part equals
    ``cocycle(base part on that face)``.  With the zero cocycle this is the
    product of ``base`` with ``D_s(A)``.
    """

    def __init__(self, base: CubeSpace, group, s: int, cocycle, **kw) -> None:
        from .cubes import faces as _faces

        if not getattr(group, "is_abelian", False):
            raise ValueError("the fiber group must be abelian")
        kw.setdefault("max_dim", base.max_dim)
        kw.setdefault("claimed_degree", s)
        kw.setdefault("name", f"{base.name}x{group.name}")
        m = group.order
        labels = [f"({base.label(b)},{group.label(a)})" for b in range(base.npoints) for a in range(m)]
        kw.setdefault("labels", labels)
        super().__init__(base.npoints * m, **kw)
        self.base = base
        self.group = group
        self.s = s
        base_cubes = base.cubes(s + 1)
        self._base_codes = encode_rows(base_cubes, base.npoints)
        self._values = np.array([int(cocycle(tuple(int(v) for v in r))) for r in base_cubes], dtype=np.int64)
        self._faces = _faces
        self.cocycle_table = {tuple(int(v) for v in r): int(val) for r, val in zip(base_cubes, self._values)}

    def point(self, b: int, a: int) -> int:
        return b * self.group.order + a

    def split_point(self, x: int) -> tuple[int, int]:
        return divmod(x, self.group.order)

    def _oracle_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        n = dim_of(range(rows.shape[1]))
        m = self.group.order
        b, a = rows // m, rows % m
        ok = self.base.is_cube_batch(b)
        if n < self.s + 1:
            return ok
        add = self.group.mul_table().astype(np.int64)
        neg = self.group.inv_array().astype(np.int64)
        d = self.s + 1
        for face in self._faces(n, n - d):
            fv = list(face.vertices())
            total = np.full(len(rows), self.group.identity, dtype=np.int64)
            for u, v in enumerate(fv):
                term = a[:, v] if not (weight(u) & 1) else neg[a[:, v]]
                total = add[total, term]
            codes = encode_rows(b[:, fv], self.base.npoints)
            pos = np.clip(np.searchsorted(self._base_codes, codes), 0, len(self._base_codes) - 1)
            found = self._base_codes[pos] == codes
            want = np.where(found, self._values[pos], -1)
            ok &= found & (total == want)
        return ok

    def _oracle(self, c: tuple) -> bool:
        return bool(self._oracle_batch(np.array([c]))[0])
