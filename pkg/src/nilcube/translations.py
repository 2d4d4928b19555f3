"""k-translations: testing, enumeration, the translation filtration,
pushforward to factors, pointwise action of HK configurations, and lifting
translations from the top canonical factor.

A point map is a tuple ``phi`` with ``phi[x]`` the image of point ``x``.
Two tests decide membership in ``Aut_k``:

* ``"definition"``: ``phi`` preserves cubes, and applying it on any
  codimension-``k`` face of any ``n``-cube gives a cube, for
  ``n <= max_n``;
* ``"corner"`` (nilspaces of known degree ``s``): the corner configuration
  with ``c`` below and ``phi(c)`` on the top ``k``-face is an
  ``(s+1)``-cube for every ``c`` in ``C^(s+1-k)``.

Both reduce to the same primitive: a *test family* is a set of base
configurations and a vertex mask, and ``phi`` passes when replacing every
masked vertex value ``x`` by ``phi[x]`` yields cubes throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cubes import faces
from .cubespace import CubeSpace, FactorMap, StructureGroupAction
from .errors import (
    CapExceeded,
    CheckResult,
    DimensionMismatch,
    InvalidCodimension,
    InvariantFailure,
    NotABijection,
    NotATranslation,
    PreconditionError,
    StructureExtractionError,
)
from .groups import FiniteGroup, Filtration

# points beyond this need an explicit override to enumerate
SEARCH_CAP = 81
# spaces this small are cross-checked against all bijections
CROSS_CHECK_POINTS = 9
# bound on the number of vertex values materialized per evaluation step
_WORK = 1 << 22

PointMap = tuple


def as_point_map(X: CubeSpace, phi: Sequence[int]) -> PointMap:
    """Validate ``phi`` as a bijection of the points of ``X``."""
    phi = tuple(int(v) for v in phi)
    if len(phi) != X.npoints:
        raise NotABijection(f"map has {len(phi)} entries, space has {X.npoints} points")
    if sorted(phi) != list(range(X.npoints)):
        raise NotABijection("map is not a bijection of the points")
    return phi


def identity_map(npoints: int) -> PointMap:
    return tuple(range(npoints))


def compose(p: Sequence[int], q: Sequence[int]) -> PointMap:
    """``p`` after ``q``."""
    return tuple(p[x] for x in q)


def inverse(p: Sequence[int]) -> PointMap:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def commutator(p: Sequence[int], q: Sequence[int]) -> PointMap:
    """``p q p^-1 q^-1``, matching the group-element convention."""
    return compose(compose(p, q), compose(inverse(p), inverse(q)))


# -- test families --------------------------------------------------------


@dataclass
class _Family:
    base: np.ndarray  # (T, L) configurations
    mask: np.ndarray  # (L,) bool, vertices where phi is applied
    label: str

    @property
    def keys(self) -> np.ndarray:
        """Largest point that ``phi`` is applied to, per test."""
        return np.where(self.mask[None, :], self.base, -1).max(axis=1)


def _degree(X: CubeSpace) -> int | None:
    return X.claimed_degree


def _definition_families(X: CubeSpace, k: int, max_n: int) -> list[_Family]:
    fams = []
    for n in range(1, max_n + 1):
        cubes = X.cubes(n).astype(np.int64)
        size = 1 << n
        if len(cubes) == X.npoints**size:
            continue  # every configuration is a cube: nothing can fail here
        fams.append(_Family(cubes, np.ones(size, dtype=bool), f"aut n={n}"))
        if 1 <= k <= n:
            for face in faces(n, k):
                mask = np.zeros(size, dtype=bool)
                mask[list(face.vertices())] = True
                fams.append(_Family(cubes, mask, f"face n={n} {face.fixed}"))
    return fams


def _corner_families(X: CubeSpace, k: int, s: int) -> list[_Family]:
    if s + 1 > X.max_dim:
        raise DimensionMismatch(f"corner test needs cubes of dimension {s + 1}")
    if k == 0:
        cubes = X.cubes(s + 1).astype(np.int64)
        return [_Family(cubes, np.ones(1 << (s + 1), dtype=bool), "corner k=0")]
    m = s + 1 - k
    low = X.cubes(m).astype(np.int64).reshape(-1, 1 << m)
    base = np.tile(low, (1, 1 << k))
    mask = np.zeros(1 << (s + 1), dtype=bool)
    mask[-(1 << m):] = True
    return [_Family(base, mask, f"corner k={k}")]


def _families(X: CubeSpace, k: int, method: str, max_n: int | None) -> list[_Family]:
    s = _degree(X)
    if method == "corner":
        if s is None:
            raise PreconditionError("the corner test needs a space of known degree")
        return _corner_families(X, k, s)
    if max_n is None:
        max_n = X.max_dim if s is None else min(X.max_dim, max(k, s + 1))
    if k > max_n:
        raise DimensionMismatch(f"definition test at level {k} needs cubes of dimension {k}")
    fams = _definition_families(X, k, max_n)
    fams.sort(key=lambda f: f.base.shape[1])
    return fams


def _resolve_method(X: CubeSpace, k: int, method: str) -> str:
    if method not in ("auto", "definition", "corner", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method != "auto":
        return method
    s = _degree(X)
    return "corner" if s is not None and s + 1 <= X.max_dim else "definition"


def _apply(P: np.ndarray, base: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Rows ``(B*T, L)``: each map in ``P`` applied on the masked vertices of each base row."""
    if mask.all():
        return P[:, base].reshape(-1, base.shape[1])
    cols = np.nonzero(mask)[0]
    out = np.empty((len(P), base.shape[0], base.shape[1]), dtype=P.dtype)
    out[:] = base[None, :, :]
    out[:, :, cols] = P[:, base[:, cols]]
    return out.reshape(-1, base.shape[1])


def _family_filter(X: CubeSpace, P: np.ndarray, fam: _Family) -> np.ndarray:
    """Boolean mask of rows of ``P`` passing every test of ``fam``; small
    chunks of tests go first so most failures are found cheaply."""
    alive = np.ones(len(P), dtype=bool)
    T, L = fam.base.shape
    start, step = 0, 4
    while start < T and alive.any():
        stop = min(T, start + step)
        tests = fam.base[start:stop]
        idx = np.nonzero(alive)[0]
        per = max(1, _WORK // max(1, len(tests) * L))
        for j in range(0, len(idx), per):
            sub = idx[j : j + per]
            ok = X.is_cube_batch(_apply(P[sub], tests, fam.mask)).reshape(len(sub), -1).all(axis=1)
            alive[sub[~ok]] = False
        start, step = stop, step * 8
    return alive


def _filter(X: CubeSpace, P: np.ndarray, fams: Iterable[_Family]) -> np.ndarray:
    P = np.asarray(P, dtype=np.int64).reshape(-1, X.npoints)
    alive = np.ones(len(P), dtype=bool)
    for fam in fams:
        idx = np.nonzero(alive)[0]
        if not len(idx):
            break
        alive[idx[~_family_filter(X, P[idx], fam)]] = False
    return alive


def _identity_only(P: np.ndarray) -> np.ndarray:
    return (P == np.arange(P.shape[1])[None, :]).all(axis=1)


def _batch_by(X: CubeSpace, P: np.ndarray, k: int, method: str, max_n: int | None) -> np.ndarray:
    s = _degree(X)
    if method == "corner" and s is not None and k > s + 1:
        # Aut_k sits inside Aut_{s+1}, which is trivial on a degree-s nilspace
        return _identity_only(P)
    return _filter(X, P, _families(X, k, method, max_n))


def is_k_translation_batch(
    X: CubeSpace,
    maps,
    k: int,
    method: str = "auto",
    max_n: int | None = None,
) -> np.ndarray:
    """Vectorized :func:`is_k_translation` over the rows of ``maps``."""
    if k < 0:
        raise InvalidCodimension("translation level must be >= 0")
    P = np.asarray(maps, dtype=np.int64).reshape(-1, X.npoints)
    srt = np.sort(P, axis=1)
    if len(P) and not (srt == np.arange(X.npoints)[None, :]).all():
        raise NotABijection("every row must be a bijection of the points")
    method = _resolve_method(X, k, method)
    if method != "both":
        return _batch_by(X, P, k, method, max_n)
    a = _batch_by(X, P, k, "definition", max_n)
    b = _batch_by(X, P, k, "corner", None)
    if not np.array_equal(a, b):
        i = int(np.nonzero(a != b)[0][0])
        raise InvariantFailure(
            f"definition and corner tests disagree at level {k} on map {tuple(int(v) for v in P[i])}"
        )
    return a


def is_k_translation(X: CubeSpace, phi: Sequence[int], k: int, method: str = "auto",
                     max_n: int | None = None) -> bool:
    """Whether ``phi`` lies in ``Aut_k(X)``.

    ``method="auto"`` uses the corner test when the degree is known and the
    definition test otherwise; ``"both"`` runs the two and requires agreement.
    """
    phi = as_point_map(X, phi)
    return bool(is_k_translation_batch(X, np.array([phi]), k, method, max_n)[0])


# -- groups of translations ------------------------------------------------


@dataclass(frozen=True)
class TranslationGroup:
    space: CubeSpace
    level: int
    elements: frozenset
    complete: bool = True

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, phi) -> bool:
        return tuple(phi) in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    @property
    def identity(self) -> PointMap:
        return identity_map(self.space.npoints)

    def is_trivial(self) -> bool:
        return self.elements == frozenset([self.identity])

    def check_group(self) -> CheckResult:
        """Closure under composition and inverses."""
        if self.identity not in self.elements:
            return CheckResult(False, witness=("identity missing",))
        els = sorted(self.elements)
        for p in els:
            if inverse(p) not in self.elements:
                return CheckResult(False, witness=("inverse", p))
            for q in els:
                if compose(p, q) not in self.elements:
                    return CheckResult(False, witness=("product", p, q))
        return CheckResult(True, counts={"order": len(els)})

    def verify_members(self, method: str = "auto") -> CheckResult:
        ok = is_k_translation_batch(self.space, np.array(sorted(self.elements)), self.level, method)
        if ok.all():
            return CheckResult(True, counts={"order": len(ok)})
        bad = sorted(self.elements)[int(np.argmin(ok))]
        return CheckResult(False, witness=bad, detail=f"element fails the level-{self.level} test")


def generated_group(npoints: int, gens: Iterable[Sequence[int]]) -> frozenset:
    gens = [tuple(g) for g in gens]
    ident = identity_map(npoints)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(g, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def _candidate_arrays(X: CubeSpace, candidates) -> list[np.ndarray]:
    N = X.npoints
    if candidates is None:
        return [np.arange(N, dtype=np.int64)] * N
    if len(candidates) != N:
        raise ValueError("one candidate set per point is required")
    return [np.asarray(sorted({int(v) for v in c}), dtype=np.int64) for c in candidates]


def _all_bijections(cands: list[np.ndarray]) -> np.ndarray:
    N = len(cands)
    if all(len(c) == N for c in cands):
        return np.array(list(permutations(range(N))), dtype=np.int64).reshape(-1, N)
    allowed = [c.tolist() for c in cands]
    rows: list[tuple] = []
    used = [False] * N
    cur: list[int] = []

    def extend(x: int) -> None:
        if x == N:
            rows.append(tuple(cur))
            return
        for y in allowed[x]:
            if not used[y]:
                used[y] = True
                cur.append(y)
                extend(x + 1)
                cur.pop()
                used[y] = False

    extend(0)
    return np.array(rows, dtype=np.int64).reshape(-1, N)


def enumerate_by_bijections(X: CubeSpace, k: int, method: str = "auto", candidates=None) -> frozenset:
    """All ``k``-translations found by testing every admissible bijection."""
    P = _all_bijections(_candidate_arrays(X, candidates))
    ok = is_k_translation_batch(X, P, k, method)
    return frozenset(tuple(int(v) for v in r) for r in P[ok])


def enumerate_translations(
    X: CubeSpace,
    k: int,
    *,
    method: str = "auto",
    candidates: Sequence[Iterable[int]] | None = None,
    node_limit: int | None = None,
    max_points: int = SEARCH_CAP,
    cross_check: bool | None = None,
    chunk: int = 4096,
) -> TranslationGroup:
    """All of ``Aut_k(X)`` (optionally restricted to ``phi[x] in candidates[x]``).

    Depth-first search over partial maps assigned in point order, carried
    in chunks of rows; each test is run as soon as every point it moves
    has an image.  Exceeding ``node_limit`` raises :class:`CapExceeded`
    carrying the group generated by the complete maps found so far.
    """
    if k < 0:
        raise InvalidCodimension("translation level must be >= 0")
    N = X.npoints
    if N > max_points:
        raise CapExceeded(f"{N} points exceeds the search cap {max_points}",
                          partial=TranslationGroup(X, k, frozenset([identity_map(N)]), complete=False))
    method = _resolve_method(X, k, method)
    cands = _candidate_arrays(X, candidates)
    test_method = "corner" if method == "both" else method
    s = _degree(X)
    if test_method == "corner" and s is not None and k > s + 1:
        found = frozenset([identity_map(N)]) if all(x in cands[x] for x in range(N)) else frozenset()
        return TranslationGroup(X, k, found)
    fams = _families(X, k, test_method, None)
    keyed: list[list[tuple[np.ndarray, np.ndarray]]] = [[] for _ in range(N)]
    for fam in fams:
        keys = fam.keys
        for p in np.unique(keys):
            if p >= 0:
                keyed[int(p)].append((fam.base[keys == p], fam.mask))
    found_rows: list[np.ndarray] = []
    nodes = 0
    stack: list[tuple[int, np.ndarray]] = [(0, np.zeros((1, 0), dtype=np.int64))]
    while stack:
        p, rows = stack.pop()
        if p == N:
            found_rows.append(rows)
            continue
        c = cands[p]
        new = np.column_stack([np.repeat(rows, len(c), axis=0), np.tile(c, len(rows))])
        if p:
            new = new[(new[:, :p] != new[:, p : p + 1]).all(axis=1)]
        nodes += len(new)
        if node_limit is not None and nodes > node_limit:
            done = [tuple(int(v) for v in r) for blk in found_rows for r in blk]
            raise CapExceeded(
                f"search visited more than {node_limit} partial maps",
                partial=TranslationGroup(X, k, generated_group(N, done), complete=False),
            )
        for base, mask in keyed[p]:
            if not len(new):
                break
            new = new[_family_filter(X, new, _Family(base, mask, ""))]
        for i in reversed(range(0, len(new), chunk)):
            stack.append((p + 1, new[i : i + chunk]))
    elements = frozenset(tuple(int(v) for v in r) for blk in found_rows for r in blk)
    if method == "both":
        other = np.array(sorted(elements), dtype=np.int64).reshape(-1, N)
        if not is_k_translation_batch(X, other, k, "definition").all():
            raise InvariantFailure("corner-enumerated maps fail the definition test")
    if cross_check is None:
        cross_check = N <= CROSS_CHECK_POINTS
    if cross_check:
        brute = enumerate_by_bijections(X, k, test_method, candidates)
        if brute != elements:
            diff = sorted(brute ^ elements)[0]
            raise InvariantFailure(f"search and bijection enumeration disagree on {diff}")
    return TranslationGroup(X, k, elements)


def translation_groups(X: CubeSpace, levels: Iterable[int], **kw) -> dict[int, TranslationGroup]:
    return {k: enumerate_translations(X, k, **kw) for k in levels}


def check_filtration_property(groups: Mapping[int, TranslationGroup] | Sequence[TranslationGroup]) -> CheckResult:
    """``Aut_(k+1) <= Aut_k`` and ``[Aut_i, Aut_j] <= Aut_(i+j)`` elementwise.

    Commutators landing beyond the highest supplied level are checked
    only when that level is trivial (then they must be the identity).
    """
    if not isinstance(groups, Mapping):
        groups = {g.level: g for g in groups}
    if not groups:
        return CheckResult(True)
    levels = sorted(groups)
    if levels != list(range(levels[0], levels[-1] + 1)):
        return CheckResult(False, witness=("levels not consecutive", levels))
    top = levels[-1]
    top_trivial = groups[top].is_trivial()
    for a, b in zip(levels, levels[1:]):
        extra = groups[b].elements - groups[a].elements
        if extra:
            return CheckResult(False, witness={"level": b, "element": min(extra)},
                               detail=f"Aut_{b} is not contained in Aut_{a}")
    checked, skipped = 0, 0
    for i in levels:
        for j in levels:
            if j < i:
                continue
            target = i + j
            if target > top and not top_trivial:
                skipped += 1
                continue
            allowed = groups[min(target, top)].elements if target <= top else groups[top].elements
            for p in sorted(groups[i].elements):
                for q in sorted(groups[j].elements):
                    c = commutator(p, q)
                    checked += 1
                    if c not in allowed:
                        return CheckResult(
                            False,
                            witness={"i": i, "j": j, "phi": p, "psi": q, "commutator": c},
                            detail=f"commutator of levels {i} and {j} is not in Aut_{target}",
                        )
    coverage = "exhaustive" if not skipped else f"partial:{skipped} level pairs beyond the top"
    return CheckResult(True, coverage=coverage, counts={"commutators": checked})


# -- factors ----------------------------------------------------------------


def pushforward(X: CubeSpace, phi: Sequence[int], factor: FactorMap, k: int | None = None) -> PointMap:
    """The induced map on ``factor.target``; every fiber representative is
    checked to give the same image.  With ``k`` given the result must be a
    ``k``-translation of the target."""
    phi = as_point_map(X, phi)
    img = factor.assignment[np.asarray(phi, dtype=np.int64)]
    out = []
    for y, fib in enumerate(factor.fibers):
        vals = np.unique(img[fib])
        if len(vals) != 1:
            x1 = int(fib[0])
            x2 = int(fib[np.nonzero(img[fib] != img[fib[0]])[0][0]])
            raise StructureExtractionError(
                "map does not respect the fibers of the factor", witness={"fiber": y, "points": (x1, x2)}
            )
        out.append(int(vals[0]))
    result = as_point_map(factor.target, out)
    if k is not None and not is_k_translation(factor.target, result, k):
        raise InvariantFailure(f"pushforward is not a {k}-translation of the factor")
    return result


class PermutationGroup(FiniteGroup):
    """A finite group of point maps; elements are indexed in sorted order,
    so the identity map is element 0.  ``mul(a, b)`` is ``a`` after ``b``."""

    def __init__(self, maps: Iterable[Sequence[int]], name: str = "Aut") -> None:
        maps = sorted({tuple(int(v) for v in m) for m in maps})
        if not maps:
            raise ValueError("a permutation group needs at least the identity")
        self.maps = maps
        self.index = {m: i for i, m in enumerate(maps)}
        self.order = len(maps)
        self.name = name
        ident = identity_map(len(maps[0]))
        if ident not in self.index:
            raise ValueError("identity map missing")
        self.identity = self.index[ident]
        arr = np.array(maps, dtype=np.int64)
        table = np.empty((self.order, self.order), dtype=np.int32)
        for a in range(self.order):
            prods = arr[a][arr]  # row b is maps[a] after maps[b]
            for b, row in enumerate(prods):
                key = tuple(int(v) for v in row)
                if key not in self.index:
                    raise ValueError("maps are not closed under composition")
                table[a, b] = self.index[key]
        self._t = table
        self._inv = [int(np.nonzero(table[a] == self.identity)[0][0]) for a in range(self.order)]

    def mul(self, a: int, b: int) -> int:
        return int(self._t[a, b])

    def inv(self, a: int) -> int:
        return self._inv[a]

    def label(self, g: int) -> str:
        return str(self.maps[g])

    @property
    def _table(self) -> np.ndarray:  # type: ignore[override]
        return self._t


def translation_filtration(groups: Mapping[int, TranslationGroup]) -> Filtration:
    """The filtration ``(Aut_k)_k`` on the lowest supplied group.

    The highest supplied level must be trivial so that the chain terminates.
    When level 0 is absent, ``G_0`` is taken to be ``G_1``.
    """
    levels = sorted(groups)
    if not levels or levels[0] > 1:
        raise PreconditionError("need translation groups starting at level 0 or 1")
    if levels != list(range(levels[0], levels[-1] + 1)):
        raise PreconditionError("translation levels must be consecutive")
    if not groups[levels[-1]].is_trivial():
        raise PreconditionError("the highest supplied level must be the trivial group")
    bottom = groups[levels[0]]
    pg = PermutationGroup(bottom.elements)
    chain = []
    if levels[0] == 1:
        chain.append(frozenset(range(pg.order)))
    for k in levels:
        chain.append(frozenset(pg.index[m] for m in groups[k].elements))
    return Filtration(pg, chain, proper=False)


def hk_act(groups: Mapping[int, TranslationGroup], Phi: Sequence[Sequence[int]], c: Sequence[int]) -> tuple:
    """Apply the configuration of translations ``Phi`` to the cube ``c``
    pointwise; ``Phi`` must lie in ``HK^n`` of the translation filtration."""
    from .host_kra import hk_membership

    filt = translation_filtration(groups)
    pg: PermutationGroup = filt.group  # type: ignore[assignment]
    X = next(iter(groups.values())).space
    if len(Phi) != len(c):
        raise DimensionMismatch("map configuration and cube differ in size")
    try:
        codes = [pg.index[tuple(int(v) for v in m)] for m in Phi]
    except KeyError as exc:
        raise NotATranslation("configuration uses a map outside the translation groups") from exc
    if not hk_membership(filt, codes):
        raise NotATranslation("map configuration is not in the Host-Kra group of the translation filtration")
    if not X.is_cube(c):
        raise PreconditionError("input configuration is not a cube")
    out = tuple(int(Phi[w][c[w]]) for w in range(len(c)))
    if not X.is_cube(out):
        raise InvariantFailure(f"pointwise translation of a cube is not a cube: {out}")
    return out


# -- lifting ----------------------------------------------------------------


@dataclass
class LiftResult:
    """Outcome of :func:`lift_translation`.

    ``lift`` is set on success; otherwise ``obstruction`` holds the
    inconsistent equation from the linear solver.
    """

    factor_map: PointMap
    level: int
    bundle_map: PointMap
    cocycle: dict
    lift: PointMap | None = None
    correction: dict | None = None
    obstruction: object = None
    transcript: dict = field(default_factory=dict)

    @property
    def lifted(self) -> bool:
        return self.lift is not None


def section_bundle_map(sg: StructureGroupAction, phi_bar: Sequence[int]) -> PointMap:
    """``a . sigma(y)  ->  a . sigma(phi_bar(y))`` with ``sigma`` the least point of each fiber."""
    fm = sg.factor
    sigma = [int(f.min()) for f in fm.fibers]
    X = fm.source
    out = []
    for x in range(X.npoints):
        y = fm(x)
        a = sg.difference(sigma[y], x)
        out.append(sg.act(a, sigma[phi_bar[y]]))
    return as_point_map(X, out)


def lift_translation(
    X: CubeSpace,
    phi_bar: Sequence[int],
    k: int,
    sg: StructureGroupAction | None = None,
) -> LiftResult:
    """Lift a ``k``-translation of the top canonical factor to ``X``, or
    report why no lift of the form ``f . psi`` exists.

    ``psi`` is the bundle map built from the least-point section; the
    correction ``f`` solves ``(-1)^k d^(s+1-k) f = -rho_psi`` exactly.
    """
    from .cocycles import check_cocycle, rho_chi, solve_coboundary_linear

    if sg is None:
        s = _degree(X)
        if s is None:
            raise PreconditionError("lifting needs a space of known degree")
        from .cubespace import structure_group

        sg = structure_group(X, s)
    s = sg.degree
    if not 1 <= k <= s:
        raise InvalidCodimension(f"lifting is defined for 1 <= k <= s = {s}")
    fm = sg.factor
    phi_bar = as_point_map(fm.target, phi_bar)
    if not is_k_translation(fm.target, phi_bar, k):
        raise PreconditionError(f"factor map is not a {k}-translation of the factor")
    psi = section_bundle_map(sg, phi_bar)
    rho = rho_chi(X, psi, k, sg)
    res = check_cocycle(rho)
    if not res.passed:
        raise InvariantFailure(f"discrepancy cocycle of the bundle map fails: {res.detail}")
    grp = sg.group
    sgn = 1 if (k % 2) else -1  # (-1)^(k+1)
    target = rho.map_values(lambda a: a if sgn == 1 else grp.inv(a))
    sol = solve_coboundary_linear(target)
    result = LiftResult(phi_bar, k, psi, dict(rho.values))
    if not sol.solvable:
        result.obstruction = sol.certificate
        result.transcript["verdict"] = "obstructed"
        return result
    f = sol.function
    lift = as_point_map(X, [sg.act(f[x], psi[x]) for x in range(X.npoints)])
    if not is_k_translation(X, lift, k):
        raise InvariantFailure("corrected map is not a translation")
    pushed = pushforward(X, lift, fm)
    if pushed != phi_bar:
        raise InvariantFailure("corrected map does not cover the factor map")
    result.lift = lift
    result.correction = {x: f[x] for x in range(X.npoints)}
    result.transcript.update(verdict="lifted", is_k_translation=True, pushforward_matches=True)
    return result
