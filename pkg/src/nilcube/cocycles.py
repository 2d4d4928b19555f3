"""Cocycles and coboundaries on finite cubespaces.

Values live either in a finite abelian group (``AbelianGroup``, integer
codes) or in ``(Q/Z)^d x K`` (``ValueGroup``, exact rationals).  For the
vectorized checks every value is encoded as an integer vector modulo a
tuple of moduli; torus coordinates are scaled by the common denominator of
the values involved, which is exact.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .cubes import sign
from .cubespace import CubeSpace, StructureGroupAction, encode_rows, structure_group
from .errors import (
    CapExceeded,
    CheckResult,
    CocycleAxiomError,
    DimensionMismatch,
    InvalidCodimension,
    InvariantFailure,
    NotAFactorCube,
    PreconditionError,
    SmallnessBudgetExceeded,
    StructureExtractionError,
    UnsupportedCarrier,
)
from .groups import AbelianGroup
from .linalg import Certificate, integer_row_basis, smith_normal_form, solve_linear_mod, torsion_exponent
from .values import DEFAULT_WINDOW, ValueGroup, ValuePoint, metric, squared_diameter

# above this many glued triples per coordinate the cocycle check samples
COCYCLE_WORK = 2 * 10**7
_CHUNK = 1 << 20


# -- value encoding -------------------------------------------------------


class _Codec:
    """Values <-> integer vectors modulo ``moduli``."""

    def __init__(self, group, values: Iterable = ()) -> None:
        self.group = group
        if isinstance(group, AbelianGroup):
            self.kind = "finite"
            self.moduli = tuple(group.moduli)
        elif isinstance(group, ValueGroup):
            fin = group.finite
            if fin.order > 1 and not isinstance(fin, AbelianGroup):
                raise UnsupportedCarrier("finite parts must be given as sums of cyclic groups")
            den = 1
            for v in values:
                for x in v.torus:
                    den = lcm(den, x.denominator)
            self.kind = "torus"
            self.den = den
            self.rank = group.torus_rank
            self.fin_moduli = tuple(fin.moduli) if fin.order > 1 else ()
            self.moduli = (den,) * group.torus_rank + self.fin_moduli
        else:
            raise UnsupportedCarrier(f"unsupported value carrier {group!r}")
        self.mod = np.array(self.moduli, dtype=np.int64)

    def rescale(self, den: int) -> None:
        self.den = den
        self.moduli = (den,) * self.rank + self.fin_moduli
        self.mod = np.array(self.moduli, dtype=np.int64)

    def encode(self, values: Sequence) -> np.ndarray:
        out = np.zeros((len(values), len(self.moduli)), dtype=np.int64)
        seen: dict = {}  # by identity: decoded tables share their value objects
        for i, v in enumerate(values):
            key = id(v)
            if key not in seen:
                seen[key] = self.encode_one(v)
            out[i] = seen[key]
        return out

    def decode(self, arr: np.ndarray) -> list:
        """``decode_one`` per row, decoding each distinct row once."""
        if not len(arr):
            return []
        uniq, inv = np.unique(arr, axis=0, return_inverse=True)
        points = [self.decode_one(u) for u in uniq]
        return [points[i] for i in inv.reshape(-1).tolist()]

    def encode_one(self, v) -> list[int]:
        if self.kind == "finite":
            return list(self.group.digits(int(v)))
        vec = []
        for x in v.torus:
            y = x * self.den
            if y.denominator != 1:
                raise ValueError(f"value {x} is not a multiple of 1/{self.den}")
            vec.append(int(y) % self.den)
        if self.fin_moduli:
            vec.extend(self.group.finite.digits(v.finite))
        return vec

    def decode_one(self, vec) -> object:
        vec = [int(x) for x in vec]
        if self.kind == "finite":
            return self.group.from_digits(vec)
        torus = [Fraction(x, self.den) for x in vec[: self.rank]]
        fin = self.group.finite.from_digits(vec[self.rank :]) if self.fin_moduli else None
        return self.group.point(torus, fin)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if not len(self.moduli):
            return arr
        return np.mod(arr, self.mod)


def _carrier_of(values: Iterable, group=None):
    if group is not None:
        return group
    for v in values:
        if isinstance(v, ValuePoint):
            return v.group
        break
    raise UnsupportedCarrier("a value carrier must be given for integer-coded values")


def _zero(group):
    return group.zero if isinstance(group, ValueGroup) else group.identity


def _add(group, a, b):
    return a + b if isinstance(group, ValueGroup) else group.mul(a, b)


def _neg(group, a):
    return -a if isinstance(group, ValueGroup) else group.inv(a)


def _is_zero(group, a) -> bool:
    return a.is_zero() if isinstance(group, ValueGroup) else a == group.identity


# -- cocycles -------------------------------------------------------------


class Cocycle:
    """A function on the ``order``-cubes of ``space`` (the cocycle axioms are
    checked separately by :func:`check_cocycle`)."""

    def __init__(self, space: CubeSpace, order: int, values: Mapping, group=None, validate: bool = True) -> None:
        if order < 0:
            raise InvalidCodimension("cocycle order must be >= 0")
        self.space = space
        self.order = order
        self.values = {tuple(int(x) for x in c): v for c, v in values.items()}
        self.group = _carrier_of(self.values.values(), group)
        if validate:
            want = space.count_cubes(order)
            if len(self.values) != want:
                raise DimensionMismatch(f"cocycle defined on {len(self.values)} of {want} cubes")
            if order > 0 and any(len(c) != 1 << order for c in self.values):
                raise DimensionMismatch("cocycle keys have the wrong dimension")

    @classmethod
    def _from_normalized(cls, space: CubeSpace, order: int, values: dict, group) -> "Cocycle":
        """Wrap ``values`` whose keys are already tuples of ints."""
        out = cls.__new__(cls)
        out.space, out.order, out.values, out.group = space, order, values, group
        return out

    def __call__(self, c: Sequence[int]):
        return self.values[tuple(int(x) for x in c)]

    def __len__(self) -> int:
        return len(self.values)

    def map_values(self, fn: Callable) -> "Cocycle":
        return Cocycle._from_normalized(self.space, self.order, {c: fn(v) for c, v in self.values.items()}, self.group)

    def _combine(self, other: "Cocycle", op: Callable) -> "Cocycle":
        if other.order != self.order or other.values.keys() != self.values.keys():
            raise DimensionMismatch("cocycles live on different cube sets")
        return Cocycle._from_normalized(self.space, self.order,
                                        {c: op(v, other.values[c]) for c, v in self.values.items()}, self.group)

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return self._combine(other, lambda a, b: _add(self.group, a, b))

    def __sub__(self, other: "Cocycle") -> "Cocycle":
        return self._combine(other, lambda a, b: _add(self.group, a, _neg(self.group, b)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cocycle) and self.order == other.order and self.values == other.values

    def is_zero(self) -> bool:
        return all(_is_zero(self.group, v) for v in self.values.values())

    def sorted_items(self) -> list[tuple[tuple, object]]:
        N = self.space.npoints
        keys = list(self.values)
        if not keys:
            return []
        codes = encode_rows(np.array(keys, dtype=np.int64).reshape(len(keys), -1), N)
        return [(keys[i], self.values[keys[i]]) for i in np.argsort(codes, kind="stable")]

    def arrays(self, codec: _Codec | None = None):
        """``(cubes, codes, value_vectors, codec)`` sorted by cube code."""
        items = self.sorted_items()
        cubes = np.array([c for c, _ in items], dtype=np.int64).reshape(len(items), -1)
        codes = encode_rows(cubes, self.space.npoints)
        codec = codec or _Codec(self.group, (v for _, v in items))
        vals = codec.encode([v for _, v in items])
        return cubes, codes, vals, codec

    def squared_diameter(self) -> Fraction:
        return _squared_diameter(self.group, list(self.values.values()))


def _squared_diameter(group, vals: list) -> Fraction:
    if isinstance(group, ValueGroup):
        uniq = list(set(vals))
        if group.torus_rank == 1 and all(v.finite == uniq[0].finite for v in uniq):
            return _circle_diameter2([v.torus[0] for v in uniq])
        return squared_diameter(uniq)
    return Fraction(0) if len(set(vals)) <= 1 else Fraction(1)


def _circle_diameter2(xs: list[Fraction]) -> Fraction:
    """Largest squared circular distance among points of ``R/Z``."""
    xs = sorted(set(xs))
    if len(xs) < 2:
        return Fraction(0)
    best = Fraction(0)
    for x in xs:
        # farthest point from x is the one nearest to x + 1/2
        target = (x + Fraction(1, 2)) % 1
        i = bisect.bisect_left(xs, target)
        for j in (i - 1, i, i + 1):
            y = xs[j % len(xs)]
            d = (x - y) % 1
            best = max(best, min(d, 1 - d) ** 2)
    return best


def _range_pairs(start: np.ndarray, count: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flattened ``(i, start[i] + r)`` for ``0 <= r < count[i]``."""
    i = np.repeat(np.arange(len(start)), count)
    offs = np.arange(int(count.sum())) - np.repeat(np.cumsum(count) - count, count)
    return i, np.repeat(start, count) + offs


def _lookup(codes: np.ndarray, query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if not len(codes):
        return np.zeros(len(query), dtype=np.int64), np.zeros(len(query), dtype=bool)
    pos = np.clip(np.searchsorted(codes, query), 0, len(codes) - 1)
    return pos, codes[pos] == query


def _halves(order: int, k: int) -> tuple[list[int], list[int]]:
    bit = 1 << (k - 1)
    lo = [w for w in range(1 << order) if not w & bit]
    return lo, [w | bit for w in lo]


def check_cocycle(rho: Cocycle, work_limit: int = COCYCLE_WORK, seed: int = 0) -> CheckResult:
    """Additivity, reflection and degeneracy along every coordinate.

    Glued triples are enumerated exhaustively unless there are more than
    ``work_limit`` for one coordinate, in which case a seeded sample of that
    size is drawn and the coverage records it.
    """
    ell = rho.order
    if ell == 0 or not len(rho):
        return CheckResult(True, detail="no axioms at order 0")
    cubes, codes, vals, codec = rho.arrays()
    return _check_arrays(cubes, codes, vals, codec.mod, rho.space.npoints, ell, work_limit, seed)


def _check_arrays(cubes: np.ndarray, codes: np.ndarray, vals: np.ndarray, mod: np.ndarray, N: int,
                  ell: int, work_limit: int = COCYCLE_WORK, seed: int = 0) -> CheckResult:
    """The cocycle axioms for value vectors ``vals`` (modulo ``mod``) on cubes sorted by code."""

    def reduce(arr):
        return np.mod(arr, mod) if len(mod) else arr

    zero = np.zeros(len(mod), dtype=vals.dtype)
    rng = np.random.default_rng(seed)
    coverage = "exhaustive"
    triples = 0

    def dec(row):
        return tuple(int(v) for v in row)

    for k in range(1, ell + 1):
        lo_v, hi_v = _halves(ell, k)
        lo = encode_rows(cubes[:, lo_v], N)
        hi = encode_rows(cubes[:, hi_v], N)
        # degenerate cubes
        deg = np.nonzero(lo == hi)[0]
        bad = deg[(vals[deg] != zero).any(axis=1)] if len(deg) else deg
        if len(bad):
            c = dec(cubes[bad[0]])
            return CheckResult(False, witness={"axiom": "degenerate", "coordinate": k, "cube": c},
                               detail="nonzero value on a degenerate cube")
        # reflections
        refl = np.empty_like(cubes)
        refl[:, lo_v] = cubes[:, hi_v]
        refl[:, hi_v] = cubes[:, lo_v]
        pos, found = _lookup(codes, encode_rows(refl, N))
        mismatch = found & (reduce(vals + vals[pos]) != zero).any(axis=1)
        if mismatch.any():
            i = int(np.nonzero(mismatch)[0][0])
            return CheckResult(False, witness={"axiom": "reflection", "coordinate": k, "cube": dec(cubes[i])},
                               detail="reflected cube does not carry the negated value")
        # additivity over glued pairs: hi of the first equals lo of the second
        order_lo = np.argsort(lo, kind="stable")
        lo_sorted = lo[order_lo]
        start = np.searchsorted(lo_sorted, hi, "left")
        count = np.searchsorted(lo_sorted, hi, "right") - start
        total = int(count.sum())
        if total > work_limit:
            coverage = "sampled"
            p = count / total
            first = rng.choice(len(cubes), size=work_limit, p=p)
            second = order_lo[start[first] + rng.integers(0, count[first])]
            pairs = [(first, second)]
        else:
            a, b = _range_pairs(start, count)
            second_all = order_lo[b]
            pairs = [(a[j : j + _CHUNK], second_all[j : j + _CHUNK]) for j in range(0, len(a), _CHUNK)]
        for first, second in pairs:
            triples += len(first)
            glued = np.empty((len(first), cubes.shape[1]), dtype=np.int64)
            glued[:, lo_v] = cubes[first][:, lo_v]
            glued[:, hi_v] = cubes[second][:, hi_v]
            pos, found = _lookup(codes, encode_rows(glued, N))
            lhs = vals[pos]
            rhs = reduce(vals[first] + vals[second])
            bad = found & (lhs != rhs).any(axis=1)
            if bad.any():
                j = int(np.nonzero(bad)[0][0])
                i1, i2 = int(first[j]), int(second[j])
                return CheckResult(
                    False,
                    witness={"axiom": "additivity", "coordinate": k, "first": dec(cubes[i1]),
                             "second": dec(cubes[i2]), "glued": dec(glued[j])},
                    detail="value on the glued cube is not the sum of the two parts",
                )
    if coverage == "sampled":
        coverage = f"sampled:{triples}"
    return CheckResult(True, coverage=coverage, counts={"triples": triples})


def require_cocycle(rho: Cocycle) -> None:
    res = check_cocycle(rho)
    if not res.passed:
        raise CocycleAxiomError(res.detail, witness=res.witness)


def _point_values(X: CubeSpace, f) -> list:
    if isinstance(f, Mapping):
        return [f[x] for x in range(X.npoints)]
    f = list(f)
    if len(f) != X.npoints:
        raise DimensionMismatch("point function needs one value per point")
    return f


def _coboundary_arrays(X: CubeSpace, f, ell: int, group=None):
    if ell < 0:
        raise InvalidCodimension("coboundary order must be >= 0")
    vals = _point_values(X, f)
    group = _carrier_of(vals, group)
    codec = _Codec(group, vals if isinstance(group, ValueGroup) else ())
    F = codec.encode(vals)
    cubes = X.cubes(ell).astype(np.int64).reshape(-1, 1 << ell)
    total = np.zeros((len(cubes), len(codec.moduli)), dtype=np.int64)
    for w in range(1 << ell):
        term = F[cubes[:, w]]
        total = total + term if sign(w) > 0 else total - term
    return cubes, codec.reduce(total), codec, group


def coboundary(X: CubeSpace, f, ell: int, group=None) -> Cocycle:
    """``d^ell f (c) = sum_w (-1)^|w| f(c(w))`` on every ``ell``-cube."""
    cubes, total, codec, group = _coboundary_arrays(X, f, ell, group)
    out = dict(zip(map(tuple, cubes.tolist()), codec.decode(total)))
    return Cocycle._from_normalized(X, ell, out, group)


def _coboundary_vanishes(X: CubeSpace, f, ell: int, group=None) -> bool:
    _, total, _, _ = _coboundary_arrays(X, f, ell, group)
    return not total.any()


def directional_derivative(rho: Cocycle, k: int) -> Cocycle:
    """``d_k rho([c1, c2]_k) = rho(c1) - rho(c2)`` on every ``(ell+1)``-cube."""
    ell = rho.order
    if not 1 <= k <= ell + 1:
        raise InvalidCodimension(f"direction {k} outside 1..{ell + 1}")
    X = rho.space
    cubes = X.cubes(ell + 1).astype(np.int64)
    lo_v, hi_v = _halves(ell + 1, k)
    out = {}
    g = rho.group
    for c in cubes:
        c1 = tuple(int(c[w]) for w in lo_v)
        c2 = tuple(int(c[w]) for w in hi_v)
        if ell == 0:
            c1, c2 = (c1[0],), (c2[0],)
        out[tuple(int(x) for x in c)] = _add(g, rho(c1), _neg(g, rho(c2)))
    return Cocycle(X, ell + 1, out, g, validate=False)


# -- discrepancy ------------------------------------------------------------


class Discrepancy:
    """Discrepancies of ``(s+1)``-configurations over cubes of the factor.

    Each point is written ``x = coord(x) . sigma(pi(x))`` with ``sigma`` the
    least point of its fiber.  For a factor cube ``y`` the configuration
    equal to ``sigma(y)`` off the top vertex completes to a unique cube with
    top ``t``; then ``Delta(c') = sum (-1)^|w| coord(c'(w)) - (-1)^(s+1) coord(t)``.
    """

    def __init__(self, X: CubeSpace, sg: StructureGroupAction) -> None:
        self.space = X
        self.sg = sg
        self.s = sg.degree
        self.group: AbelianGroup = sg.group  # type: ignore[assignment]
        fm = sg.factor
        self.factor = fm
        self.sigma = np.array([int(f.min()) for f in fm.fibers], dtype=np.int64)
        sig_of = self.sigma[fm.assignment]
        self.coord = sg.differences(sig_of, np.arange(X.npoints)).astype(np.int64)
        if (self.coord < 0).any():
            raise StructureExtractionError("structure group does not reach every fiber point")
        self.add = self.group.mul_table().astype(np.int64)
        self.neg = self.group.inv_array().astype(np.int64)
        self._top: dict[int, int] = {}

    def _alt_sum(self, coords: np.ndarray) -> np.ndarray:
        total = np.full(len(coords), self.group.identity, dtype=np.int64)
        for w in range(coords.shape[1]):
            term = coords[:, w] if sign(w) > 0 else self.neg[coords[:, w]]
            total = self.add[total, term]
        return total

    def reference_tops(self, factor_rows: np.ndarray) -> np.ndarray:
        """Coordinate of the completing top point per factor configuration;
        ``-1`` where the configuration is not a factor cube."""
        fm = self.factor
        L = factor_rows.shape[1]
        codes = encode_rows(factor_rows, fm.target.npoints)
        uniq, inv = np.unique(codes, return_inverse=True)
        need = [u for u in uniq.tolist() if u not in self._top]
        if need:
            first = {}
            for idx, cd in enumerate(codes.tolist()):
                if cd not in self._top and cd not in first:
                    first[cd] = idx
            rows = factor_rows[[first[cd] for cd in need]]
            m = self.group.order
            base = self.sigma[rows]  # (U, L)
            cand = np.repeat(base, m, axis=0)
            tops = self.sg.table[np.tile(np.arange(m), len(rows)), cand[:, L - 1]]
            cand[:, L - 1] = tops
            ok = self.space.is_cube_batch(cand).reshape(len(rows), m)
            hits = ok.sum(axis=1)
            if (hits > 1).any():
                raise StructureExtractionError("top completion over a factor cube is not unique")
            for cd, h, row in zip(need, hits, ok):
                self._top[cd] = int(np.argmax(row)) if h else -1
        return np.array([self._top[int(u)] for u in uniq], dtype=np.int64)[inv]

    def batch(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != 1 << (self.s + 1):
            raise DimensionMismatch(f"discrepancy needs {self.s + 1}-configurations")
        y = self.factor.assignment[rows]
        top = self.reference_tops(y)
        if (top < 0).any():
            i = int(np.nonzero(top < 0)[0][0])
            raise NotAFactorCube(f"projection of {tuple(int(v) for v in rows[i])} is not a factor cube")
        ref = top if (self.s + 1) % 2 == 0 else self.neg[top]
        return self.add[self._alt_sum(self.coord[rows]), self.neg[ref]]

    def __call__(self, c: Sequence[int]) -> int:
        return int(self.batch(np.array([c]))[0])

    def verify_reference_independence(self, c: Sequence[int]) -> int:
        """Recompute ``Delta(c)`` against every cube over ``pi(c)``; all must agree."""
        from .cubespace import extend_to_cubes

        c = tuple(int(v) for v in c)
        y = self.factor.assignment[np.array(c)]
        cands = [self.factor.fibers[int(v)] for v in y]
        refs = extend_to_cubes(self.space, self.s + 1, candidates=cands)
        if not len(refs):
            raise NotAFactorCube(f"no cube lies over the projection of {c}")
        alphas = self.sg.differences(np.array(refs), np.array(c)[None, :].repeat(len(refs), axis=0))
        values = set(self._alt_sum(alphas).tolist())
        if len(values) != 1:
            raise InvariantFailure(f"discrepancy of {c} depends on the reference cube")
        value = values.pop()
        if value != self(c):
            raise InvariantFailure(f"discrepancy of {c} disagrees with the section reference")
        return value


def discrepancy(X: CubeSpace, s: int, c: Sequence[int], sg: StructureGroupAction | None = None,
                verify: bool = True) -> int:
    """``Delta(c)`` as a structure-group element; with ``verify`` every
    reference cube over ``pi(c)`` is tried and must give the same value."""
    sg = sg if sg is not None else structure_group(X, s)
    if sg.degree != s:
        raise PreconditionError("structure group was extracted at a different degree")
    d = Discrepancy(X, sg)
    return d.verify_reference_independence(c) if verify else d(c)


def _check_bundle_map(sg: StructureGroupAction, chi: Sequence[int]) -> None:
    table = sg.table
    chi_arr = np.asarray(chi, dtype=np.int64)
    if not np.array_equal(chi_arr[table], table[:, chi_arr]):
        a, x = map(int, np.argwhere(chi_arr[table] != table[:, chi_arr])[0])
        raise PreconditionError("map does not commute with the structure group",)
    fm = sg.factor
    for fib in fm.fibers:
        if len(set(fm.assignment[chi_arr[fib]].tolist())) != 1:
            raise PreconditionError("map does not send fibers to fibers")


def rho_chi(X: CubeSpace, chi: Sequence[int], k: int, sg: StructureGroupAction | None = None) -> Cocycle:
    """``c -> Delta(corner(c; chi(c)))`` on ``C^(s+1-k)``, valued in the structure group."""
    from .translations import as_point_map, is_k_translation

    chi = as_point_map(X, chi)
    if sg is None:
        if X.claimed_degree is None:
            raise PreconditionError("space has no known degree")
        sg = structure_group(X, X.claimed_degree)
    s = sg.degree
    if not 0 <= k <= s + 1:
        raise InvalidCodimension(f"k must lie in 0..{s + 1}")
    _check_bundle_map(sg, chi)
    fm = sg.factor
    phi_bar = [int(fm(chi[int(fib[0])])) for fib in fm.fibers]
    if k > 0 and not is_k_translation(fm.target, phi_bar, k):
        raise PreconditionError(f"the induced factor map is not a {k}-translation")
    d = Discrepancy(X, sg)
    m = s + 1 - k
    low = X.cubes(m).astype(np.int64).reshape(-1, 1 << m)
    chi_arr = np.asarray(chi, dtype=np.int64)
    if k == 0:
        rows = chi_arr[low]
    else:
        rows = np.concatenate([np.tile(low, (1, (1 << k) - 1)), chi_arr[low]], axis=1)
    vals = d.batch(rows)
    return Cocycle(X, m, {tuple(int(v) for v in c): int(a) for c, a in zip(low, vals)}, sg.group, validate=False)


# -- averaging domains --------------------------------------------------------


def _dk(A: AbelianGroup, s: int, n: int):
    from .host_kra import dk_space

    return dk_space(A, s, max_dim=max(n, 1))


def t1_subgroup(A: AbelianGroup, s: int, ell: int) -> list[tuple]:
    """``T_1^ell``: configurations ``t`` on ``{0,1}^(ell-1)`` with ``[0, t]`` a cube of ``D_s(A)``."""
    if ell < 1:
        raise InvalidCodimension("T_1 needs ell >= 1")
    size = 1 << (ell - 1)
    allt = np.array(np.meshgrid(*[np.arange(A.order)] * size, indexing="ij")).reshape(size, -1).T[:, ::-1]
    rows = np.concatenate([np.full((len(allt), size), A.identity), allt], axis=1)
    ok = _dk(A, s, ell).is_cube_batch(rows)
    return sorted(tuple(int(v) for v in r) for r in allt[ok])


def t2_subgroup(A: AbelianGroup, s: int, ell: int) -> list[tuple]:
    """``T_2^ell``: configurations ``u`` on ``{0,1}^(ell-2)`` with ``[[0,0],[0,u]]`` a cube."""
    if ell < 2:
        raise InvalidCodimension("T_2 needs ell >= 2")
    size = 1 << (ell - 2)
    allu = np.array(np.meshgrid(*[np.arange(A.order)] * size, indexing="ij")).reshape(size, -1).T[:, ::-1]
    rows = np.concatenate([np.full((len(allu), 3 * size), A.identity), allu], axis=1)
    ok = _dk(A, s, ell).is_cube_batch(rows)
    return sorted(tuple(int(v) for v in r) for r in allu[ok])


def check_t_decomposition(A: AbelianGroup, s: int, ell: int) -> CheckResult:
    """``t = [v, v] + [0, u]`` gives a bijection ``T_1^ell -> T_1^(ell-1) x T_2^ell``."""
    T1 = set(t1_subgroup(A, s, ell))
    T1m = set(t1_subgroup(A, s, ell - 1))
    T2 = set(t2_subgroup(A, s, ell))
    half = 1 << (ell - 2)
    image = set()
    for t in sorted(T1):
        v, hi = t[:half], t[half:]
        u = tuple(A.mul(b, A.inv(a)) for a, b in zip(v, hi))
        if v not in T1m or u not in T2:
            return CheckResult(False, witness={"t": t, "v": v, "u": u}, detail="component outside its subgroup")
        image.add((v, u))
    for v in T1m:
        for u in T2:
            t = v + tuple(A.mul(a, b) for a, b in zip(v, u))
            if t not in T1:
                return CheckResult(False, witness={"v": v, "u": u}, detail="recombined element not in T_1")
    if len(image) != len(T1) or len(T1) != len(T1m) * len(T2):
        return CheckResult(False, detail="decomposition is not a bijection")
    return CheckResult(True, counts={"T1": len(T1), "T1_lower": len(T1m), "T2": len(T2)})


# -- averaging solver ---------------------------------------------------------


@dataclass
class CoboundaryWitness:
    """``f`` with ``d^ell f = rho`` (``residual`` is unused for full solutions)."""

    f: dict
    residual: Cocycle | None = None
    report: dict = field(default_factory=dict)


# integers stay in int64 while denominators are below this bound
_SMALL_DEN = 1 << 28


def _dtype_for(den: int):
    return np.int64 if den < _SMALL_DEN else object


@dataclass
class _Chain:
    """Values on the ``order``-cubes of a space as integer vectors: torus
    coordinates over the common denominator ``den``, finite digits as is."""

    space: CubeSpace
    order: int
    cubes: np.ndarray  # (M, 2^order), sorted by code
    tor: np.ndarray  # (M, rank) integers mod den
    fin: np.ndarray  # (M, q) digits
    den: int

    def __post_init__(self) -> None:
        self.codes = encode_rows(self.cubes, self.space.npoints)

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        q = encode_rows(rows, self.space.npoints)
        pos = np.minimum(np.searchsorted(self.codes, q), len(self.codes) - 1)
        if not (self.codes[pos] == q).all():
            i = int(np.nonzero(self.codes[pos] != q)[0][0])
            raise InvariantFailure(f"{tuple(int(v) for v in rows[i])} is not a cube although it lies over a fiber translate")
        return pos


def _rescale(tor: np.ndarray, den: int, new_den: int) -> np.ndarray:
    out = tor.astype(_dtype_for(new_den)) * (new_den // den)
    return out % new_den


def _normalize(den: int, *arrays: np.ndarray) -> tuple[int, list]:
    """Divide ``den`` and every array by their common gcd."""
    g = den
    for a in arrays:
        if a.size:
            g = gcd(g, int(np.gcd.reduce(a.astype(object).ravel())))
    if g <= 1:
        return den, list(arrays)
    new = den // g
    return new, [(a // g).astype(_dtype_for(new)) for a in arrays]


class _Averager:
    def __init__(self, window: Fraction, check_invariants: bool, rank: int, fin_mod: tuple) -> None:
        self.window = Fraction(window)
        self.check = check_invariants
        self.rank = rank
        self.fin_mod = np.array(fin_mod, dtype=np.int64)
        self._t1: dict = {}
        self.steps = 0

    def structure(self, X: CubeSpace, s: int) -> StructureGroupAction:
        return structure_group(X, s)

    def t1(self, A: AbelianGroup, s: int, ell: int) -> np.ndarray:
        key = (A.moduli, s, ell)
        if key not in self._t1:
            self._t1[key] = np.array(t1_subgroup(A, s, ell), dtype=np.int64).reshape(-1, 1 << (ell - 1))
        return self._t1[key]

    # -- helpers on integer chains --

    def _fin_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.mod(a + b, self.fin_mod) if self.fin_mod.size else a

    def _fin_sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.mod(a - b, self.fin_mod) if self.fin_mod.size else a

    def _average(self, tor: np.ndarray, fin: np.ndarray, den: int):
        """Uniform window averages along axis 1 of ``(M, T, rank)`` values."""
        nT = tor.shape[1]
        if fin.size and (fin != fin[:, :1, :]).any():
            raise SmallnessBudgetExceeded("averaging step met points with different finite components")
        anchor = tor[:, 0, :]
        d = (tor - anchor[:, None, :]) % den
        d = np.where(2 * d > den, d - den, d)
        p, q = self.window.numerator, self.window.denominator
        if self.rank == 1:
            spread = d.max(axis=1) - d.min(axis=1)
            if (spread.astype(object) * q > p * den).any():
                raise SmallnessBudgetExceeded("averaging step left the window")
        elif self.rank > 1:
            do = d.astype(object)
            diff = do[:, :, None, :] - do[:, None, :, :]
            if ((diff * diff).sum(axis=3) * q * q > p * p * den * den).any():
                raise SmallnessBudgetExceeded("averaging step left the window")
        self.steps += tor.shape[0]
        new_den = den * nT
        out = (anchor.astype(_dtype_for(new_den)) * nT + d.sum(axis=1)) % new_den
        return out, fin[:, 0, :], new_den

    def _coboundary_matches(self, X: CubeSpace, f_tor, f_fin, f_den, chain: _Chain) -> bool:
        den = lcm(f_den, chain.den)
        ft = _rescale(f_tor, f_den, den)
        total = np.zeros((len(chain.cubes), self.rank), dtype=ft.dtype)
        ftot = np.zeros((len(chain.cubes), len(self.fin_mod)), dtype=np.int64)
        for w in range(chain.cubes.shape[1]):
            pts = chain.cubes[:, w]
            if sign(w) > 0:
                total = total + ft[pts]
                ftot = ftot + f_fin[pts]
            else:
                total = total - ft[pts]
                ftot = ftot - f_fin[pts]
        ok = ((total - _rescale(chain.tor, chain.den, den)) % den == 0).all()
        return bool(ok and (self._fin_sub(ftot, chain.fin) == 0).all())

    def _invariant(self, chain: _Chain, table: np.ndarray, T1: np.ndarray, k: int) -> bool:
        lo_v, hi_v = _halves(chain.order, k)
        cubes = chain.cubes
        moved = np.repeat(cubes[:, None, :], len(T1), axis=1)
        moved[:, :, hi_v] = table[T1[None, :, :], cubes[:, None, hi_v]]
        idx = chain.lookup(moved.reshape(-1, cubes.shape[1])).reshape(len(cubes), len(T1))
        same = (chain.tor[idx] == chain.tor[:, None, :]).all(axis=(1, 2))
        if chain.fin.size:
            same &= (chain.fin[idx] == chain.fin[:, None, :]).all(axis=(1, 2))
        return bool(same.all())

    # -- the double recursion --

    def solve(self, X: CubeSpace, s: int, rho: _Chain):
        """``(tor, fin, den)`` for ``f`` with ``d^ell f = rho``."""
        ell = rho.order
        N = X.npoints
        if ell == 0:
            return rho.tor.copy(), rho.fin.copy(), rho.den
        if s == 0 or N == 1:
            if N != 1:
                raise InvariantFailure("degree-0 level has more than one point")
            if (rho.tor % rho.den).any() or (rho.fin.size and rho.fin.any()):
                raise InvariantFailure("cocycle on the one-point space is not zero")
            return (np.zeros((1, self.rank), dtype=np.int64), np.zeros((1, len(self.fin_mod)), dtype=np.int64), 1)
        sg = self.structure(X, s)
        fm = sg.factor
        table = sg.table.astype(np.int64)
        T1 = self.t1(sg.group, s, ell)
        L = 1 << ell
        lower = X.cubes(ell - 1).astype(np.int64).reshape(-1, L // 2)
        current = rho
        g_tor = np.zeros((N, self.rank), dtype=np.int64)
        g_fin = np.zeros((N, len(self.fin_mod)), dtype=np.int64)
        g_den = 1
        for k in range(1, ell + 1):
            lo_v, hi_v = _halves(ell, k)
            rows = np.empty((len(lower), len(T1), L), dtype=np.int64)
            rows[:, :, lo_v] = lower[:, None, :]
            rows[:, :, hi_v] = table[T1[None, :, :], lower[:, None, :]]
            idx = current.lookup(rows.reshape(-1, L)).reshape(len(lower), len(T1))
            k_tor, k_fin, k_den = self._average(current.tor[idx], current.fin[idx], current.den)
            cur_tor = _rescale(current.tor, current.den, k_den)
            rk = _Chain(X, ell - 1, lower, k_tor, k_fin, k_den)
            i1 = rk.lookup(current.cubes[:, lo_v])
            i2 = rk.lookup(current.cubes[:, hi_v])
            new_tor = (cur_tor - (k_tor[i1] - k_tor[i2])) % k_den
            new_fin = self._fin_sub(current.fin, self._fin_sub(k_fin[i1], k_fin[i2]))
            den, (new_tor, k_tor) = _normalize(k_den, new_tor, k_tor)
            rk = _Chain(X, ell - 1, lower, k_tor, k_fin, den)
            new = _Chain(X, ell, current.cubes, new_tor, new_fin, den)
            if self.check:
                if ell > 1:
                    mod = np.array((den,) * self.rank + tuple(self.fin_mod.tolist()), dtype=object)
                    vals = np.concatenate([rk.tor.astype(object), rk.fin.astype(object)], axis=1)
                    res = _check_arrays(rk.cubes, rk.codes, vals, mod, N, ell - 1)
                    if not res.passed:
                        raise InvariantFailure(f"averaged cocycle fails the axioms: {res.detail}")
                if not self._invariant(new, table, T1, k):
                    raise InvariantFailure("remainder is not invariant under the fiber translates")
            a_tor, a_fin, a_den = self.solve(X, s, rk)
            den2 = lcm(g_den, a_den)
            g_tor = (_rescale(g_tor, g_den, den2) + _rescale(a_tor, a_den, den2)) % den2
            g_fin = self._fin_add(g_fin, a_fin)
            g_den = den2
            current = new
        if self.check:
            # later directions must not undo invariance along earlier ones
            for k in range(1, ell + 1):
                if not self._invariant(current, table, T1, k):
                    raise InvariantFailure("remainder is not invariant under all fiber translates")
        # the remainder is constant on fibers of the cube projection
        target = fm.target
        y = fm.assignment[current.cubes]
        ycodes = encode_rows(y, target.npoints)
        uniq, first, inv = np.unique(ycodes, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        if (current.tor != current.tor[first][inv]).any() or (
            current.fin.size and (current.fin != current.fin[first][inv]).any()
        ):
            i = int(np.nonzero((current.tor != current.tor[first][inv]).any(axis=1))[0][0]) if (
                current.tor != current.tor[first][inv]).any() else 0
            raise InvariantFailure(f"remainder does not descend to the factor at {tuple(int(v) for v in y[i])}")
        if not np.array_equal(uniq, target.cube_codes(ell)):
            raise InvariantFailure("projected cubes do not match the factor's cubes")
        desc = _Chain(target, ell, y[first], current.tor[first], current.fin[first], current.den)
        h_tor, h_fin, h_den = self.solve(target, s - 1, desc)
        den = lcm(g_den, h_den)
        assign = fm.assignment
        f_tor = (_rescale(g_tor, g_den, den) + _rescale(h_tor, h_den, den)[assign]) % den
        f_fin = self._fin_add(g_fin, h_fin[assign])
        den, (f_tor,) = _normalize(den, f_tor)
        if self.check and not self._coboundary_matches(X, f_tor, f_fin, den, rho):
            raise InvariantFailure(f"recovered function misses the cocycle at level s={s}, order {ell}")
        return f_tor, f_fin, den


def solve_coboundary_averaging(
    X: CubeSpace,
    rho: Cocycle,
    *,
    window: Fraction = DEFAULT_WINDOW,
    check_invariants: bool = True,
) -> CoboundaryWitness:
    """``f`` with ``d^ell f = rho`` for a small cocycle valued in ``(Q/Z)^d x K``.

    Double recursion over the degree and the order: average along each
    direction over fiber translates, recurse on the averaged lower-order
    cocycles, and push the invariant remainder to the canonical factor.
    """
    if not isinstance(rho.group, ValueGroup):
        raise UnsupportedCarrier("the averaging solver works with (Q/Z)^d x K values")
    s = X.claimed_degree
    if s is None:
        raise PreconditionError("the averaging solver needs a space of known degree")
    require_cocycle(rho)
    d_in = rho.squared_diameter()
    if d_in > Fraction(window) ** 2:
        raise SmallnessBudgetExceeded(f"cocycle image has squared diameter {d_in} beyond the window")
    cubes, _, vals, codec = rho.arrays()
    rank = codec.rank
    chain = _Chain(X, rho.order, cubes, vals[:, :rank], vals[:, rank:], codec.den)
    av = _Averager(window, check_invariants, rank, codec.fin_moduli)
    f_tor, f_fin, den = av.solve(X, s, chain)
    codec.rescale(den)
    f = {x: codec.decode_one(list(f_tor[x]) + list(f_fin[x])) for x in range(X.npoints)}
    back = coboundary(X, f, rho.order, rho.group)
    if back.values != rho.values:
        raise InvariantFailure("recovered function does not reproduce the cocycle")
    d_out = _squared_diameter(rho.group, list(f.values()))
    ratio = None if d_in == 0 else float((d_out / d_in) ** 0.5) if d_out else 0.0
    report = {
        "order": rho.order,
        "degree": s,
        "averaging_steps": av.steps,
        "input_squared_diameter": str(d_in),
        "output_squared_diameter": str(d_out),
        "diameter_ratio": ratio,
    }
    return CoboundaryWitness(f, None, report)


# -- exact linear solver --------------------------------------------------------


@dataclass
class LinearSolution:
    """``function`` solves ``d^ell f = rho``; otherwise ``certificate`` lists
    an integer combination of cube equations with a contradictory value."""

    function: dict | None
    certificate: dict | None = None

    @property
    def solvable(self) -> bool:
        return self.function is not None


def _incidence_rows(X: CubeSpace, ell: int) -> list[list[int]]:
    """Echelon basis of the ``ell``-cube incidence lattice, cached on the space."""
    cache = X.__dict__.setdefault("_incidence_rows", {})
    if ell not in cache:
        cubes = X.cubes(ell).astype(np.int64).reshape(-1, 1 << ell)
        cache[ell] = integer_row_basis(_incidence(X, cubes))
    return cache[ell]


def _torsion_exponent(X: CubeSpace, ell: int) -> int:
    cache = X.__dict__.setdefault("_torsion_exponents", {})
    if ell not in cache:
        cache[ell] = torsion_exponent(_incidence_rows(X, ell))
    return cache[ell]


def _incidence(X: CubeSpace, cubes: np.ndarray) -> np.ndarray:
    M, L = cubes.shape
    A = np.zeros((M, X.npoints), dtype=np.int64)
    for w in range(L):
        np.add.at(A, (np.arange(M), cubes[:, w]), sign(w))
    return A


def solve_coboundary_linear(rho: Cocycle, use_compiled: bool | None = None) -> LinearSolution:
    """Solve ``d^ell f = rho`` exactly, one cyclic component at a time.

    Values in ``(Q/Z)^d`` are solved inside ``(1/D') Z / Z`` where ``D'`` is the
    common denominator of the values times the largest invariant factor of
    the cube incidence matrix, which loses no solutions.
    """
    X = rho.space
    cubes, codes, vals, codec = rho.arrays()
    if cubes.size == 0:
        zero = _zero(rho.group)
        return LinearSolution({x: zero for x in range(X.npoints)})
    cubes = cubes.reshape(len(cubes), -1)
    A = _incidence(X, cubes)
    if codec.kind == "torus" and codec.rank:
        # Q/Z is divisible: denominators up to D times the top invariant factor suffice
        e = _torsion_exponent(X, rho.order)
        if e > 1:
            vals[:, : codec.rank] *= e
            codec.rescale(codec.den * e)
    comps = []
    for i, m in enumerate(codec.moduli):
        res = solve_linear_mod(A, vals[:, i], int(m), use_compiled=use_compiled)
        if not res.solvable:
            cert: Certificate = res.certificate  # type: ignore[assignment]
            combo = {tuple(int(v) for v in cubes[e]): int(c) for e, c in cert.combination.items()}
            return LinearSolution(None, {
                "component": i,
                "modulus": int(m),
                "combination": combo,
                "value": int(cert.value),
                "verified": cert.verify(A, vals[:, i]),
            })
        comps.append(res.solution)
    f = {x: codec.decode_one([comp[x] for comp in comps]) for x in range(X.npoints)}
    back = coboundary(X, f, rho.order, rho.group)
    if back.values != rho.values:
        raise InvariantFailure("linear solution does not reproduce the cocycle")
    return LinearSolution(f)


def brute_force_coboundary(rho: Cocycle, limit: int = 10**6) -> dict | None:
    """Search all functions ``X -> A`` (finite ``A``) for a solution of ``d^ell f = rho``."""
    from itertools import product

    X = rho.space
    A = rho.group
    if not isinstance(A, AbelianGroup):
        raise UnsupportedCarrier("exhaustive search needs a finite carrier")
    if A.order ** X.npoints > limit:
        raise PreconditionError("too many functions for exhaustive search")
    cubes, codes, vals, codec = rho.arrays()
    cubes = cubes.reshape(len(cubes), -1)
    allf = np.array(list(product(range(A.order), repeat=X.npoints)), dtype=np.int64)
    digits = np.array([A.digits(g) for g in range(A.order)], dtype=np.int64).reshape(A.order, -1)
    mod = np.array(A.moduli, dtype=np.int64)
    for j in range(0, len(allf), 4096):
        F = digits[allf[j : j + 4096]]  # (B, N, r)
        total = np.zeros((len(F), len(cubes), len(mod)), dtype=np.int64)
        for w in range(cubes.shape[1]):
            term = F[:, cubes[:, w], :]
            total = total + term if sign(w) > 0 else total - term
        ok = (np.mod(total, mod) == vals[None, :, :]).all(axis=(1, 2)) if len(mod) else np.ones(len(F), bool)
        if ok.any():
            row = allf[j + int(np.argmax(ok))]
            return {x: int(row[x]) for x in range(X.npoints)}
    return None


def closed_torsion_functions(X: CubeSpace, ell: int, exponent: int, limit: int = 10**5) -> np.ndarray:
    """All ``h : X -> Z/exponent`` with ``d^ell h = 0`` and ``h(0) = 0``, one per row."""
    N = X.npoints
    rows = _incidence_rows(X, ell)
    if rows:
        diag, _, V = smith_normal_form(rows)
    else:
        diag, V = [], [[int(i == j) for j in range(N)] for i in range(N)]
    gens = []
    for i in range(N):
        d = diag[i] if i < len(diag) else 0
        step = exponent // gcd(abs(d), exponent)
        col = np.array([(V[r][i] * step) % exponent for r in range(N)], dtype=np.int64)
        col = (col - col[0]) % exponent
        if col.any():
            gens.append(col)
    seen = {bytes(np.zeros(N, dtype=np.int64))}
    out = [np.zeros(N, dtype=np.int64)]
    frontier = list(out)
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                y = (h + g) % exponent
                key = bytes(y)
                if key not in seen:
                    seen.add(key)
                    out.append(y)
                    nxt.append(y)
                    if len(out) > limit:
                        raise CapExceeded(f"more than {limit} closed functions")
        frontier = nxt
    return np.array(out, dtype=np.int64)


def _arc_lengths(vals: np.ndarray, modulus: int) -> np.ndarray:
    """Length of the shortest arc of ``Z/modulus`` covering each row."""
    srt = np.sort(vals % modulus, axis=1)
    gaps = np.diff(srt, axis=1)
    wrap = srt[:, :1] + modulus - srt[:, -1:]
    return modulus - np.maximum(gaps.max(axis=1, initial=0), wrap[:, 0])


def small_representative(rho: Cocycle, f: Mapping) -> dict:
    """The element of ``f + ker d^ell`` whose values span the shortest arcs.

    Closed functions are constants plus maps into ``(1/e)Z/Z`` with ``e`` the
    torsion exponent of the cube incidence matrix; the latter are enumerated.
    """
    group = rho.group
    if not isinstance(group, ValueGroup) or group.finite.order != 1:
        raise UnsupportedCarrier("normalization works with torus values only")
    X = rho.space
    if rho.order == 0 or X.npoints == 1:
        return dict(f)
    e = _torsion_exponent(X, rho.order)
    K = closed_torsion_functions(X, rho.order, e)
    coords = []
    for c in range(group.torus_rank):
        vals = [f[x].torus[c] for x in range(X.npoints)]
        den = lcm(e, *(v.denominator for v in vals))
        v = np.array([int(x * den) % den for x in vals], dtype=np.int64)
        cand = (v[None, :] - K * (den // e)) % den
        arcs = _arc_lengths(cand, den)
        best = cand[int(np.argmin(arcs))]
        coords.append([Fraction(int(b), den) for b in best])
    return {x: group.point([coords[c][x] for c in range(group.torus_rank)]) for x in range(X.npoints)}


# -- polynomial degree and uniqueness -------------------------------------------


def _values_group(vals: list, group=None):
    return _carrier_of(vals, group)


def _is_small(group, vals: list, ell: int, window: Fraction) -> bool:
    """Image diameter at most ``window / 2^(ell-1)``: every difference
    function in the chain then stays inside the window."""
    bound = (Fraction(window) / (1 << max(ell - 1, 0))) ** 2
    return _squared_diameter(group, vals) <= bound


@dataclass
class PolynomialDegree:
    degree: int | None
    small: bool
    chain_constant: bool | None = None
    direct_constant: bool = False
    chain: list = field(default_factory=list)


def _difference(G: AbelianGroup, group, gamma: tuple, t: int) -> tuple:
    return tuple(_add(group, gamma[x], _neg(group, gamma[G.mul(x, t)])) for x in range(G.order))


def _has_small_subgroup_escape(group, image: set, window: Fraction) -> bool:
    """A nontrivial finite subgroup generated by ``image`` has an element
    outside the window around zero."""
    zero = _zero(group)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in image:
                y = _add(group, x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    if len(seen) == 1:
        return True
    if isinstance(group, ValueGroup):
        return any(metric(zero, y) > Fraction(window) ** 2 for y in seen)
    return True


def _constancy_chain(G: AbelianGroup, group, gamma: tuple, ell: int, window: Fraction, log: list):
    """Run the inductive argument: the differences along every ``t`` are
    constant by induction, the constants form a homomorphism, and a small
    homomorphism is trivial.  Returns the constant value of ``gamma``."""
    if ell == 1:
        if len(set(gamma)) != 1:
            raise InvariantFailure("first derivative vanishes but the function is not constant")
        return gamma[0]
    alpha = {}
    for t in range(G.order):
        alpha[t] = _constancy_chain(G, group, _difference(G, group, gamma, t), ell - 1, window, log)
        # gamma_t is constant, so alpha(t) = gamma(0) - gamma(t)
    for t in range(G.order):
        for u in range(G.order):
            if alpha[G.mul(t, u)] != _add(group, alpha[t], alpha[u]):
                raise InvariantFailure("difference constants do not form a homomorphism")
    image = {v for v in alpha.values()}
    trivial = all(_is_zero(group, v) for v in image)
    if not trivial:
        if not _has_small_subgroup_escape(group, image, window):
            raise InvariantFailure("a nontrivial subgroup sits inside the window")
        raise InvariantFailure("difference homomorphism is nontrivial for a small function")
    log.append({"order": ell, "homomorphism_trivial": True})
    return gamma[0]


def polynomial_degree(gamma: Sequence, G: AbelianGroup, group=None, cap: int = 8,
                      window: Fraction = DEFAULT_WINDOW) -> PolynomialDegree:
    """Least ``ell`` with ``d^ell gamma = 0`` on ``D_1(G)`` (``None`` if above ``cap``).

    ``d^ell gamma`` vanishes exactly when every ``ell``-fold difference
    ``gamma(x) - gamma(x+t)`` iterate does.  When the image is small for
    that ``ell``, constancy is re-derived by the inductive chain.
    """
    gamma = tuple(gamma)
    if len(gamma) != G.order:
        raise DimensionMismatch("one value per group element is required")
    group = _values_group(list(gamma), group)
    direct = len(set(gamma)) == 1
    # differences along generators suffice: D_(t+u) = D_t + D_u - D_t D_u
    r = len(G.moduli)
    gens = [G.from_digits([int(i == j) for j in range(r)]) for i in range(r)]
    layer = {gamma}
    degree = None
    for ell in range(1, cap + 1):
        if all(len(set(fn)) == 1 for fn in layer):
            degree = ell
            break
        layer = {_difference(G, group, fn, t) for fn in layer for t in gens}
    result = PolynomialDegree(degree, False, None, direct)
    if degree is not None and _is_small(group, list(gamma), degree, window):
        result.small = True
        log: list = []
        _constancy_chain(G, group, gamma, degree, window, log)
        result.chain_constant = True
        result.chain = log
        if not direct:
            raise InvariantFailure("constancy chain and direct inspection disagree")
    return result


def check_uniqueness_theorem(X: CubeSpace, f, ell: int, window: Fraction = DEFAULT_WINDOW,
                             group=None) -> CheckResult:
    """A small ``f`` with ``d^ell f = 0`` is constant.

    Checked directly, and again by descending the factor tower: on each
    fiber ``f`` is a function on the structure group, made constant by the
    degree chain, so it factors through the next factor down.
    """
    vals = _point_values(X, f)
    group = _values_group(vals, group)
    if ell < 1:
        raise InvalidCodimension("uniqueness needs ell >= 1")
    if not _coboundary_vanishes(X, vals, ell, group):
        raise PreconditionError("d^ell f is not identically zero")
    if not _is_small(group, vals, ell, window):
        raise PreconditionError("image of f is not small enough for this order")
    direct = len(set(vals)) == 1
    s = X.claimed_degree
    if s is None:
        raise PreconditionError("the descent needs a space of known degree")
    space, cur, levels = X, list(vals), []
    while s > 0 and space.npoints > 1:
        sg = structure_group(space, s)
        fm = sg.factor
        A = sg.group
        for fib in fm.fibers:
            base = int(fib.min())
            gamma = tuple(cur[int(sg.table[a, base])] for a in range(A.order))
            pd = polynomial_degree(gamma, A, group, cap=ell, window=window)
            if pd.degree is None or pd.degree > ell:
                raise InvariantFailure("restriction to a fiber has too high a degree")
            if not pd.direct_constant:
                return CheckResult(False, witness={"fiber": [int(v) for v in fib]},
                                   detail="f is not constant on a fiber")
        nxt = [None] * fm.target.npoints
        for x in range(space.npoints):
            nxt[fm(x)] = cur[x]
        levels.append({"degree": s, "points": space.npoints, "fibers": len(fm.fibers)})
        space, cur, s = fm.target, nxt, s - 1
    descended = len(set(cur)) == 1
    if descended != direct:
        raise InvariantFailure("fiberwise descent and direct inspection disagree")
    return CheckResult(direct, detail="constant" if direct else "not constant", counts={"levels": len(levels)})
