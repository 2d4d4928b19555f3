"""Discrete-cube combinatorics and the configuration algebra.

A configuration ``c : {0,1}^n -> X`` is stored as a plain tuple of length
``2**n``.  Vertex ``w`` is the integer whose bit ``i - 1`` is the coordinate
``omega_i``, so the canonical vertex order is the integer order of these
codes.  Coordinates are numbered from 1 in every public function, as in
``[c1, c2]_k``.

Appending coordinates puts them in the high bits, which makes duplication a
tuple repetition and concatenation along the last coordinate a tuple join.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Any, Callable, Iterable, Sequence

from .errors import DimensionMismatch, InvalidCodimension, UnsupportedCarrier

Configuration = tuple

DEFAULT_MAX_DIM = 4


def dim_of(c: Sequence) -> int:
    """Dimension of a configuration; its length must be a power of two."""
    size = len(c)
    n = size.bit_length() - 1
    if size <= 0 or (1 << n) != size:
        raise DimensionMismatch(f"configuration of length {size} is not on a cube")
    return n


def weight(v: int) -> int:
    return bin(v).count("1")


def sign(v: int) -> int:
    return -1 if weight(v) & 1 else 1


def vertex_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))


def vertex_code(bits: Sequence[int]) -> int:
    code = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"vertex coordinate {b!r} is not binary")
        code |= b << i
    return code


@dataclass(frozen=True, order=True)
class Face:
    """A face of ``{0,1}^n``: the vertices with prescribed bits on ``fixed``.

    ``fixed`` holds ``(index, bit)`` pairs, 1-based and sorted by index.
    """

    n: int
    fixed: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        idx = [i for i, _ in self.fixed]
        if len(set(idx)) != len(idx):
            raise InvalidCodimension(f"repeated coordinate in face {self.fixed}")
        for i, b in self.fixed:
            if not 1 <= i <= self.n or b not in (0, 1):
                raise InvalidCodimension(f"bad fixed coordinate ({i}, {b}) for n={self.n}")
        object.__setattr__(self, "fixed", tuple(sorted(self.fixed)))

    @property
    def codim(self) -> int:
        return len(self.fixed)

    @property
    def dim(self) -> int:
        return self.n - len(self.fixed)

    @property
    def free(self) -> tuple[int, ...]:
        fixed = {i for i, _ in self.fixed}
        return tuple(i for i in range(1, self.n + 1) if i not in fixed)

    def vertices(self) -> tuple[int, ...]:
        return _face_vertices(self.n, self.fixed)

    def contains(self, v: int) -> bool:
        return all(((v >> (i - 1)) & 1) == b for i, b in self.fixed)

    @classmethod
    def whole(cls, n: int) -> "Face":
        return cls(n, ())

    @classmethod
    def vertex(cls, n: int, v: int) -> "Face":
        return cls(n, tuple((i + 1, (v >> i) & 1) for i in range(n)))

    @classmethod
    def upper(cls, n: int, v: int) -> "Face":
        """The face ``{w : w >= v}`` of codimension ``weight(v)``."""
        return cls(n, tuple((i + 1, 1) for i in range(n) if (v >> i) & 1))


@lru_cache(maxsize=None)
def _face_vertices(n: int, fixed: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    fixed_idx = {i for i, _ in fixed}
    free = [i for i in range(1, n + 1) if i not in fixed_idx]
    base = 0
    for i, b in fixed:
        base |= b << (i - 1)
    out = []
    for u in range(1 << len(free)):
        v = base
        for j, i in enumerate(free):
            if (u >> j) & 1:
                v |= 1 << (i - 1)
        out.append(v)
    return tuple(out)


@lru_cache(maxsize=None)
def _faces_cached(n: int, k: int) -> tuple[Face, ...]:
    out = []
    for idx in combinations(range(1, n + 1), k):
        for bits in product((0, 1), repeat=k):
            out.append(Face(n, tuple(zip(idx, bits))))
    return tuple(out)


def faces(n: int, k: int) -> list[Face]:
    """All faces of ``{0,1}^n`` of codimension ``k``, in a fixed order."""
    if n < 0 or k < 0 or k > n:
        raise InvalidCodimension(f"codimension {k} invalid for dimension {n}")
    result = list(_faces_cached(n, k))
    assert len(result) == comb(n, k) * 2**k
    return result


def faces_of_dim(n: int, d: int) -> list[Face]:
    return faces(n, n - d)


def restrict(c: Sequence, face: Face) -> Configuration:
    """The configuration on ``face``'s free coordinates, order preserved."""
    n = dim_of(c)
    if face.n != n:
        raise InvalidCodimension(f"face of {face.n}-cube used on a {n}-configuration")
    return tuple(c[v] for v in face.vertices())


def _check_coord(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise InvalidCodimension(f"coordinate {k} out of range 1..{n}")


def concat(c1: Sequence, c2: Sequence, k: int | None = None) -> Configuration:
    """``[c1, c2]_k``: ``c1`` where ``omega_k = 0`` and ``c2`` where it is 1."""
    n = dim_of(c1)
    if dim_of(c2) != n:
        raise DimensionMismatch("concat needs configurations of equal dimension")
    if k is None:
        k = n + 1
    _check_coord(k, n + 1)
    if k == n + 1:
        return tuple(c1) + tuple(c2)
    low = (1 << (k - 1)) - 1
    out = []
    for w in range(1 << (n + 1)):
        rest = (w & low) | ((w >> k) << (k - 1))
        out.append(c2[rest] if (w >> (k - 1)) & 1 else c1[rest])
    return tuple(out)


def split(c: Sequence, k: int) -> tuple[Configuration, Configuration]:
    """Inverse of :func:`concat`: the two ``k``-faces ``(omega_k=0, omega_k=1)``."""
    n = dim_of(c)
    _check_coord(k, n)
    return (restrict(c, Face(n, ((k, 0),))), restrict(c, Face(n, ((k, 1),))))


def constant(x: Any, n: int) -> Configuration:
    return (x,) * (1 << n)


def corner(x: Any, y: Any, n: int) -> Configuration:
    """``y`` at the top vertex and ``x`` elsewhere."""
    if n < 1:
        raise DimensionMismatch("a corner needs dimension at least 1")
    return (x,) * ((1 << n) - 1) + (y,)


def corner_config(c1: Sequence, c2: Sequence, k: int) -> Configuration:
    """Corner of configurations: ``c2`` on the face where the last ``k``
    coordinates are all 1, ``c1`` everywhere else."""
    m = dim_of(c1)
    if dim_of(c2) != m:
        raise DimensionMismatch("corner_config needs configurations of equal dimension")
    if k < 1:
        raise DimensionMismatch("a corner needs at least one extra coordinate")
    return tuple(c1) * ((1 << k) - 1) + tuple(c2)


def duplicate(c: Sequence, m: int) -> Configuration:
    """The ``(n+m)``-configuration ignoring the last ``m`` coordinates."""
    if m < 0:
        raise DimensionMismatch("cannot duplicate along a negative number of coordinates")
    dim_of(c)
    return tuple(c) * (1 << m)


def reflect(c: Sequence, k: int) -> Configuration:
    """Swap the two faces ``omega_k = 0`` and ``omega_k = 1``."""
    n = dim_of(c)
    _check_coord(k, n)
    bit = 1 << (k - 1)
    return tuple(c[w ^ bit] for w in range(1 << n))


def permute_coordinates(c: Sequence, perm: Sequence[int]) -> Configuration:
    """Relabel coordinates: new coordinate ``i`` reads old coordinate ``perm[i-1]``."""
    n = dim_of(c)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{n}")
    out = []
    for w in range(1 << n):
        old = 0
        for i, p in enumerate(perm):
            if (w >> i) & 1:
                old |= 1 << (p - 1)
        out.append(c[old])
    return tuple(out)


def apply_pointwise(maps: Sequence, c: Sequence) -> Configuration:
    """``omega -> maps[omega](c(omega))``; each map is a callable or a lookup table."""
    if len(maps) != len(c):
        raise DimensionMismatch("map configuration and configuration differ in size")
    return tuple(m(x) if callable(m) else m[x] for m, x in zip(maps, c))


def face_map(phi: Any, face: Face, identity: Any) -> Configuration:
    """``[phi]_F``: ``phi`` on the face, ``identity`` off it."""
    verts = set(face.vertices())
    return tuple(phi if v in verts else identity for v in range(1 << face.n))


def alternating_sum(c: Sequence, group: Any = None) -> Any:
    """``sum_omega (-1)^|omega| c(omega)``.

    ``group`` supplies ``add``/``neg``/``zero`` and must be abelian; without
    it the values' own ``+`` and ``-`` are used.
    """
    n = dim_of(c)
    if group is None:
        total = None
        for v in range(1 << n):
            term = c[v] if not (weight(v) & 1) else -c[v]
            total = term if total is None else total + term
        return total
    if not getattr(group, "is_abelian", False):
        raise UnsupportedCarrier("alternating sums need an abelian carrier")
    total = group.zero
    for v in range(1 << n):
        total = group.add(total, c[v]) if not (weight(v) & 1) else group.add(total, group.neg(c[v]))
    return total


@lru_cache(maxsize=None)
def faces_with_top(v: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Vertex lists of faces of dimension >= 1 whose largest vertex is ``v``.

    These are exactly the faces that become fully assigned when vertices are
    filled in increasing order and ``v`` is the latest.
    """
    ones = [i for i in range(n) if (v >> i) & 1]
    out = []
    for r in range(1, len(ones) + 1):
        for free in combinations(ones, r):
            fixed = tuple((i + 1, (v >> i) & 1) for i in range(n) if i not in free)
            out.append(_face_vertices(n, fixed))
    return tuple(out)


@lru_cache(maxsize=None)
def peel_order(n: int) -> tuple[int, ...]:
    """Vertices by increasing weight, ties in canonical order."""
    return tuple(sorted(range(1 << n), key=lambda v: (weight(v), v)))


def all_configurations(points: Iterable, n: int) -> Iterable[Configuration]:
    pts = list(points)
    return product(pts, repeat=1 << n)


def map_config(f: Callable | Sequence, c: Sequence) -> Configuration:
    if callable(f):
        return tuple(f(x) for x in c)
    return tuple(f[x] for x in c)
