"""Exact values in ``(Q/Z)^d x K`` with the squared torus metric and windowed averaging."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import UnsupportedCarrier, ValueGroupMismatch, WindowViolation
from .groups import AbelianGroup, FiniteGroup

DEFAULT_WINDOW = Fraction(1, 10)


def _frac01(x) -> Fraction:
    q = Fraction(x)
    return q - (q.numerator // q.denominator)


class ValueGroup:
    """``(Q/Z)^torus_rank x finite``; ``finite`` must be abelian."""

    def __init__(self, torus_rank: int = 1, finite: FiniteGroup | None = None) -> None:
        if torus_rank < 0:
            raise ValueError("torus rank must be non-negative")
        finite = finite if finite is not None else AbelianGroup(())
        if not finite.is_abelian:
            raise UnsupportedCarrier("the finite part of a value group must be abelian")
        self.torus_rank = torus_rank
        self.finite = finite

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ValueGroup)
            and other.torus_rank == self.torus_rank
            and other.finite.order == self.finite.order
            and getattr(other.finite, "moduli", None) == getattr(self.finite, "moduli", None)
        )

    def __hash__(self) -> int:
        return hash((self.torus_rank, self.finite.order))

    def __repr__(self) -> str:
        return f"ValueGroup(d={self.torus_rank}, K={self.finite.name})"

    def point(self, torus: Iterable = (), finite: int | None = None) -> "ValuePoint":
        t = tuple(_frac01(x) for x in torus)
        if len(t) != self.torus_rank:
            raise ValueGroupMismatch(f"expected {self.torus_rank} torus coordinates, got {len(t)}")
        k = self.finite.identity if finite is None else int(finite)
        if not 0 <= k < self.finite.order:
            raise ValueGroupMismatch(f"finite component {k} out of range")
        return ValuePoint(self, t, k)

    @property
    def zero(self) -> "ValuePoint":
        return ValuePoint(self, (Fraction(0),) * self.torus_rank, self.finite.identity)

    # group-protocol aliases so alternating sums work over values
    is_abelian = True

    def add(self, a: "ValuePoint", b: "ValuePoint") -> "ValuePoint":
        return a + b

    def neg(self, a: "ValuePoint") -> "ValuePoint":
        return -a


class ValuePoint:
    __slots__ = ("group", "torus", "finite")

    def __init__(self, group: ValueGroup, torus: tuple, finite: int) -> None:
        self.group = group
        self.torus = torus
        self.finite = finite

    def _check(self, other: "ValuePoint") -> None:
        if not isinstance(other, ValuePoint) or other.group != self.group:
            raise ValueGroupMismatch("values from different value groups")

    def __add__(self, other: "ValuePoint") -> "ValuePoint":
        self._check(other)
        t = tuple(_frac01(a + b) for a, b in zip(self.torus, other.torus))
        return ValuePoint(self.group, t, self.group.finite.mul(self.finite, other.finite))

    def __neg__(self) -> "ValuePoint":
        t = tuple(_frac01(-a) for a in self.torus)
        return ValuePoint(self.group, t, self.group.finite.inv(self.finite))

    def __sub__(self, other: "ValuePoint") -> "ValuePoint":
        return self + (-other)

    def scale(self, n: int) -> "ValuePoint":
        """``n`` times this point."""
        t = tuple(_frac01(a * n) for a in self.torus)
        return ValuePoint(self.group, t, self.group.finite.power(self.finite, n))

    def is_zero(self) -> bool:
        return self.finite == self.group.finite.identity and not any(self.torus)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ValuePoint)
            and (other.group is self.group or other.group == self.group)
            and other.torus == self.torus
            and other.finite == self.finite
        )

    def __hash__(self) -> int:
        return hash((self.torus, self.finite))

    def __repr__(self) -> str:
        return "ValuePoint(" + format_value(self) + ")"


def format_value(v: ValuePoint) -> str:
    """Text form ``p/q,p/q;k`` (the ``;k`` part only for a nontrivial finite group)."""
    parts = ",".join(str(x) if x.denominator != 1 else str(x.numerator) for x in v.torus)
    if v.group.finite.order > 1:
        parts += f";{v.finite}"
    return parts


def parse_value(text: str, group: ValueGroup) -> ValuePoint:
    text = text.strip()
    fin = None
    if ";" in text:
        text, k = text.split(";", 1)
        fin = int(k)
    torus = [Fraction(x) for x in text.split(",")] if text else []
    return group.point(torus, fin)


def _torus_gap(a: Fraction, b: Fraction) -> Fraction:
    d = _frac01(a - b)
    return min(d, 1 - d)


def metric(a: ValuePoint, b: ValuePoint) -> Fraction:
    """Squared surrogate of ``d_A``: ``[k != k'] + min_shift |t - t' - shift|^2``."""
    a._check(b)
    fin = Fraction(0) if a.finite == b.finite else Fraction(1)
    return fin + sum((_torus_gap(x, y) ** 2 for x, y in zip(a.torus, b.torus)), Fraction(0))


def lift_near(x: Fraction, anchor: Fraction) -> Fraction:
    """The real representative of ``x mod 1`` in ``(anchor - 1/2, anchor + 1/2]``."""
    d = _frac01(x - anchor)
    if d > Fraction(1, 2):
        d -= 1
    return anchor + d


def squared_diameter(points: Sequence[ValuePoint]) -> Fraction:
    best = Fraction(0)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = max(best, metric(points[i], points[j]))
    return best


def window_average(
    points: Sequence[ValuePoint],
    weights: Sequence | None = None,
    width: Fraction = DEFAULT_WINDOW,
) -> ValuePoint:
    """Average of points that fit in one window of diameter ``width``.

    Each torus coordinate is lifted to the real line next to the first point,
    the lifts are averaged exactly, and the result is reduced mod 1.
    """
    if not points:
        raise WindowViolation("cannot average an empty list")
    n = len(points)
    if weights is None:
        weights = [Fraction(1, n)] * n
    weights = [Fraction(w) for w in weights]
    if len(weights) != n or sum(weights) != 1:
        raise ValueError("weights must match the points and sum to 1")
    anchor = points[0]
    for p in points:
        anchor._check(p)
        if p.finite != anchor.finite:
            raise WindowViolation("points with different finite components cannot be averaged")
    lifted = [tuple(lift_near(x, a) for x, a in zip(p.torus, anchor.torus)) for p in points]
    limit = Fraction(width) ** 2
    for i in range(n):
        for j in range(i + 1, n):
            d2 = sum(((x - y) ** 2 for x, y in zip(lifted[i], lifted[j])), Fraction(0))
            if d2 > limit:
                raise WindowViolation(
                    f"points {i} and {j} are further apart than the window width {width}"
                )
    d = anchor.group.torus_rank
    mean = tuple(sum((w * lf[c] for w, lf in zip(weights, lifted)), Fraction(0)) for c in range(d))
    return anchor.group.point(mean, anchor.finite)


def embed_in_value_group(group: FiniteGroup):
    """Injective homomorphism ``+Z/m_i -> (Q/Z)^r``, ``e_i -> 1/m_i`` in coordinate ``i``.

    Returns ``(value_group, embed)`` where ``embed`` maps element codes to points.
    """
    if not isinstance(group, AbelianGroup):
        if group.is_abelian:
            raise UnsupportedCarrier("abelian groups must be given as sums of cyclic groups")
        raise UnsupportedCarrier("only abelian groups embed in a torus")
    vg = ValueGroup(len(group.moduli))
    cache: dict[int, ValuePoint] = {}

    def embed(g: int) -> ValuePoint:
        if g not in cache:
            cache[g] = vg.point(
                [Fraction(d, m) for d, m in zip(group.digits(g), group.moduli)]
            )
        return cache[g]

    return vg, embed


def unembed(group: AbelianGroup, v: ValuePoint) -> int:
    """Inverse of the embedding on its image; raises if ``v`` is not in the image."""
    digits = []
    for x, m in zip(v.torus, group.moduli):
        if (x * m).denominator != 1:
            raise ValueGroupMismatch(f"{x} is not a multiple of 1/{m}")
        digits.append(int(x * m))
    return group.from_digits(digits)
