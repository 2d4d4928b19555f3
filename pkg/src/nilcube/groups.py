"""Finite groups with integer element codes, and filtrations on them.

Elements are the integers ``0 .. order-1``.  Abelian products and the
Heisenberg group use closed-form rules; arbitrary groups come from a
multiplication table (order at most 256, axioms checked on construction).
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CheckResult, GroupAxiomError

TABLE_GROUP_CAP = 256
# structured groups are tabulated on demand for the compiled kernels
KERNEL_TABLE_CAP = 4096


class FiniteGroup:
    """Common interface; subclasses define ``mul``, ``inv``, ``order``."""

    order: int
    identity: int = 0
    name: str = "G"

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError

    def elements(self) -> range:
        return range(self.order)

    def label(self, g: int) -> str:
        return str(g)

    def commutator(self, a: int, b: int) -> int:
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def power(self, g: int, e: int) -> int:
        if e < 0:
            g, e = self.inv(g), -e
        out = self.identity
        while e:
            if e & 1:
                out = self.mul(out, g)
            g = self.mul(g, g)
            e >>= 1
        return out

    def element_order(self, g: int) -> int:
        k, h = 1, g
        while h != self.identity:
            h = self.mul(h, g)
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return all(
            self.mul(a, b) == self.mul(b, a)
            for a in self.elements()
            for b in self.elements()
            if a < b
        )

    # additive aliases, meaningful for abelian groups
    @property
    def zero(self) -> int:
        return self.identity

    def add(self, a: int, b: int) -> int:
        return self.mul(a, b)

    def neg(self, a: int) -> int:
        return self.inv(a)

    def sub(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def generated(self, gens: Iterable[int]) -> frozenset[int]:
        gens = list(gens)
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    def is_subgroup(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        if self.identity not in s:
            return False
        return all(self.mul(a, self.inv(b)) in s for a in s for b in s)

    def generating_set(self, subgroup: Iterable[int] | None = None) -> tuple[int, ...]:
        """A small generating set, chosen greedily in increasing code order."""
        target = set(self.elements()) if subgroup is None else set(subgroup)
        gens: list[int] = []
        span = {self.identity}
        for g in sorted(target):
            if g not in span:
                gens.append(g)
                span = set(self.generated(gens))
                if len(span) == len(target):
                    break
        return tuple(gens)

    @cached_property
    def _table(self) -> np.ndarray:
        if self.order > KERNEL_TABLE_CAP:
            raise GroupAxiomError(f"group of order {self.order} too large to tabulate")
        t = np.empty((self.order, self.order), dtype=np.int32)
        for a in self.elements():
            for b in self.elements():
                t[a, b] = self.mul(a, b)
        return t

    def mul_table(self) -> np.ndarray:
        return self._table

    @cached_property
    def _inv_array(self) -> np.ndarray:
        return np.array([self.inv(a) for a in self.elements()], dtype=np.int32)

    def inv_array(self) -> np.ndarray:
        return self._inv_array

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} order={self.order}>"


class AbelianGroup(FiniteGroup):
    """``Z/m_1 + ... + Z/m_r`` with mixed-radix codes (first factor most significant)."""

    def __init__(self, moduli: Sequence[int] = ()) -> None:
        moduli = tuple(int(m) for m in moduli)
        if any(m < 1 for m in moduli):
            raise GroupAxiomError(f"moduli must be positive, got {moduli}")
        self.moduli = moduli
        self.order = int(np.prod(moduli, dtype=np.int64)) if moduli else 1
        self.identity = 0
        strides = []
        acc = 1
        for m in reversed(moduli):
            strides.append(acc)
            acc *= m
        self.strides = tuple(reversed(strides))
        self.name = "+".join(f"Z{m}" for m in moduli) or "0"

    @property
    def is_abelian(self) -> bool:  # type: ignore[override]
        return True

    def digits(self, g: int) -> tuple[int, ...]:
        return tuple((g // s) % m for s, m in zip(self.strides, self.moduli))

    def from_digits(self, digits: Sequence[int]) -> int:
        if len(digits) != len(self.moduli):
            raise GroupAxiomError("digit vector has the wrong length")
        return sum((int(d) % m) * s for d, m, s in zip(digits, self.moduli, self.strides))

    def mul(self, a: int, b: int) -> int:
        return self.from_digits([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def inv(self, a: int) -> int:
        return self.from_digits([-x for x in self.digits(a)])

    def label(self, g: int) -> str:
        return "(" + ",".join(map(str, self.digits(g))) + ")"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AbelianGroup) and other.moduli == self.moduli

    def __hash__(self) -> int:
        return hash(("AbelianGroup", self.moduli))


def cyclic(n: int) -> AbelianGroup:
    return AbelianGroup((n,))


class HeisenbergGroup(FiniteGroup):
    """Upper unitriangular 3x3 matrices mod ``n``; ``(x, y, z)`` has code ``x*n*n + y*n + z``.

    ``(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')``.
    """

    def __init__(self, n: int) -> None:
        if n < 2:
            raise GroupAxiomError("Heisenberg modulus must be at least 2")
        self.n = n
        self.order = n**3
        self.identity = 0
        self.name = f"Heis{n}"

    def encode(self, x: int, y: int, z: int) -> int:
        n = self.n
        return (x % n) * n * n + (y % n) * n + (z % n)

    def decode(self, g: int) -> tuple[int, int, int]:
        n = self.n
        return g // (n * n), (g // n) % n, g % n

    def mul(self, a: int, b: int) -> int:
        x, y, z = self.decode(a)
        u, v, w = self.decode(b)
        return self.encode(x + u, y + v, z + w + x * v)

    def inv(self, a: int) -> int:
        x, y, z = self.decode(a)
        return self.encode(-x, -y, -z + x * y)

    def label(self, g: int) -> str:
        return "(%d,%d,%d)" % self.decode(g)

    @cached_property
    def center(self) -> frozenset[int]:
        return frozenset(self.encode(0, 0, z) for z in range(self.n))


class TableGroup(FiniteGroup):
    """A group given by its multiplication table; axioms are verified."""

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        name: str = "T",
        labels: Sequence[str] | None = None,
    ) -> None:
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0]
        if t.shape != (n, n) or n == 0:
            raise GroupAxiomError("multiplication table must be square and nonempty")
        if n > TABLE_GROUP_CAP:
            raise GroupAxiomError(f"table groups are capped at order {TABLE_GROUP_CAP}")
        if t.min() < 0 or t.max() >= n:
            raise GroupAxiomError("table entries out of range")
        ids = [e for e in range(n) if all(t[e, a] == a and t[a, e] == a for a in range(n))]
        if not ids:
            raise GroupAxiomError("no identity element")
        e = ids[0]
        inv = []
        for a in range(n):
            row = np.nonzero(t[a] == e)[0]
            if len(row) != 1 or t[row[0], a] != e:
                raise GroupAxiomError(f"element {a} has no two-sided inverse")
            inv.append(int(row[0]))
        # associativity, vectorised: (ab)c == a(bc)
        lhs = t[t[:, :, None], np.arange(n)[None, None, :]]
        rhs = t[np.arange(n)[:, None, None], t[None, :, :]]
        if not np.array_equal(lhs, rhs):
            raise GroupAxiomError("table is not associative")
        self.order = n
        self.identity = e
        self.name = name
        self._t = t.astype(np.int32)
        self._inv = inv
        self._labels = list(labels) if labels is not None else None

    def mul(self, a: int, b: int) -> int:
        return int(self._t[a, b])

    def inv(self, a: int) -> int:
        return self._inv[a]

    def label(self, g: int) -> str:
        return self._labels[g] if self._labels else str(g)

    @cached_property
    def _table(self) -> np.ndarray:
        return self._t


def quaternion_group() -> TableGroup:
    """Q8 as a table; elements are ``+-1, +-i, +-j, +-k``."""
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    base = {("1", x): x for x in "1ijk"}
    base.update({(x, "1"): x for x in "1ijk"})
    rules = {
        ("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
        ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
        ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j",
    }
    base.update(rules)

    def times(a: str, b: str) -> str:
        sa, ua = (a[0] == "-"), a.lstrip("-")
        sb, ub = (b[0] == "-"), b.lstrip("-")
        r = base[(ua, ub)]
        neg = sa ^ sb ^ r.startswith("-")
        r = r.lstrip("-")
        if r == "1" and neg:
            return "-1"
        return ("-" if neg else "") + r

    idx = {s: i for i, s in enumerate(names)}
    table = [[idx[times(a, b)] for b in names] for a in names]
    return TableGroup(table, name="Q8", labels=names)


def dihedral_group(n: int) -> TableGroup:
    """Symmetries of the regular ``n``-gon, order ``2n``: element ``r^i s^e`` has code ``2i + e``."""
    if n < 1:
        raise GroupAxiomError("dihedral groups need n >= 1")

    def times(a: int, b: int) -> int:
        i, e = divmod(a, 2)
        j, f = divmod(b, 2)
        # r^i s^e r^j s^f = r^(i + (-1)^e j) s^(e+f)
        k = (i + (j if e == 0 else -j)) % n
        return 2 * k + ((e + f) % 2)

    order = 2 * n
    labels = [f"r{i}" + ("s" if e else "") for i in range(n) for e in (0, 1)]
    table = [[times(a, b) for b in range(order)] for a in range(order)]
    return TableGroup(table, name=f"D{n}", labels=labels)


class Filtration:
    """A chain ``G = G_0 >= G_1 >= ... >= G_{d+1} = {id}`` of subgroups.

    ``chain[i]`` is ``G_i``; indices past the end mean the trivial group.
    ``G_0 == G_1`` is required unless ``proper=False`` is passed.
    """

    def __init__(
        self,
        group: FiniteGroup,
        chain: Sequence[Iterable[int]],
        *,
        proper: bool = True,
        verify: bool = True,
    ) -> None:
        chain = [frozenset(int(g) for g in sub) for sub in chain]
        if not chain:
            raise GroupAxiomError("empty filtration chain")
        full = frozenset(group.elements())
        if chain[0] != full:
            raise GroupAxiomError("G_0 must be the whole group")
        triv = frozenset([group.identity])
        if chain[-1] != triv:
            chain.append(triv)
        if len(chain) == 1:
            # the trivial group: G_0 = G_1 = {id}
            chain.append(triv)
        if proper and chain[1] != chain[0]:
            raise GroupAxiomError("G_1 differs from G_0; pass proper=False to allow it")
        if verify:
            for i, sub in enumerate(chain):
                if not group.is_subgroup(sub):
                    raise GroupAxiomError(f"G_{i} is not a subgroup")
                if i and not sub <= chain[i - 1]:
                    raise GroupAxiomError(f"G_{i} is not contained in G_{i - 1}")
        self.group = group
        self.chain = tuple(chain)
        self.degree = len(chain) - 2
        self.proper = proper

    def G(self, i: int) -> frozenset[int]:
        if i <= 0:
            return self.chain[0]
        if i >= len(self.chain):
            return self.chain[-1]
        return self.chain[i]

    @cached_property
    def level(self) -> np.ndarray:
        """``level[g]`` = largest ``i`` with ``g`` in ``G_i`` (huge for the identity)."""
        lv = np.zeros(self.group.order, dtype=np.int32)
        for i, sub in enumerate(self.chain):
            for g in sub:
                lv[g] = i
        lv[self.group.identity] = 1 << 20
        return lv

    @cached_property
    def generators(self) -> tuple[tuple[int, ...], ...]:
        """A small generating set for each ``G_i``, ``i = 0..degree``."""
        return tuple(self.group.generating_set(self.G(i)) for i in range(self.degree + 1))

    def __repr__(self) -> str:
        sizes = [len(s) for s in self.chain]
        return f"<Filtration of {self.group.name} sizes={sizes}>"


def commutator_check(f: Filtration) -> CheckResult:
    """Check ``[G_i, G_j] <= G_{i+j}`` for all ``i + j <= degree + 1``."""
    grp = f.group
    top = f.degree + 1
    for i in range(0, top + 1):
        for j in range(i, top + 1 - i):
            target = f.G(i + j)
            for g in sorted(f.G(i)):
                for h in sorted(f.G(j)):
                    c = grp.commutator(g, h)
                    if c not in target:
                        return CheckResult(
                            False,
                            witness={"g": g, "h": h, "i": i, "j": j, "commutator": c},
                            detail=f"[{grp.label(g)}, {grp.label(h)}] = {grp.label(c)} not in G_{i + j}",
                        )
    return CheckResult(True)


def lower_central_filtration(group: FiniteGroup, max_len: int = 64) -> Filtration:
    """``G_1 = G``, ``G_{i+1} = [G, G_i]``; fails for non-nilpotent groups."""
    full = frozenset(group.elements())
    chain = [full, full]
    while len(chain[-1]) > 1:
        prev = chain[-1]
        comms = {group.commutator(g, h) for g in full for h in prev}
        nxt = group.generated(comms)
        if nxt == prev:
            raise GroupAxiomError(f"{group.name} is not nilpotent")
        chain.append(nxt)
        if len(chain) > max_len:
            raise GroupAxiomError("lower central series did not terminate")
    return Filtration(group, chain)


def degree_filtration(group: FiniteGroup, s: int) -> Filtration:
    """``G = G_0 = ... = G_s >= {id}``, the filtration behind ``D_s(G)``."""
    if s < 0:
        raise GroupAxiomError("degree must be non-negative")
    if not group.is_abelian and s >= 1:
        raise GroupAxiomError("degree filtrations of positive degree need an abelian group")
    full = frozenset(group.elements())
    return Filtration(group, [full] * (s + 1) + [frozenset([group.identity])])


def make_heisenberg(n: int) -> Filtration:
    """Heisenberg group mod ``n`` with its lower central series ``G >= Z(G) >= {id}``."""
    grp = HeisenbergGroup(n)
    full = frozenset(grp.elements())
    f = Filtration(grp, [full, full, grp.center, frozenset([grp.identity])])
    res = commutator_check(f)
    if not res.passed:  # pragma: no cover - construction guarantees this
        raise GroupAxiomError(res.detail)
    return f
