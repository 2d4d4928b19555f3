"""Shared fixtures: small groups and finite spaces used across the tests."""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from nilcube.cubespace import ExtensionSpace
from nilcube.groups import (
    AbelianGroup,
    TableGroup,
    dihedral_group,
    lower_central_filtration,
    make_heisenberg,
    quaternion_group,
)
from nilcube.host_kra import HostKraSpace, dk_space, nilmanifold_space, one_point_space

# -- groups ----------------------------------------------------------------


def _table_group(elements: list, times, name: str) -> TableGroup:
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[times(a, b)] for b in elements] for a in elements]
    return TableGroup(table, name=name, labels=[str(e) for e in elements])


def semidirect_cyclic(m: int, n: int, r: int, name: str) -> TableGroup:
    """``Z/m x| Z/n`` with the generator of ``Z/n`` acting by ``x -> r x``."""
    assert pow(r, n, m) == 1 % m
    elems = [(a, b) for a in range(m) for b in range(n)]
    return _table_group(elems, lambda x, y: ((x[0] + pow(r, x[1], m) * y[0]) % m, (x[1] + y[1]) % n), name)


def dicyclic(n: int) -> TableGroup:
    """Order ``4n``: ``a^(2n) = 1``, ``x^2 = a^n``, ``x a x^-1 = a^-1``."""
    m = 2 * n

    def times(p, q):
        k, e = p
        l, f = q
        if e == 0:
            return ((k + l) % m, f)
        if f == 0:
            return ((k - l) % m, 1)
        return ((k - l + n) % m, 0)

    return _table_group([(k, e) for k in range(m) for e in (0, 1)], times, f"Dic{n}")


def pauli_group() -> TableGroup:
    """``i^k X^a Z^b`` with ``Z X = -X Z`` (central product of Z/4 and D4)."""
    elems = list(product(range(4), range(2), range(2)))
    return _table_group(
        elems,
        lambda p, q: ((p[0] + q[0] + 2 * p[2] * q[1]) % 4, (p[1] + q[1]) % 2, (p[2] + q[2]) % 2),
        "Pauli",
    )


def z4z2_by_z2() -> TableGroup:
    """``(Z/4 x Z/2) x| Z/2`` with ``(x, y) -> (x, y + x)``."""
    elems = list(product(range(4), range(2), range(2)))

    def times(p, q):
        x, y = q[0], q[1]
        if p[2]:
            y = (y + x) % 2
        return ((p[0] + x) % 4, (p[1] + y) % 2, (p[2] + q[2]) % 2)

    return _table_group(elems, times, "Z4Z2:Z2")


def direct_product(G, H, name: str) -> TableGroup:
    elems = list(product(range(G.order), range(H.order)))
    return _table_group(elems, lambda p, q: (G.mul(p[0], q[0]), H.mul(p[1], q[1])), name)


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while n > 1:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    return out


def abelian_moduli(order: int) -> list[tuple[int, ...]]:
    """One modulus list per isomorphism type of abelian group of this order."""
    per_prime = [[tuple(p**k for k in part) for part in _partitions(e)] for p, e in sorted(_factor(order).items())]
    out = []
    for combo in product(*per_prime):
        out.append(tuple(m for piece in combo for m in piece))
    return out or [()]


def abelian_groups(max_order: int) -> list[AbelianGroup]:
    return [AbelianGroup(mod) for n in range(1, max_order + 1) for mod in abelian_moduli(n)]


@lru_cache(maxsize=None)
def nonabelian_nilpotent_groups() -> tuple:
    """Every nonabelian nilpotent group of order at most 27."""
    heis = make_heisenberg(3).group
    z3 = AbelianGroup((3,))
    z2 = AbelianGroup((2,))
    return (
        dihedral_group(4),
        quaternion_group(),
        direct_product(z2, dihedral_group(4), "Z2xD4"),
        direct_product(z2, quaternion_group(), "Z2xQ8"),
        pauli_group(),
        semidirect_cyclic(4, 4, 3, "Z4:Z4"),
        semidirect_cyclic(8, 2, 5, "M16"),
        dihedral_group(8),
        semidirect_cyclic(8, 2, 3, "SD16"),
        dicyclic(4),
        z4z2_by_z2(),
        direct_product(z3, dihedral_group(4), "Z3xD4"),
        direct_product(z3, quaternion_group(), "Z3xQ8"),
        heis,
        semidirect_cyclic(9, 3, 4, "Z9:Z3"),
    )


def group_signature(G) -> tuple:
    """Isomorphism invariants: element-order counts, centre size and exponent, derived subgroup size."""
    orders = sorted(G.element_order(g) for g in G.elements())
    center = [z for z in G.elements() if all(G.mul(z, g) == G.mul(g, z) for g in G.elements())]
    exp_center = max(G.element_order(z) for z in center)
    derived = G.generated(G.commutator(a, b) for a in G.elements() for b in G.elements())
    squares = len({G.mul(g, g) for g in G.elements()})
    return (G.order, tuple(orders), len(center), exp_center, len(derived), squares)


# -- spaces ---------------------------------------------------------------------

Z2, Z3, Z4 = AbelianGroup((2,)), AbelianGroup((3,)), AbelianGroup((4,))


def cubic_form(b) -> int:
    """``prod_i (b[e_i] - b[0]) mod 2`` on 3-cubes of ``D_1(Z/2)``."""
    r = 1
    for i in range(3):
        r *= (b[1 << i] - b[0]) % 2
    return r


@lru_cache(maxsize=None)
def extension_fixture():
    """A 4-point degree-2 extension of ``D_1(Z/2)`` by ``Z/2`` whose factor swap does not lift."""
    return ExtensionSpace(dk_space(Z2, 1, max_dim=4), Z2, 2, cubic_form, max_dim=4)


@lru_cache(maxsize=None)
def fixture_spaces() -> dict:
    """Name -> space for every small fixture (at most 27 points)."""
    heis2 = make_heisenberg(2)
    heis3 = make_heisenberg(3)
    d4 = lower_central_filtration(dihedral_group(4))
    q8 = lower_central_filtration(quaternion_group())
    from nilcube.groups import degree_filtration

    return {
        "point": one_point_space(max_dim=3),
        "D1(Z2)": dk_space(Z2, 1, max_dim=3),
        "D1(Z3)": dk_space(Z3, 1, max_dim=3),
        "D1(Z4)": dk_space(Z4, 1, max_dim=3),
        "D1(Z2^2)": dk_space(AbelianGroup((2, 2)), 1, max_dim=3),
        "D1(Z3^2)": dk_space(AbelianGroup((3, 3)), 1, max_dim=3),
        "D2(Z2)": dk_space(Z2, 2, max_dim=4),
        "D2(Z3)": dk_space(Z3, 2, max_dim=4),
        "D2(Z4)": nilmanifold_space(degree_filtration(Z4, 2), max_dim=4),
        "Heis2": HostKraSpace(heis2, max_dim=3),
        "Heis3": HostKraSpace(heis3, max_dim=3),
        "Heis3/Z": nilmanifold_space(heis3, heis3.group.center, max_dim=3),
        "D4": HostKraSpace(d4, max_dim=3),
        "Q8": HostKraSpace(q8, max_dim=3),
        "Ext": extension_fixture(),
    }
