from __future__ import annotations

from itertools import product

import numpy as np
import pytest

import catalog
from nilcube.cubespace import check_ergodic
from nilcube.errors import CapExceeded
from nilcube.groups import AbelianGroup, degree_filtration, lower_central_filtration, make_heisenberg
from nilcube.host_kra import (
    dk_space,
    hk_closure,
    hk_from_record,
    hk_membership,
    hk_membership_batch,
    hk_peel_record,
    hk_size,
    nilmanifold_space,
)


def test_constant_configurations_are_hk_cubes():
    f = make_heisenberg(3)
    for g in f.group.elements():
        for n in range(3):
            assert hk_membership(f, (g,) * (1 << n), method="both")
        assert hk_membership(f, (g,) * 8)


def test_abelian_degree_one_square_membership():
    f = degree_filtration(AbelianGroup((2,)), 1)
    hits = [c for c in product(range(2), repeat=4) if hk_membership(f, c, method="both")]
    assert len(hits) == 8
    assert all((a - b - c + d) % 2 == 0 for a, b, c, d in hits)


def test_heisenberg_mod3_square_count():
    f = make_heisenberg(3)
    assert len(hk_closure(f, 2)) == 27 * 27**2 * 3 == 59049
    assert hk_size(f, 2) == 59049


def test_peel_record_round_trip_on_closure():
    from nilcube.groups import dihedral_group

    f = lower_central_filtration(dihedral_group(4))
    G = f.group
    codes = hk_closure(f, 2)
    powers = G.order ** np.arange(4)
    for code in codes[:: max(1, len(codes) // 200)]:
        c = tuple(int(code // p % G.order) for p in powers)
        rec = hk_peel_record(f, c)
        assert rec is not None and hk_from_record(f, rec) == c


def test_compiled_and_fallback_agree():
    from nilcube.kernels import BACKEND, decode_codes

    f = make_heisenberg(3)
    rng = np.random.default_rng(3)
    members = decode_codes(hk_closure(f, 2)[::97], 27, 4)
    rows = np.vstack([rng.integers(0, 27, size=(5000, 4)), members])
    fallback = hk_membership_batch(f, rows, use_compiled=False)
    assert fallback[5000:].all()
    if BACKEND == "cython":
        assert np.array_equal(fallback, hk_membership_batch(f, rows, use_compiled=True))


def test_closure_cap_raises():
    with pytest.raises(CapExceeded):
        hk_closure(make_heisenberg(3), 3, limit=1000)


def test_dk_space_counts():
    assert dk_space(AbelianGroup((2,)), 1).count_cubes(2) == 8
    for moduli in [(2,), (3,), (4,), (2, 2)]:
        A = AbelianGroup(moduli)
        for s in (1, 2):
            X = dk_space(A, s, max_dim=s + 1)
            assert X.count_cubes(s + 1) == A.order ** (2 ** (s + 1) - 1)
            brute = sum(1 for c in product(range(A.order), repeat=2 ** (s + 1)) if X.is_cube(c)) if A.order ** (2 ** (s + 1)) <= 70000 else None
            if brute is not None:
                assert brute == A.order ** (2 ** (s + 1) - 1)


def test_constant_configurations_are_dk_cubes():
    X = dk_space(AbelianGroup((3,)), 1, max_dim=4)
    for a in range(3):
        for n in range(1, 5):
            assert X.is_cube((a,) * (1 << n))


def test_nilmanifold_quotients():
    f = make_heisenberg(3)
    G = f.group
    whole = nilmanifold_space(f, G.elements(), max_dim=3)
    assert whole.npoints == 1
    assert whole.count_cubes(3) == 1
    trivial = nilmanifold_space(f, None, max_dim=2)
    assert np.array_equal(np.sort(trivial.cube_codes(2)), hk_closure(f, 2))
    mod_center = nilmanifold_space(f, G.center, max_dim=3)
    assert mod_center.npoints == 9
    assert mod_center.count_cubes(1) == 81
    assert check_ergodic(mod_center).passed


def test_every_fixture_nilmanifold_is_ergodic():
    for name, X in catalog.fixture_spaces().items():
        assert check_ergodic(X).passed, name
