from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, strategies as st

from nilcube.cubes import (
    Face,
    alternating_sum,
    concat,
    constant,
    corner,
    corner_config,
    dim_of,
    duplicate,
    faces,
    faces_with_top,
    peel_order,
    permute_coordinates,
    reflect,
    restrict,
    split,
)
from nilcube.errors import DimensionMismatch, InvalidCodimension
from nilcube.groups import AbelianGroup


def configs(n: int, alphabet: int = 5):
    return st.lists(st.integers(0, alphabet - 1), min_size=1 << n, max_size=1 << n).map(tuple)


def test_face_counts():
    assert faces(2, 0) == [Face.whole(2)]
    assert len(faces(3, 1)) == 6
    vertices = sorted(f.vertices() for f in faces(2, 2))
    assert vertices == [(0,), (1,), (2,), (3,)]
    for n in range(5):
        for k in range(n + 1):
            # choose the fixed coordinates, then their bits
            from math import comb

            assert len(faces(n, k)) == comb(n, k) * 2**k


def test_face_rejects_bad_codimension():
    with pytest.raises(InvalidCodimension):
        faces(2, 3)
    with pytest.raises(InvalidCodimension):
        Face(2, ((1, 0), (1, 1)))


def test_colex_vertex_order():
    # vertex bit i-1 is omega_i
    assert Face(2, ((1, 1),)).vertices() == (1, 3)
    assert Face(2, ((2, 1),)).vertices() == (2, 3)


@given(configs(2), configs(2), st.integers(1, 3))
def test_concat_restrict_round_trip(c1, c2, k):
    c = concat(c1, c2, k)
    assert dim_of(c) == 3
    assert restrict(c, Face(3, ((k, 0),))) == c1
    assert restrict(c, Face(3, ((k, 1),))) == c2
    assert split(c, k) == (c1, c2)


def test_concat_points_is_edge():
    assert concat((4,), (7,), 1) == (4, 7)


def test_concat_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        concat((1, 2), (1,), 1)


def test_restrict_examples():
    c = tuple(range(8))
    assert restrict(c, Face.whole(3)) == c
    assert restrict(corner("x", "y", 2), Face.vertex(2, 3)) == ("y",)
    for k in range(4):
        for f in faces(3, k):
            assert set(restrict(constant("x", 3), f)) == {"x"}


def test_corner_examples():
    assert corner(2, 2, 3) == constant(2, 3)
    assert corner(1, 5, 1) == (1, 5)
    Z = AbelianGroup((7,))
    for a in range(7):
        assert alternating_sum(corner(0, a, 2), Z) == a


def test_corner_config_places_second_on_top_face():
    c = corner_config((1, 2), (3, 4), 2)
    assert restrict(c, Face(3, ((2, 1), (3, 1)))) == (3, 4)
    assert c[:6] == (1, 2) * 3


def test_duplicate_examples():
    assert duplicate((1, 2), 0) == (1, 2)
    assert duplicate((9,), 3) == constant(9, 3)
    c = (1, 2, 3, 4)
    assert restrict(duplicate(c, 1), Face(3, ((3, 0),))) == c


def test_alternating_sum_constant_and_parallelepipeds():
    for moduli in [(2,), (3,), (4,), (2, 2)]:
        A = AbelianGroup(moduli)
        for n in range(1, 4):
            for a in A.elements():
                assert alternating_sum(constant(a, n), A) == A.identity
        # parallelepipeds x + sum omega_i h_i have zero alternating sum for n >= 2
        for x, h1, h2 in product(A.elements(), repeat=3):
            c = (x, A.mul(x, h1), A.mul(x, h2), A.mul(A.mul(x, h1), h2))
            assert alternating_sum(c, A) == A.identity


@given(configs(3), st.integers(1, 3))
def test_reflect_is_involution(c, k):
    assert reflect(reflect(c, k), k) == c
    lo, hi = split(c, k)
    assert split(reflect(c, k), k) == (hi, lo)


@given(configs(3), st.permutations([1, 2, 3]))
def test_permute_coordinates_preserves_values(c, perm):
    out = permute_coordinates(c, perm)
    assert sorted(out) == sorted(c)
    assert out[0] == c[0] and out[7] == c[7]


def test_peel_order_and_faces_with_top():
    assert peel_order(2) == (0, 1, 2, 3)
    assert peel_order(3) == (0, 1, 2, 4, 3, 5, 6, 7)
    # every face of dimension >= 1 has exactly one largest vertex
    for n in range(1, 4):
        total = sum(len(faces_with_top(v, n)) for v in range(1 << n))
        assert total == sum(len(faces(n, k)) for k in range(n))
