from __future__ import annotations

import os
import subprocess
import sys
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nilcube import kernels
from nilcube.cubes import faces, peel_order, sign
from nilcube.groups import AbelianGroup, make_heisenberg
from nilcube.host_kra import _tables, hk_generators
from nilcube.linalg import (
    decompose_abelian,
    integer_row_basis,
    smith_normal_form,
    solve_linear_mod,
    torsion_exponent,
)

compiled_only = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")

small_matrices = st.integers(1, 4).flatmap(
    lambda rows: st.integers(1, 4).flatmap(
        lambda cols: st.lists(
            st.lists(st.integers(-6, 6), min_size=cols, max_size=cols), min_size=rows, max_size=rows
        )
    )
)


def test_backend_is_reported():
    assert kernels.BACKEND in {"cython", "python"}


def test_pure_python_switch():
    env = dict(os.environ, NILCUBE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from nilcube import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@compiled_only
def test_kernels_agree_between_backends():
    rng = np.random.default_rng(0)
    filt = make_heisenberg(3)
    mul, inv, level = _tables(filt)
    order = np.array(peel_order(3))
    configs = rng.integers(0, 27, size=(3000, 8))
    a = kernels.hk_peel_batch(configs, mul, inv, level, order, use_compiled=True)
    b = kernels.hk_peel_batch(configs, mul, inv, level, order, use_compiled=False)
    assert np.array_equal(a, b)

    A = AbelianGroup((3, 3))
    fv = [f.vertices() for f in faces(3, 1)]
    signs = [sign(u) for u in range(4)]
    rows = rng.integers(0, 9, size=(3000, 8))
    rows[:100] = 0  # guarantee some accepted rows
    a = kernels.face_sum_batch(rows, A.mul_table(), A.inv_array(), fv, signs, A.identity, use_compiled=True)
    b = kernels.face_sum_batch(rows, A.mul_table(), A.inv_array(), fv, signs, A.identity, use_compiled=False)
    assert np.array_equal(a, b) and a[:100].all()

    gens = np.array(hk_generators(filt, 2), dtype=np.int32)
    a = kernels.closure_bfs(gens, filt.group.mul_table(), filt.group.identity, 10**6, use_compiled=True)
    b = kernels.closure_bfs(gens, filt.group.mul_table(), filt.group.identity, 10**6, use_compiled=False)
    assert np.array_equal(a, b) and len(a) == 27 * 27 * 27 * 3

    basis = np.zeros((9, 9), dtype=np.int64)
    np.fill_diagonal(basis, 12)
    hrows = rng.integers(0, 12, size=(40, 9))
    a = kernels.hnf_insert_rows(basis.copy(), hrows, 12, use_compiled=True)
    b = kernels.hnf_insert_rows(basis.copy(), hrows, 12, use_compiled=False)
    assert np.array_equal(a, b)


def test_closure_limit_and_codes():
    filt = make_heisenberg(3)
    gens = np.array(hk_generators(filt, 2), dtype=np.int32)
    assert kernels.closure_bfs(gens, filt.group.mul_table(), filt.group.identity, 100) is None
    codes = kernels.encode_configs([[1, 2, 0], [0, 0, 4]], 5)
    assert kernels.decode_codes(codes, 5, 3).tolist() == [[1, 2, 0], [0, 0, 4]]


def _brute_solutions(A, b, m):
    A = np.array(A)
    return [x for x in product(range(m), repeat=A.shape[1]) if not np.any((A @ np.array(x) - b) % m)]


@settings(max_examples=60, deadline=None)
@given(small_matrices, st.integers(2, 6), st.data())
def test_solve_linear_mod_matches_brute_force(A, m, data):
    A = np.array(A, dtype=np.int64)
    b = np.array(data.draw(st.lists(st.integers(0, m - 1), min_size=len(A), max_size=len(A))))
    res = solve_linear_mod(A, b, m)
    brute = _brute_solutions(A, b, m)
    assert res.solvable == bool(brute)
    if res.solvable:
        assert tuple(res.solution) in brute
    else:
        assert res.certificate.verify(A, b)


def test_certificate_example():
    A = np.array([[1, 1], [1, 1]])
    res = solve_linear_mod(A, np.array([0, 1]), 2)
    assert not res.solvable
    cert = res.certificate
    assert cert.value % 2 == 1 and cert.verify(A, np.array([0, 1]))


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_smith_normal_form(M):
    diag, U, V = smith_normal_form(M)
    U, V, Mx = np.array(U, dtype=object), np.array(V, dtype=object), np.array(M, dtype=object)
    D = U.dot(Mx).dot(V)
    for i in range(D.shape[0]):
        for j in range(D.shape[1]):
            assert D[i, j] == (diag[i] if i == j and i < len(diag) else 0)
    nz = [abs(d) for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert abs(round(np.linalg.det(np.array(U, dtype=float)))) == 1
    assert abs(round(np.linalg.det(np.array(V, dtype=float)))) == 1


def test_integer_row_basis_and_torsion():
    A = [[2, 0], [0, 3], [2, 3]]
    basis = integer_row_basis(A)
    assert len(basis) == 2
    assert torsion_exponent(A) == 6  # invariant factors 1 and 6
    assert torsion_exponent([[2, 0], [0, 4]]) == 4
    assert torsion_exponent([[1, 1], [1, -1]]) == 2
    assert torsion_exponent([[0, 0]]) == 1


def test_decompose_abelian():
    G = AbelianGroup((2, 6))
    dec = decompose_abelian(list(G.elements()), G.mul, G.identity)
    assert sorted(dec.moduli) == [2, 6]
    assert len(dec.coords) == 12
