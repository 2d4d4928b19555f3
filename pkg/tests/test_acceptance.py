"""Acceptance suite: one PASS/FAIL line per criterion on stdout.

Run with ``pytest tests/test_acceptance.py -s`` (the lines are printed even
without ``-s``).
"""

from __future__ import annotations

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F
from itertools import permutations, product

import numpy as np
import pytest

import catalog
from nilcube import kernels
from nilcube.cocycles import (
    Cocycle,
    Discrepancy,
    brute_force_coboundary,
    check_cocycle,
    check_uniqueness_theorem,
    closed_torsion_functions,
    coboundary,
    polynomial_degree,
    rho_chi,
    small_representative,
    solve_coboundary_averaging,
    solve_coboundary_linear,
)
from nilcube.cubes import sign
from nilcube.cubespace import encode_rows, structure_group
from nilcube.errors import CapExceeded, PreconditionError, SmallnessBudgetExceeded
from nilcube.groups import AbelianGroup, lower_central_filtration, make_heisenberg
from nilcube.host_kra import HostKraSpace, dk_space, hk_closure, hk_from_record, hk_membership_batch, hk_peel_record, hk_size, nilmanifold_space
from nilcube.translations import (
    check_filtration_property,
    enumerate_translations,
    is_k_translation,
    is_k_translation_batch,
    lift_translation,
    pushforward,
    section_bundle_map,
    translation_groups,
)
from nilcube.values import ValueGroup

T = ValueGroup(1)


@contextmanager
def criterion(capsys, number: int, title: str, limit: float | None = None):
    """Print one line for the criterion; the body fills ``info`` with details."""
    info: dict = {}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        if ok and limit is not None and elapsed >= limit:
            ok = False
            info["time limit"] = f"{limit:g} s exceeded"
        detail = "; ".join(f"{k}: {v}" for k, v in info.items())
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title} ({elapsed:.1f} s) {detail}")
    assert elapsed < (limit if limit is not None else float("inf")), f"criterion {number} took {elapsed:.1f} s"


@pytest.fixture(scope="module")
def spaces():
    return catalog.fixture_spaces()


# -- 1: translation algebra -------------------------------------------------------


def test_criterion_01_translation_orders(capsys):
    with criterion(capsys, 1, "translation orders on D1(Z3^2)", limit=10) as info:
        X = dk_space(AbelianGroup((3, 3)), 1, max_dim=3)
        orders = [enumerate_translations(X, k).order for k in (1, 2)]
        info["|Aut_1|, |Aut_2|"] = orders
        assert orders == [9, 1]


# -- 2: definition and corner tests agree ---------------------------------------


def test_criterion_02_definition_equivalence(capsys, spaces):
    with criterion(capsys, 2, "definition and corner tests agree", limit=60) as info:
        pairs = 0
        for name, X in spaces.items():
            if X.npoints > 9:
                continue
            P = np.array(list(permutations(range(X.npoints))), dtype=np.int64)
            s = X.claimed_degree
            for k in range(0, s + 2):
                a = is_k_translation_batch(X, P, k, "definition")
                b = is_k_translation_batch(X, P, k, "corner")
                assert np.array_equal(a, b), f"{name} level {k}"
                pairs += len(P)
        info["(map, level) pairs"] = pairs


# -- 3: filtration law ---------------------------------------------------------------


def test_criterion_03_filtration_law(capsys, spaces):
    with criterion(capsys, 3, "commutators of Aut_i and Aut_j lie in Aut_(i+j)") as info:
        cases = {name: list(range(0, X.claimed_degree + 2)) for name, X in spaces.items()
                 if name.startswith("D") or name in ("Heis2", "Heis3/Z")}
        cases["Heis3"] = [1, 2, 3]
        checked = 0
        for name, levels in cases.items():
            groups = translation_groups(spaces[name], levels)
            res = check_filtration_property(groups)
            assert res.passed, f"{name}: {res.detail}"
            checked += 1
        info["spaces"] = checked


# -- 4: structure group of the Heisenberg space ---------------------------------------


def test_criterion_04_structure_group_action(capsys):
    with criterion(capsys, 4, "structure group of Heisenberg mod 3") as info:
        heis = make_heisenberg(3)
        X = nilmanifold_space(heis, [heis.group.identity], max_dim=3)
        G = heis.group
        sg = structure_group(X, 2)
        rows = {tuple(int(v) for v in row) for row in sg.table}
        central = {tuple(G.mul(z, x) for x in G.elements()) for z in G.center}
        info["order"] = sg.group.order
        assert sg.group.order == 3
        assert rows == central
        assert all(is_k_translation(X, r, 2) for r in rows)


# -- 5: discrepancy -----------------------------------------------------------------------


def _glue(c1: np.ndarray, c2: np.ndarray, s: int, k: int) -> np.ndarray:
    bit = 1 << (k - 1)
    lo = [w for w in range(1 << (s + 1)) if not w & bit]
    hi = [w | bit for w in lo]
    out = np.empty((len(c1), 1 << (s + 1)), dtype=np.int64)
    out[:, lo] = c1
    out[:, hi] = c2
    return out


def _split(rows: np.ndarray, s: int, k: int):
    bit = 1 << (k - 1)
    lo = [w for w in range(1 << (s + 1)) if not w & bit]
    return rows[:, lo], rows[:, [w | bit for w in lo]]


def _factor_triples(cubes: np.ndarray, npoints: int, s: int, k: int):
    """``(y0, y1, y2)`` with ``[y0, y1]_k`` and ``[y1, y2]_k`` both cubes."""
    a, b = _split(cubes, s, k)
    ca, cb = encode_rows(a, npoints), encode_rows(b, npoints)
    order = np.argsort(ca, kind="stable")
    left = np.searchsorted(ca[order], cb, "left")
    count = np.searchsorted(ca[order], cb, "right") - left
    i = np.repeat(np.arange(len(cubes)), count)
    offs = np.arange(int(count.sum())) - np.repeat(np.cumsum(count) - count, count)
    j = order[np.repeat(left, count) + offs]
    return a[i], b[i], b[j]


def _discrepancy_membership(X, sg, d) -> int:
    """Delta = 0 exactly on cubes, over every configuration above a factor cube."""
    s = sg.degree
    L = 1 << (s + 1)
    fm = sg.factor
    Y = fm.target.cubes(s + 1).astype(np.int64).reshape(-1, L)
    alphas = np.array(list(product(range(sg.group.order), repeat=L)), dtype=np.int64)
    per = max(1, (1 << 20) // len(alphas))
    checked = hits = 0
    for i in range(0, len(Y), per):
        rows = sg.table[alphas[None, :, :], d.sigma[Y[i:i + per]][:, None, :]].reshape(-1, L)
        zero = d.batch(rows) == sg.group.identity
        member = X.is_cube_batch(rows)
        assert np.array_equal(zero, member)
        checked += len(rows)
        hits += int(member.sum())
    # every cube was met, so no cube lies over a non-cube of the factor
    try:
        expected = X.count_cubes(s + 1)
    except CapExceeded:
        expected = hk_size(X.filtration, s + 1)
    assert hits == expected
    return checked


def _pair_tables(sg, d, s, k, ya, yb, alphas) -> np.ndarray:
    """Delta of ``[a . sigma(ya), b . sigma(yb)]_k`` for every lift pair."""
    na, H = alphas.shape
    out = np.empty((len(ya), na, na), dtype=np.int64)
    per = max(1, (1 << 20) // (na * na))
    for i in range(0, len(ya), per):
        c0 = sg.table[alphas[None, :, :], d.sigma[ya[i:i + per]][:, None, :]]
        c1 = sg.table[alphas[None, :, :], d.sigma[yb[i:i + per]][:, None, :]]
        n = len(c0)
        left = np.repeat(c0[:, :, None, :], na, axis=2).reshape(-1, H)
        right = np.repeat(c1[:, None, :, :], na, axis=1).reshape(-1, H)
        out[i:i + n] = d.batch(_glue(left, right, s, k)).reshape(n, na, na)
    return out


def _discrepancy_additivity(sg, d, direct_limit: int = 2 * 10**7, sampled: int = 24, seed: int = 0) -> dict:
    s = sg.degree
    fm = sg.factor
    H = 1 << s
    add = d.add
    Yt = fm.target.cubes(s + 1).astype(np.int64).reshape(-1, 2 * H)
    alphas = np.array(list(product(range(sg.group.order), repeat=H)), dtype=np.int64)
    na = len(alphas)
    rng = np.random.default_rng(seed)
    stats = {"exhaustive": 0, "reduced": 0}
    for k in range(1, s + 2):
        y0, y1, y2 = _factor_triples(Yt, fm.target.npoints, s, k)
        # Delta splits as an identically additive coordinate sum minus a
        # term depending on the factor cube only; that term is checked on
        # every factor triple
        sec = [d.batch(_glue(d.sigma[a], d.sigma[b], s, k)) for a, b in ((y0, y1), (y1, y2), (y0, y2))]
        assert np.array_equal(sec[2], add[sec[0], sec[1]])
        if len(y0) * na**3 <= direct_limit:
            pick = np.arange(len(y0))
            stats["exhaustive"] += len(y0) * na**3
        else:
            pick = np.sort(rng.choice(len(y0), sampled, replace=False))
            stats["reduced"] += len(y0)
        per = max(1, (1 << 24) // na**3)
        for i in range(0, len(pick), per):
            t = pick[i:i + per]
            m01 = _pair_tables(sg, d, s, k, y0[t], y1[t], alphas)
            m12 = _pair_tables(sg, d, s, k, y1[t], y2[t], alphas)
            m02 = _pair_tables(sg, d, s, k, y0[t], y2[t], alphas)
            lhs = np.broadcast_to(m02[:, :, None, :], (len(t), na, na, na))
            assert np.array_equal(add[m01[:, :, :, None], m12[:, None, :, :]], lhs)
    return stats


def test_criterion_05_discrepancy_law(capsys, spaces):
    with criterion(capsys, 5, "discrepancy vanishes exactly on cubes and is additive", limit=120) as info:
        configs = triples = reduced = 0
        for name, X in spaces.items():
            s = X.claimed_degree
            if not s or X.npoints == 1:
                continue  # no structure group at degree 0
            sg = structure_group(X, s)
            d = Discrepancy(X, sg)
            configs += _discrepancy_membership(X, sg, d)
            stats = _discrepancy_additivity(sg, d)
            triples += stats["exhaustive"]
            reduced += stats["reduced"]
        info["configurations"] = configs
        info["lifted triples"] = triples
        info["factor triples via reduction"] = reduced


# -- 6: averaging solver round trip ----------------------------------------------


def _small_function(rng: random.Random, n: int, den: int = 2520, spread: int = 40) -> list:
    base = rng.randrange(den)
    return [T.point([F(base + rng.randrange(spread), den)]) for _ in range(n)]


def test_criterion_06_averaging_round_trip(capsys):
    with criterion(capsys, 6, "averaging solver recovers f up to a constant") as info:
        rng = random.Random(2024)
        cases = {"D1(Z3)": dk_space(AbelianGroup((3,)), 1, max_dim=3),
                 "D2(Z2)": dk_space(AbelianGroup((2,)), 2, max_dim=4)}
        solved = 0
        for X in cases.values():
            for ell in (1, 2):
                for _ in range(100):
                    f = _small_function(rng, X.npoints)
                    rho = coboundary(X, f, ell, T)
                    g = solve_coboundary_averaging(X, rho).f
                    assert coboundary(X, g, ell, T) == rho
                    assert len({g[x] - f[x] for x in range(X.npoints)}) == 1
                    solved += 1
        info["instances"] = solved


# -- 7: solver cross-validation ------------------------------------------------------


def _generated_finite_cocycles(X, ell: int, m: int, M: int):
    """``d^ell g / M`` in ``Z/m`` for every ``g : X -> Z/(mM)`` with ``g(0) = 0`` whose
    coboundary is divisible by ``M``; distinct tables only."""
    cubes = X.cubes(ell).astype(np.int64).reshape(-1, 1 << ell)
    signs = np.array([sign(w) for w in range(1 << ell)])
    A = AbelianGroup((m,))
    seen = set()
    for tail in product(range(m * M), repeat=X.npoints - 1):
        g = np.array((0,) + tail)
        total = (g[cubes] * signs).sum(axis=1) % (m * M)
        if (total % M).any():
            continue
        key = tuple((total // M).tolist())
        if key in seen:
            continue
        seen.add(key)
        yield Cocycle(X, ell, {tuple(c): int(v) for c, v in zip(cubes.tolist(), key)}, A)


def test_criterion_07_solver_cross_validation(capsys, spaces):
    with criterion(capsys, 7, "averaging and linear solvers agree; obstructions confirmed") as info:
        rng = random.Random(7)
        joint = averaging_declined = 0
        for name in ("D1(Z3)", "D2(Z2)", "D1(Z4)", "D1(Z2^2)", "D1(Z3^2)", "D2(Z3)", "Heis2", "D4", "Q8",
                     "Heis3/Z", "Ext"):
            X = spaces[name]
            for ell in range(1, min(X.claimed_degree + 1, X.max_dim) + 1):
                for _ in range(10):
                    f = _small_function(rng, X.npoints)
                    rho = coboundary(X, f, ell, T)
                    lin = solve_coboundary_linear(rho)
                    assert lin.solvable
                    try:
                        avg = solve_coboundary_averaging(X, rho).f
                    except SmallnessBudgetExceeded:
                        averaging_declined += 1
                        continue
                    a = small_representative(rho, lin.function)
                    b = small_representative(rho, avg)
                    assert len({a[x] - b[x] for x in range(X.npoints)}) == 1, f"{name} order {ell}"
                    joint += 1
        assert joint > 0
        info["jointly solved"] = joint
        info["declined by averaging"] = averaging_declined

        # obstructions on spaces with at most four points
        obstructed = solvable = 0
        small = [spaces[n] for n in ("D1(Z2)", "D1(Z3)", "D1(Z4)", "D1(Z2^2)", "D2(Z2)", "Ext")]
        instances = []
        for X in small:
            for ell in range(1, min(X.max_dim, 3) + 1):
                for m, M in ((2, 2), (2, 4), (4, 2), (3, 3)):
                    if (m * M) ** (X.npoints - 1) <= 4096:
                        instances.extend(_generated_finite_cocycles(X, ell, m, M))
        ext = spaces["Ext"]
        sg = structure_group(ext, 2)
        instances.append(rho_chi(ext, section_bundle_map(sg, (1, 0)), 1, sg))
        for rho in instances:
            assert check_cocycle(rho).passed
            lin = solve_coboundary_linear(rho)
            brute = brute_force_coboundary(rho)
            if lin.solvable:
                solvable += 1
                assert brute is not None
            else:
                obstructed += 1
                assert lin.certificate["verified"]
                assert brute is None
        assert obstructed > 0
        info["finite instances"] = len(instances)
        info["obstructions confirmed"] = obstructed


# -- 8: lifting ------------------------------------------------------------------------------


def test_criterion_08_lifting(capsys, spaces):
    with criterion(capsys, 8, "factor translations lift; obstruction matches brute force") as info:
        X = HostKraSpace(make_heisenberg(3), max_dim=3)
        sg = structure_group(X, 2)
        fm = sg.factor
        lifted = 0
        for k in (1, 2):
            for phi_bar in sorted(enumerate_translations(fm.target, k).elements):
                res = lift_translation(X, phi_bar, k, sg)
                assert res.lifted
                assert pushforward(X, res.lift, fm) == phi_bar
                assert is_k_translation(X, res.lift, k)
                lifted += 1
        info["Heisenberg factor translations lifted"] = lifted

        ext = spaces["Ext"]
        sg = structure_group(ext, 2)
        fm = sg.factor
        verdicts = {}
        for phi_bar in sorted(enumerate_translations(fm.target, 1).elements):
            res = lift_translation(ext, phi_bar, 1, sg)
            brute = [p for p in permutations(range(ext.npoints))
                     if is_k_translation(ext, p, 1) and pushforward(ext, p, fm) == phi_bar]
            assert res.lifted == bool(brute)
            if not res.lifted:
                assert res.obstruction["verified"]
            verdicts[phi_bar] = res.lifted
        assert False in verdicts.values()
        info["extension fixture"] = {str(k): ("lifts" if v else "obstructed") for k, v in verdicts.items()}


# -- 9: HK membership -----------------------------------------------------------------------


def test_criterion_09_hk_membership(capsys):
    with criterion(capsys, 9, "peeling and closure decide HK membership alike") as info:
        groups = catalog.abelian_groups(27) + list(catalog.nonabelian_nilpotent_groups())
        rng = np.random.default_rng(9)
        exhaustive = certified = 0
        chunk = 1 << 20
        for G in groups:
            f = lower_central_filtration(G)
            for n in range(4):
                L = 1 << n
                codes = hk_closure(f, n)
                # peeling accepts at most prod |G_|v|| configurations, since
                # each accepted one is rebuilt from its record
                assert len(codes) == hk_size(f, n)
                for i in range(0, len(codes), chunk):
                    assert hk_membership_batch(f, kernels.decode_codes(codes[i:i + chunk], G.order, L)).all()
                total = G.order ** L
                if total <= 1 << 22:
                    for i in range(0, total, chunk):
                        cand = np.arange(i, min(total, i + chunk), dtype=np.int64)
                        peel = hk_membership_batch(f, kernels.decode_codes(cand, G.order, L))
                        pos = np.minimum(np.searchsorted(codes, cand), len(codes) - 1)
                        assert np.array_equal(peel, codes[pos] == cand)
                    exhaustive += total
                else:
                    sample = rng.choice(codes, 200)
                    for c in kernels.decode_codes(sample, G.order, L):
                        rec = hk_peel_record(f, c.tolist())
                        assert rec is not None and hk_from_record(f, rec) == tuple(c.tolist())
                    # near misses: one vertex moved off a closure element
                    near = kernels.decode_codes(rng.choice(codes, 5000), G.order, L)
                    near[np.arange(len(near)), rng.integers(0, L, len(near))] = rng.integers(0, G.order, len(near))
                    cand = kernels.encode_configs(near, G.order)
                    pos = np.minimum(np.searchsorted(codes, cand), len(codes) - 1)
                    assert np.array_equal(hk_membership_batch(f, near), codes[pos] == cand)
                    certified += total
        info["groups"] = len(groups)
        info["configurations checked one by one"] = exhaustive
        info["configurations covered by the counting certificate"] = certified


# -- 10: uniqueness -----------------------------------------------------------------------


def _candidate_functions(X, rng: random.Random, ell: int):
    N = X.npoints
    yield [T.point([F(rng.randrange(360), 360)])] * N
    for _ in range(20):
        yield _small_function(rng, N, den=360, spread=3)
    e = 6
    for h in closed_torsion_functions(X, ell, e)[:20]:
        yield [T.point([F(int(v), e)]) for v in h]
    if N <= 4:
        for tail in product(range(-2, 3), repeat=N - 1):
            yield [T.point([F(v, 240)]) for v in (0,) + tail]


def test_criterion_10_uniqueness(capsys, spaces):
    with criterion(capsys, 10, "uniqueness theorem and constancy chain") as info:
        rng = random.Random(10)
        passed = rejected = 0
        for name, X in spaces.items():
            s = X.claimed_degree
            if s is None or X.npoints == 1 or X.npoints > 9:
                continue
            for ell in range(1, min(s + 1, X.max_dim) + 1):
                for f in _candidate_functions(X, rng, ell):
                    try:
                        res = check_uniqueness_theorem(X, f, ell)
                    except PreconditionError:
                        rejected += 1
                        continue
                    assert res.passed, f"{name} order {ell}: {res.detail}"
                    passed += 1
        assert passed > 0
        info["instances meeting the preconditions"] = passed
        info["rejected by preconditions"] = rejected

        chains = degrees = 0
        for G in catalog.abelian_groups(16):
            if G.order == 1:
                continue
            Y = dk_space(G, 1, max_dim=3) if G.order <= 8 else None
            fams = [[T.point([F(rng.randrange(97), 97)])] * G.order]
            for _ in range(3):
                chi = [rng.randrange(m) for m in G.moduli]
                fams.append([T.point([sum(F(c * x, m) for c, x, m in zip(chi, G.digits(g), G.moduli))])
                             for g in range(G.order)])
                fams.append(_small_function(rng, G.order, den=1000, spread=3))
                fams.append([T.point([F(G.digits(g)[0] ** 2, 4 * G.moduli[0])]) for g in range(G.order)])
            for gamma in fams:
                pd = polynomial_degree(gamma, G)
                if pd.small:
                    assert pd.chain_constant == pd.direct_constant
                    chains += 1
                if Y is not None and pd.degree is not None and pd.degree <= 3:
                    assert coboundary(Y, gamma, pd.degree, T).is_zero()
                    if pd.degree > 1:
                        assert not coboundary(Y, gamma, pd.degree - 1, T).is_zero()
                    degrees += 1
        assert chains > 0
        info["constancy chains run"] = chains
        info["degrees cross-checked on cubes"] = degrees
