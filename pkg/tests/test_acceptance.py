"""Acceptance criteria 1-9.

Each test is tagged with its criterion number; ``conftest.py`` prints one
PASS/FAIL line per criterion with the worst measured error.
"""
import cmath

import numpy as np
import pytest

from multirec import lattice as lt
from multirec.cli import main
from multirec.engine import (CoefficientSystem, c_product, check_compatibility, solve,
                             trajectory, transition)
from multirec.errors import RootExtractionUnsupported
from multirec.floquet import (commuting_roots, decompose_multi, decompose_periodic,
                              floquet_multipliers, lift, monodromy_multi, reduce,
                              reduced_solution, root_2x2_jordan)
from multirec.hicks import (HicksConstantParams, HicksPeriodicParams, determinant_identity,
                            hicks_matrix_constant, hicks_monodromy, hicks_multipliers,
                            hicks_solve, hicks_system, hicks_trajectory, power_closed_form)

from golden_cases import CASES, MODELS, argv_for, golden_path
from oracles import (iterated_power, perturb, random_commuting, random_monotone_path,
                     step_path, synth_case)


def rel(A, B):
    """Entrywise error of ``A`` against reference ``B``, scaled by ``max(1, |B|)``."""
    B = np.asarray(B)
    return float(np.max(np.abs(np.asarray(A) - B))) / max(1.0, float(np.max(np.abs(B))))


def pure_rel(A, B):
    B = np.asarray(B)
    return float(np.max(np.abs(np.asarray(A) - B))) / float(np.max(np.abs(B)))


@pytest.fixture(scope="module")
def corpus():
    """50 seeded compatible systems, m and n cycling through {2, 3}."""
    return [synth_case(seed, m=2 + seed % 2, n=2 + (seed // 2) % 2) for seed in range(50)]


# -- 1 ----------------------------------------------------------------------

def rotation_blocks(T2, n):
    c, s = np.cos(np.pi / T2), np.sin(np.pi / T2)
    Q = np.eye(n, dtype=complex)
    Q[:2, :2] = [[c, -s], [s, c]]
    S = np.eye(n, dtype=complex)
    S[1, 1] = -1
    return Q, S


@pytest.mark.acceptance(1, "rotation/reflection closed form and Floquet structure", "1e-10 / 1e-8")
@pytest.mark.parametrize("T2", [2, 3, 4])
@pytest.mark.parametrize("n", [2, 3])
def test_criterion_1(T2, n, record_property):
    Q, S = rotation_blocks(T2, n)
    table = {}
    for t2 in range(T2):
        table[(1, (0, t2))] = np.linalg.matrix_power(Q, 2 * t2) @ S
        table[(2, (0, t2))] = Q
    sys = CoefficientSystem.multi_periodic(table, (1, T2))
    assert check_compatibility(sys).ok

    worst = 0.0
    box = list(lt.box((0, 0), (2, 2 * T2)))
    for s in [(0, 0), (1, 1), (0, T2)]:
        Qinv_s = np.linalg.matrix_power(np.linalg.inv(Q), s[1])
        for t in box:
            if not lt.leq(s, t):
                continue
            closed = np.linalg.matrix_power(Q, t[1]) @ np.linalg.matrix_power(S, t[0] - s[0]) @ Qinv_s
            worst = max(worst, rel(transition(sys, t, s), closed))
    record_property("worst", worst)
    assert worst <= 1e-10

    dec = decompose_multi(sys)
    z = dec.B[1][0, 0]
    B2 = np.eye(n, dtype=complex)
    B2[:2, :2] *= z
    checks = [rel(dec.B[0], S), rel(dec.B[1], B2), abs(z ** T2 + 1), max(dec.residuals.values())]
    for t in box:
        P = np.eye(n, dtype=complex)
        P[:2, :2] = z ** (-t[1]) * np.linalg.matrix_power(Q[:2, :2], t[1])
        checks.append(rel(dec.P(t), P))
    record_property("worst", max(checks))
    assert max(checks) <= 1e-8


# -- 2 ----------------------------------------------------------------------

@pytest.mark.acceptance(2, "compatibility <=> path independence", "1e-9")
def test_criterion_2_paths(corpus, record_property):
    worst = 0.0
    for seed, (sys, _, _) in enumerate(corpus):
        rng = np.random.default_rng(1000 + seed)
        assert check_compatibility(sys).ok
        s = sys.t0
        t = tuple(x + int(rng.integers(1, 4)) for x in s)
        chi = transition(sys, t, s)
        for _ in range(5):
            M, end = step_path(sys, s, random_monotone_path(rng, s, t))
            assert end == t
            worst = max(worst, rel(M, chi))
    record_property("worst", worst)
    assert worst <= 1e-9


@pytest.mark.acceptance(2, "compatibility <=> path independence", "1e-9")
def test_criterion_2_perturbed(corpus):
    rng = np.random.default_rng(2)
    for sys, _, _ in corpus[:20]:
        rep = check_compatibility(perturb(sys, rng))
        assert not rep.ok and rep.violations


# -- 3 ----------------------------------------------------------------------

@pytest.mark.acceptance(3, "transition-matrix identities", "1e-9")
def test_criterion_3_identities(corpus, record_property):
    worst = 0.0
    for seed, (sys, _, _) in enumerate(corpus):
        rng = np.random.default_rng(3000 + seed)
        r = sys.t0
        s = tuple(x + int(rng.integers(0, 3)) for x in r)
        t = tuple(x + int(rng.integers(0, 3)) for x in s)
        chi_tr, chi_ts, chi_sr = transition(sys, t, r), transition(sys, t, s), transition(sys, s, r)
        worst = max(worst, rel(chi_ts @ chi_sr, chi_tr))                               # cocycle
        worst = max(worst, rel(chi_tr @ np.linalg.inv(chi_sr), chi_ts))                # inverse composition
        assert lt.is_invertible(chi_tr)                                                # invertible coefficients
        for a in range(1, sys.m + 1):
            k = int(rng.integers(0, 4))
            worst = max(worst, rel(c_product(sys, a, k, t) @ chi_tr, transition(sys, lt.step(t, a, k), r)))  # shift
            for b in range(1, sys.m + 1):
                p = int(rng.integers(0, 4))
                lhs = c_product(sys, a, k, lt.step(s, b, p)) @ c_product(sys, b, p, s)
                rhs = c_product(sys, b, p, lt.step(s, a, k)) @ c_product(sys, a, k, s)
                worst = max(worst, rel(lhs, rhs))                                      # C-commutation
    record_property("worst", worst)
    assert worst <= 1e-9


@pytest.mark.acceptance(3, "transition-matrix identities", "1e-9")
def test_criterion_3_invertibility_equivalence():
    # A_1 singular, A_2 invertible: chi(t, s) is invertible exactly when no axis-1 step is taken
    sys = CoefficientSystem.constant([np.diag([1.0, 0.0]), np.diag([2.0, 3.0])])
    for s in lt.box((0, 0), (2, 2)):
        for t in lt.box(s, (2, 2)):
            assert lt.is_invertible(transition(sys, t, s)) == (t[0] == s[0])


@pytest.mark.acceptance(3, "transition-matrix identities", "1e-9")
def test_criterion_3_constant_closed_form(record_property):
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        m, n = 2 + seed % 2, 2 + (seed // 2) % 3
        A = random_commuting(rng, m, n, lo=0.5, hi=1.5)
        t0 = tuple(int(x) for x in rng.integers(-3, 3, size=m))
        sys = CoefficientSystem.constant(A, t0)
        x0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        for t in lt.box(t0, (3,) * m):
            expected = iterated_power(A[0], t[0] - t0[0])
            for a in range(1, m):
                expected = expected @ iterated_power(A[a], t[a] - t0[a])
            worst = max(worst, rel(transition(sys, t, t0), expected))
            worst = max(worst, rel(solve(sys, x0, t), expected @ x0))
    record_property("worst", worst)
    assert worst <= 1e-9


# -- 4 ----------------------------------------------------------------------

@pytest.mark.acceptance(4, "multi-periodic Floquet contract and lift/reduce", "1e-8")
def test_criterion_4(corpus, record_property):
    worst = 0.0
    for seed, (sys, _, _) in enumerate(corpus):
        periods = sys.periods.periods
        dec = decompose_multi(sys, seed=seed)
        for a, T in enumerate(periods, 1):
            worst = max(worst, rel(lt.power(dec.B[a - 1], T), dec.monodromy.matrices[a]))
            for b in range(a + 1, sys.m + 1):
                worst = max(worst, rel(dec.B[a - 1] @ dec.B[b - 1], dec.B[b - 1] @ dec.B[a - 1]))
        extent = tuple(2 * p for p in periods)
        Phi = {t: transition(sys, t, sys.t0) for t in lt.box(sys.t0, extent)}
        for t, F in Phi.items():
            worst = max(worst, rel(dec.P(t) @ dec.exponential(t), F))
            for a, T in enumerate(periods, 1):
                u = lt.step(t, a, T)
                if u in Phi:
                    worst = max(worst, rel(dec.P(t) @ dec.exponential(u), Phi[u]))
        v = np.random.default_rng(seed).normal(size=sys.n)
        x = lift(dec, reduced_solution(dec, v, extent))
        back = lift(dec, reduce(dec, x))
        for t in x:
            worst = max(worst, rel(back[t], x[t]))
            worst = max(worst, rel(x[t], transition(sys, t, sys.t0) @ v))
    record_property("worst", worst)
    assert worst <= 1e-8


# -- 5 ----------------------------------------------------------------------

@pytest.mark.acceptance(5, "commuting root extraction", "1e-8")
def test_criterion_5_diagonalizable(record_property):
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        ks = [int(k) for k in rng.integers(1, 6, size=m)]
        Ps = random_commuting(rng, m, n, lo=0.2, hi=4.0)
        Qs = commuting_roots(Ps, ks, seed=seed)
        for P, Q, k in zip(Ps, Qs, ks):
            worst = max(worst, rel(iterated_power(Q, k), P))
        for i in range(m):
            for j in range(i):
                worst = max(worst, rel(Qs[i] @ Qs[j], Qs[j] @ Qs[i]))
    record_property("worst", worst)
    assert worst <= 1e-8


@pytest.mark.acceptance(5, "commuting root extraction", "1e-8")
def test_criterion_5_defective_2x2(record_property):
    worst = 0.0
    lambdas = [1, 2, -1, 0.5j, -3 + 1j, 0.25, -0.7 - 0.1j, 4j]
    for seed, lam in enumerate(lambdas):
        rng = np.random.default_rng(seed)
        V = np.eye(2) + 0.4 * rng.normal(size=(2, 2))
        N = V @ np.array([[0, 1.0 + rng.uniform()], [0, 0]]) @ np.linalg.inv(V)
        P = lam * np.eye(2) + N
        P2 = (1.5 - lam) * np.eye(2) + 0.3 * N   # commutes with P, also defective
        for k in range(1, 6):
            Q = root_2x2_jordan(P, k)
            worst = max(worst, rel(iterated_power(Q, k), P))
            Q1, Q2 = commuting_roots([P, P2], [k, 6 - k])
            worst = max(worst, rel(iterated_power(Q1, k), P), rel(iterated_power(Q2, 6 - k), P2),
                        rel(Q1 @ Q2, Q2 @ Q1))
    record_property("worst", worst)
    assert worst <= 1e-8


@pytest.mark.acceptance(5, "commuting root extraction", "1e-8")
def test_criterion_5_defective_n3(tmp_path):
    J = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    with pytest.raises(RootExtractionUnsupported):
        commuting_roots([J], [2])
    assert main(["floquet", "--input", str(MODELS / "jordan3.json"), "--output", str(tmp_path / "o")]) == 3


# -- 6 ----------------------------------------------------------------------

@pytest.mark.acceptance(6, "constant Hicks closed-form powers", "1e-9 relative")
def test_criterion_6(record_property):
    cases = [(1.0, 1.0)]
    rng = np.random.default_rng(6)
    while len(cases) < 100:
        gamma = rng.uniform(0.1, 1.5) * cmath.exp(1j * rng.uniform(-1, 1) * (len(cases) % 3 > 0))
        alpha = rng.uniform(0.1, 3.0) * cmath.exp(1j * rng.uniform(-1, 1) * (len(cases) % 2))
        cases.append((gamma, alpha))
    worst = 0.0
    for gamma, alpha in cases:
        p = HicksConstantParams(gamma, alpha)
        A = hicks_matrix_constant(p)
        for k in range(21):
            worst = max(worst, pure_rel(power_closed_form(A, k), iterated_power(A, k)))
        x0 = np.array([1.0, 0.3])
        stepped = trajectory(CoefficientSystem.constant([A, A]), x0, (3, 3))
        closed = hicks_trajectory(p, x0, (3, 3))
        for (t, x), (u, state) in zip(stepped, closed):
            assert t == u
            worst = max(worst, pure_rel(state.as_vector(), x))
    record_property("worst", worst)
    assert worst <= 1e-9


# -- 7 ----------------------------------------------------------------------

def random_hicks(rng, T):
    while True:
        f = rng.uniform(0.2, 1.5, T + 1) * rng.choice([-1, 1], T + 1)
        g = rng.uniform(0.2, 2.5, T) * rng.choice([-1, 1], T)
        if all(min(abs(a + b), abs(a + b - 1)) > 1e-6 for a, b in zip(f[1:], g)):
            return HicksPeriodicParams(f[0], tuple(f[1:]), tuple(g))


@pytest.mark.acceptance(7, "periodic Hicks model", "1e-12 / 1e-10 / 1e-9")
@pytest.mark.parametrize("T", [1, 2, 3, 5])
def test_criterion_7(T, record_property):
    worst_det = worst_mult = worst_collapse = 0.0
    for seed in range(10):
        rng = np.random.default_rng(100 * T + seed)
        p = random_hicks(rng, T)
        for m in (2, 3):
            rep = check_compatibility(hicks_system(p, m), box=(T,) * m)
            assert rep.ok and rep.max_residual <= 1e-12
        sys = hicks_system(p, 2)
        x0 = rng.normal(size=2)
        for t in lt.box((0, 0), (4, 4)):
            worst_collapse = max(worst_collapse, rel(solve(sys, x0, t), hicks_solve(p, x0, t).as_vector()))
        mult = hicks_multipliers(p)
        worst_det = max(worst_det, abs(mult.lambda1 * mult.lambda2 - determinant_identity(p)) / abs(determinant_identity(p)),
                        mult.det_identity_residual)
        e1, e2 = np.linalg.eigvals(hicks_monodromy(p))
        err = min(max(abs(mult.lambda1 - e1), abs(mult.lambda2 - e2)),
                  max(abs(mult.lambda1 - e2), abs(mult.lambda2 - e1)))
        worst_mult = max(worst_mult, err / max(1.0, abs(e1), abs(e2)))
    record_property("worst", max(worst_det, worst_mult))
    assert worst_collapse <= 1e-10
    assert worst_det <= 1e-9
    assert worst_mult <= 1e-9


@pytest.mark.acceptance(7, "periodic Hicks model", "1e-12 / 1e-10 / 1e-9")
def test_criterion_7_constant_roots(record_property):
    worst = 0.0
    rng = np.random.default_rng(7)
    for _ in range(30):
        gamma, alpha = rng.uniform(0.1, 1.5), rng.uniform(0.1, 3.0)
        disc = cmath.sqrt((gamma + alpha) ** 2 - 4 * alpha)
        roots = [(gamma + alpha + disc) / 2, (gamma + alpha - disc) / 2]
        lam = floquet_multipliers(hicks_monodromy(HicksPeriodicParams.from_constant(gamma, alpha)))
        err = min(max(abs(lam[0] - roots[0]), abs(lam[1] - roots[1])),
                  max(abs(lam[0] - roots[1]), abs(lam[1] - roots[0])))
        worst = max(worst, err / max(1.0, *map(abs, roots)))
    record_property("worst", worst)
    assert worst <= 1e-13


# -- 8 ----------------------------------------------------------------------

def check_periodic_decomposition(sys, T, seed=0):
    dec = decompose_periodic(sys, T, seed=seed)
    B = dec.B[0]
    worst = 0.0
    extent = tuple(2 * max(p, 1) for p in T)
    Phi = {t: transition(sys, t, sys.t0) for t in lt.box(sys.t0, extent)}
    for t, F in Phi.items():
        worst = max(worst, rel(dec.P(t) @ lt.power(B, lt.total(t)), F))
        # periodic P: the value at t must also factor Phi one period later
        u = lt.add(t, T)
        if u in Phi:
            worst = max(worst, rel(dec.P(t) @ lt.power(B, lt.total(u)), Phi[u]))
    C = dec.monodromy.single
    for p in range(5):
        shifted = lt.add(sys.t0, tuple(p * x for x in T))
        worst = max(worst, rel(transition(sys, shifted, sys.t0), iterated_power(C, p)))
    return worst


@pytest.mark.acceptance(8, "single-period Floquet factorization", "1e-8")
def test_criterion_8_synthesized(corpus, record_property):
    worst = max(check_periodic_decomposition(sys, sys.periods.periods, seed)
                for seed, (sys, _, _) in enumerate(corpus[:25]))
    record_property("worst", worst)
    assert worst <= 1e-8


@pytest.mark.acceptance(8, "single-period Floquet factorization", "1e-8")
@pytest.mark.parametrize("T", [1, 2, 3, 5])
def test_criterion_8_hicks(T, record_property):
    p0 = random_hicks(np.random.default_rng(800 + T), T)
    p = HicksPeriodicParams.periodic_extension(p0.f, p0.g)
    worst = 0.0
    for m in (1, 2, 3):
        sys = hicks_system(p, m)
        worst = max(worst, check_periodic_decomposition(sys, (T,) + (0,) * (m - 1)))
    record_property("worst", worst)
    assert worst <= 1e-8


# -- 9 ----------------------------------------------------------------------

@pytest.mark.acceptance(9, "CLI golden-file determinism", "byte equality")
@pytest.mark.parametrize("name", sorted(CASES))
def test_criterion_9(name, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(argv_for(name, first, seed=0)) == 0
    assert main(argv_for(name, second, seed=0)) == 0
    assert first.read_bytes() == second.read_bytes() == golden_path(name).read_bytes()
