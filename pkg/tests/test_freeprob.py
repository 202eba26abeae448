import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freegrass.algebra import BaseAlgebra, MatOverB
from freegrass.calculus import MatricialFn
from freegrass.freeprob import (ExpectationSetup, McConfig, MomentSeries, OutOfDomain, catalan_moments, cauchy_G,
                                exact_limit, free_cumulants, free_moment_oracle, free_sum_moments, g_jacobian_defect,
                                haar_moment_estimate, invert_L, jacobi_semicircle, mc_tolerance, orthogonality_gram,
                                r_transform, r_transform_series, recover_coefficients_mc, vector_state_setup)
from freegrass.ncpoly import NCPoly
from freegrass.suites import rtransform_suite

C, C2, M2 = (BaseAlgebra.parse(s) for s in ("c", "c2", "m2"))
E11 = M2.index_pairs().index((0, 0))


def unit(i, j, k=2):
    e = np.zeros((k, k), dtype=complex)
    e[i, j] = 1
    return e


def test_moment_oracle_examples():
    rng = np.random.default_rng(0)
    a, b, c = (M2.random_element(rng) for _ in range(3))
    tr = lambda x: np.trace(x) / 2
    assert free_moment_oracle([a], c, [b]) == pytest.approx(tr(a @ b) * tr(c))
    assert free_moment_oracle([a, a], c, [b]) == 0
    one = np.eye(2)
    for m in range(3):
        for n in range(3):
            assert free_moment_oracle([one] * m, one, [one] * n) == (1 if m == n else 0)


def test_exact_limits():
    assert exact_limit(M2, (E11,), (E11,)) == pytest.approx(0.5)
    assert exact_limit(C2, (0,), (1,)) == 0
    assert exact_limit(M2, (E11,), ()) == 0
    assert exact_limit(M2, (E11, 1), (E11, 1)) == pytest.approx(0.25)
    assert exact_limit(C2, (0, 1), (0, 1)) == 1


def test_ladder_validation():
    with pytest.raises(ValueError):
        McConfig(C2, [20, 10], 5)
    with pytest.raises(ValueError):
        McConfig(C2, [10], 0)


def test_haar_estimates_near_limits():
    cfg = McConfig(M2, [10, 40], 30, seed=1)
    for w1, w2 in (((E11,), (E11,)), ((E11,), ())):
        rows = haar_moment_estimate(cfg, w1, w2)
        last = rows[-1]
        assert abs(last["estimate"] - last["exact_limit"]) <= mc_tolerance(last["stderr"], last["N"])


def test_orthogonality_is_independent_of_thread_count():
    a = orthogonality_gram(McConfig(C2, [6, 12], 8, seed=3, threads=1), 2)
    b = orthogonality_gram(McConfig(C2, [6, 12], 8, seed=3, threads=4), 2)
    for x, y in zip(a, b):
        assert np.array_equal(x.mean, y.mean) and np.array_equal(x.stderr, y.stderr)


def test_constant_term_is_exact_at_every_N():
    f = NCPoly.constant(M2) + NCPoly.generator(M2, 1)
    for est in recover_coefficients_mc(f, McConfig(M2, [2, 5], 4), 1):
        assert abs(complex(est.mean[0]) - 1) <= 1e-12


def test_recover_single_generator():
    est = recover_coefficients_mc(NCPoly.generator(M2, E11), McConfig(M2, [40], 20, seed=2), 1)[-1]
    target = np.zeros(4)
    target[E11] = 1
    assert np.all(np.abs(est.mean[1] - target) <= 3 * est.stderr[1] + 1 / 40)


def test_recover_word_over_diagonal_algebra():
    f = NCPoly.generator(C2, 0) * NCPoly.generator(C2, 1)
    est = recover_coefficients_mc(f, McConfig(C2, [60], 20, seed=4), 2)[-1]
    assert abs(est.mean[2][0, 1] - 1) <= 3 * est.stderr[2][0, 1] + 1 / 60
    assert abs(est.mean[2][1, 0]) <= 3 * est.stderr[2][1, 0] + 1 / 60


def test_radial_evaluation_for_general_functions():
    # the geometric series is only defined inside the unit ball
    f = MatricialFn(C, lambda b: np.linalg.inv(np.eye(b.n) - 0.5 * b.coords()[0]), radius=1.0)
    est = recover_coefficients_mc(f, McConfig(C, [30], 10), 2)[-1]
    # higher degrees alias into a_0 through the finite rotation average; their Haar mean is zero
    assert abs(complex(est.mean[0]) - 1) <= 3 * float(est.stderr[0]) + 1e-12
    assert abs(est.mean[1][0] - 0.5) <= 3 * est.stderr[1][0] + 0.01


def test_cauchy_examples():
    scalar = ExpectationSetup(C, 1, np.array([[2.0]]))
    assert cauchy_G(scalar, 0.1)[0, 0] == pytest.approx(0.125)
    assert np.all(cauchy_G(scalar, 0.0) == 0)
    with pytest.raises(OutOfDomain):
        cauchy_G(scalar, 0.6)
    rng = np.random.default_rng(5)
    setup = ExpectationSetup(M2, 4, rng.normal(size=(4, 4)))
    h = 1e-6
    for e in M2.basis():
        fd = (cauchy_G(setup, h * e) - cauchy_G(setup, -h * e)) / (2 * h)
        assert np.allclose(fd, e, atol=1e-8)


def test_expectation_checks_reject_non_states():
    with pytest.raises(ValueError):
        ExpectationSetup(M2, 4, np.eye(4), state=2 * np.eye(2))


def test_inverse_roundtrip():
    rng = np.random.default_rng(6)
    setup = ExpectationSetup(C2, 4, rng.normal(size=(4, 4)) / 2)
    b = MatOverB.random(C2, 2, rng, norm=0.05).dense()
    assert np.max(np.abs(invert_L(setup, cauchy_G(setup, b)) - b)) <= 1e-10
    assert np.all(invert_L(setup, np.zeros((4, 4))) == 0)
    with pytest.raises(OutOfDomain):
        invert_L(setup, 10 * np.eye(4))


def series_inverse(g: np.ndarray, order: int) -> np.ndarray:
    """Compositional inverse of g(x) = x + ..., by fixed-point iteration on truncated coefficients."""
    lin = np.zeros(order + 1)
    lin[1] = 1
    inv = lin.copy()
    for _ in range(order + 1):
        acc, power = np.zeros(order + 1), np.zeros(order + 1)
        power[0] = 1
        for j in range(1, len(g)):
            power = np.convolve(power, inv)[: order + 1]
            if j >= 2:
                acc += g[j] * power
        inv = lin - acc
    return inv


def test_inverse_matches_series_reversion():
    m = catalan_moments(12)
    setup = MomentSeries(m)
    g = np.concatenate([[0], m])  # G(x) = sum m_j x^{j+1}
    inv = series_inverse(g[:14], 13)
    for b in (0.05, -0.03, 0.04j):
        expected = np.polyval(inv[::-1], b)
        assert abs(complex(invert_L(setup, b)[0, 0]) - expected) <= 1e-8


def test_semicircle_and_point_mass():
    semi = vector_state_setup(jacobi_semicircle(40))
    assert abs(complex(r_transform(semi, 0.05)[0, 0]) - 0.05) <= 1e-6
    for lam in (0.7, -2.0):
        setup = ExpectationSetup(C2, 4, lam * np.eye(4))
        b = MatOverB.random(C2, 1, np.random.default_rng(7), norm=0.05).dense()
        assert np.allclose(r_transform(setup, b), lam * np.eye(2), atol=1e-9)


def test_jacobian_defect_shrinks():
    rng = np.random.default_rng(8)
    setup = ExpectationSetup(M2, 4, rng.normal(size=(4, 4)) / 3)
    direction = MatOverB.random(M2, 1, rng, norm=1.0).dense()
    defects = [g_jacobian_defect(setup, r * direction) for r in (0.1, 0.03, 0.01, 0.0)]
    assert all(a > b for a, b in zip(defects, defects[1:]))
    assert defects[-1] <= 1e-12


def test_cumulant_oracles():
    kappa = free_cumulants(catalan_moments(10))
    assert np.allclose(kappa[1:], [0, 1] + [0] * 8, atol=1e-12)
    ms = free_sum_moments(catalan_moments(6), catalan_moments(6), 6)
    assert np.allclose(ms, [2 ** (j / 2) * c for j, c in enumerate(catalan_moments(6))], atol=1e-10)
    point = free_sum_moments([1, 2, 4, 8], [1, 0, 1, 0], 3)
    # shift of a symmetric Bernoulli by the scalar 2
    assert np.allclose(point, [1, 2, 5, 14], atol=1e-12)


@settings(max_examples=8)
@given(st.integers(0, 2**16))
def test_additivity_for_random_free_pairs(seed):
    rep = rtransform_suite(seed=seed, pairs=1, degree=4)
    assert rep.checks["free-additivity"].passed


def test_matrix_level_reproduces_scalar_case():
    m = 6
    rho = np.zeros((m, m))
    rho[0, 0] = 1
    setup = ExpectationSetup(M2, 2 * m, np.kron(np.eye(2), jacobi_semicircle(m)), state=rho)
    fams = r_transform_series(setup, 3)
    beta = MatOverB.random(M2, 1, np.random.default_rng(9), norm=0.1)
    value = MatOverB.from_coords(M2, [f.to_poly().evaluate(beta) for f in fams]).dense()
    # semicircle cumulants: R(b) = b
    assert np.allclose(value, beta.dense(), atol=1e-9)
    assert np.allclose(r_transform(setup, 0.05 * np.eye(2)), 0.05 * np.eye(2), atol=1e-9)
