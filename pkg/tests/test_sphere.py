import numpy as np
import pytest

from freegrass.sphere import (Circle, PoleOnContour, Rational, UnsupportedKind, family_residuals, geometric_decay,
                              pairing, random_germ, random_outer, rational_family, scalar_diff_quotient, scalar_L,
                              scalar_Lambda, verify_duality_relations)

ZETA, W = 1.7 + 0.4j, 0.3 - 0.2j


def monomial(n):
    return Rational.polynomial([0] * n + [1])


def inverse_power(m):
    return Rational((), {0.0: (0,) * m + (1,)})


@pytest.mark.parametrize("n", range(4))
@pytest.mark.parametrize("m", range(4))
def test_monomial_pairing(n, m):
    assert pairing(monomial(n), inverse_power(m), points=64) == pytest.approx(float(n == m), abs=1e-14)


def test_cauchy_integral_of_one():
    assert pairing(Rational.polynomial([1]), Rational.outer_kernel(W)) == pytest.approx(1, abs=1e-14)


def test_resolvent_pairing():
    got = pairing(Rational.inner_resolvent(ZETA), Rational.outer_kernel(W))
    assert got == pytest.approx(1 / (ZETA - W), abs=1e-13)


def test_difference_quotient_of_square():
    dq = scalar_diff_quotient(monomial(2))
    assert dq(0.3, -1.2) == pytest.approx(0.3 - 1.2)
    assert dq(0.5, 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("n", range(5))
def test_L_on_monomials(n):
    got = scalar_L(monomial(n))
    z = np.array([0.3, -1.1 + 0.5j])
    assert np.allclose(got(z), (n + 1) * z**n)


def test_Lambda_against_finite_difference():
    g = Rational.outer_kernel(W)
    lam = scalar_Lambda(g)
    h = 1e-5
    zg = lambda z: z * g(z)
    for z in (1.5, 2.0 - 1j, -0.4 + 1.3j):
        fd = (zg(z + h) - zg(z - h)) / (2 * h)
        assert abs(lam(z) - fd) <= 1e-9
        assert lam(z) == pytest.approx(-W / (z - W) ** 2, abs=1e-12)


def test_unsupported_kind():
    with pytest.raises(UnsupportedKind):
        scalar_L(monomial(1) * monomial(1))


def test_coproduct_relation_on_resolvent():
    f, g = Rational.inner_resolvent(ZETA), Rational.outer_kernel(W)
    res = verify_duality_relations(f, f, f, g, g, g)
    assert res.coproduct <= 1e-9
    assert pairing(f, g * g) == pytest.approx(g(ZETA) ** 2, abs=1e-12)


def test_product_relation_on_linear_germs():
    z, g = monomial(1), Rational.outer_kernel(W)
    res = verify_duality_relations(z, z, z, g, g, g)
    assert res.product <= 1e-9
    assert pairing(z * z, g) == pytest.approx(W**2, abs=1e-13)


def test_lambda_relation_on_constant():
    res = verify_duality_relations(Rational.polynomial([1]), monomial(1), monomial(1), Rational.outer_kernel(W),
                                   Rational.outer_kernel(W), Rational.outer_kernel(W))
    assert res.lambda_relation <= 1e-10


def test_random_family_at_512_points():
    assert max(r.worst() for r in family_residuals(512, seed=3)) <= 1e-8


def test_quadrature_converges_geometrically():
    ladder = [16, 32, 64, 128, 256]
    worst = [max(r.worst() for r in family_residuals(n, seed=1, cases=4)) for n in ladder]
    assert geometric_decay(worst, factor=0.5)
    assert worst[-1] <= 1e-10


def test_contour_independence():
    rng = np.random.default_rng(2)
    f, g = random_germ(rng), random_outer(rng)
    values = [pairing(f, g, Circle(0, r)) for r in (0.9, 1.0, 1.1)]
    assert max(abs(v - values[1]) for v in values) <= 1e-9


def test_involution_compatibility():
    for f, _, _, g, _, _ in rational_family(seed=4, cases=5):
        # the unit circle is conjugation symmetric, so it serves both sides
        assert abs(pairing(f.star(), g.star()) - np.conj(pairing(f, g))) <= 1e-10


def test_pole_on_contour():
    with pytest.raises(PoleOnContour):
        pairing(Rational.polynomial([1]), Rational.outer_kernel(1.0))
    with pytest.raises(ValueError):
        pairing(Rational.inner_resolvent(0.5), Rational.outer_kernel(W))
