import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from freegrass import linalg
from freegrass.algebra import BaseAlgebra, MatOverB
from freegrass.ncpoly import (DegreeCapExceeded, NCPoly, NCTensor, antisymmetrize, build_pathological,
                              first_words, leibniz_rhs, partial_sum, random_ball_point)
from conftest import algebras, levels, seeds

M2, C2 = BaseAlgebra.parse("m2"), BaseAlgebra.parse("c2")


def z(alg, j):
    return NCPoly.generator(alg, j)


def int_poly(alg, seed, degree=5):
    return NCPoly.random(alg, np.random.default_rng(seed), degree, n_terms=6, integer=True)


def test_arithmetic_examples():
    one = NCPoly.constant(C2)
    p = int_poly(C2, 1)
    assert one * p == p
    assert z(C2, 0) * z(C2, 1) != z(C2, 1) * z(C2, 0)
    sq = (z(C2, 0) + z(C2, 1)) ** 2
    assert sq.terms == {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}


def test_algebra_mismatch():
    with pytest.raises(ValueError):
        z(C2, 0) + z(M2, 0)


def test_degree_cap():
    with pytest.raises(DegreeCapExceeded):
        z(C2, 0) ** 13


def test_evaluate_generator_on_simple_tensor():
    rng = np.random.default_rng(0)
    a, b = linalg.ginibre(3, rng), M2.random_element(rng)
    beta = MatOverB.kron(M2, a, b)
    for j, phi in enumerate(M2.dual_basis()):
        assert np.allclose(z(M2, j).evaluate(beta), phi(b) * a, atol=1e-14)


def test_evaluate_commutative_words():
    alg = BaseAlgebra.parse("c3")
    beta = MatOverB.random(alg, 3, np.random.default_rng(1))
    b = beta.coords()
    word = z(alg, 2) * z(alg, 0) * z(alg, 2)
    assert np.allclose(word.evaluate(beta), b[2] @ b[0] @ b[2], atol=1e-14)
    assert np.array_equal(NCPoly.constant(alg).evaluate(beta), np.eye(3))


def test_derivative_examples(algebra):
    theta = NCPoly.linear(algebra, algebra.theta_coords())
    one = NCPoly.constant(algebra)
    assert theta.derivative().allclose(NCTensor.simple(one, one))
    assert (theta * theta).derivative().allclose(NCTensor.simple(one, theta) + NCTensor.simple(theta, one))
    assert one.derivative().terms == {}


def test_derivative_kills_unit_annihilating_generators():
    off = [j for j, (p, q) in enumerate(M2.index_pairs()) if p != q]
    p = z(M2, off[0]) * z(M2, off[1]) + 3 * z(M2, off[1]) ** 3
    assert p.derivative().terms == {}


def test_lambda_examples(algebra):
    assert NCPoly.constant(algebra).coderivation_lambda() == NCPoly.constant(algebra)
    assert z(algebra, 0).coderivation_lambda() == 2 * z(algebra, 0)
    w = z(algebra, 0) * z(algebra, algebra.dim - 1) * z(algebra, 0)
    assert w.coderivation_lambda() == 4 * w


def test_star_examples():
    for j, (p, q) in enumerate(M2.index_pairs()):
        assert z(M2, j).star() == z(M2, M2.index_pairs().index((q, p)))
    real = NCPoly(C2, {(0, 1, 1): 2.0, (1,): -1.0})
    assert real.star() == NCPoly(C2, {(1, 1, 0): 2.0, (1,): -1.0})


@given(algebras, levels, seeds)
def test_star_matches_adjoint(alg, n, seed):
    rng = np.random.default_rng(seed)
    p = NCPoly.random(alg, rng, 4)
    beta = MatOverB.random(alg, n, rng)
    assert np.allclose(p.star().evaluate(beta), p.evaluate(beta.adjoint()).conj().T, atol=1e-11)
    assert p.star().star() == p


@given(algebras, seeds)
def test_coassociativity(alg, seed):
    d = int_poly(alg, seed).derivative()
    assert d.derive_slot(0) == d.derive_slot(1)


@given(algebras, seeds, seeds)
def test_leibniz(alg, s1, s2):
    p, q = int_poly(alg, s1), int_poly(alg, s2)
    assert (p * q).derivative() == leibniz_rhs(p, q)


@given(algebras, seeds)
def test_lambda_is_coderivation(alg, seed):
    p = int_poly(alg, seed)
    d = p.derivative()
    assert p.coderivation_lambda().derivative() == d.lambda_slot(0) + d.lambda_slot(1)


@given(algebras, seeds)
def test_involution_compatibility(alg, seed):
    p = int_poly(alg, seed)
    assert p.star().derivative() == p.derivative().star().flip()
    assert p.star().coderivation_lambda() == p.coderivation_lambda().star()


@given(algebras, levels, seeds)
def test_evaluation_is_homomorphism(alg, n, seed):
    rng = np.random.default_rng(seed)
    p, q = NCPoly.random(alg, rng, 3), NCPoly.random(alg, rng, 3)
    beta = MatOverB.random(alg, n, rng, norm=0.9)
    lhs = (p * q).evaluate(beta)
    assert np.max(np.abs(lhs - p.evaluate(beta) @ q.evaluate(beta))) <= 1e-11 * max(1, np.max(np.abs(lhs)))


@given(algebras, levels, levels, seeds)
def test_fully_matricial_laws(alg, m, n, seed):
    rng = np.random.default_rng(seed)
    p = NCPoly.random(alg, rng, 4)
    b1, b2 = MatOverB.random(alg, m, rng, norm=0.9), MatOverB.random(alg, n, rng, norm=0.9)
    joint = p.evaluate(b1.direct_sum(b2))
    assert np.allclose(joint, linalg.direct_sum(p.evaluate(b1), p.evaluate(b2)), rtol=1e-12, atol=1e-12)
    s = linalg.ginibre(m, rng) + 3 * np.eye(m)
    si = linalg.inverse(s)
    lhs = p.evaluate(b1.conjugate_by(s))
    assert np.max(np.abs(lhs - s @ p.evaluate(b1) @ si)) <= 1e-10 * max(1, np.max(np.abs(lhs)))


def test_json_roundtrip():
    p = NCPoly.random(M2, np.random.default_rng(5), 4)
    text = json.dumps(p.to_json())
    assert NCPoly.from_json(text) == p
    assert json.loads(text)["algebra"] == {"kind": "full", "k": 2}


def test_antisymmetrize_examples():
    g = antisymmetrize(C2, [(0,), (1,)])
    assert g == z(C2, 0) * z(C2, 1) - z(C2, 1) * z(C2, 0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert np.max(np.abs(g.evaluate(MatOverB.random(C2, 1, rng)))) == 0.0
    assert np.max(np.abs(g.evaluate(MatOverB.random(C2, 2, rng)))) > 1e-3
    with pytest.raises(ValueError):
        antisymmetrize(C2, [(0,), (0,)])


@pytest.mark.parametrize("spec", ["c2", "m2", "c3"])
def test_antisymmetrization_vanishes_below_level(spec):
    alg = BaseAlgebra.parse(spec)
    rng = np.random.default_rng(9)
    for p in (2, 5):
        g = antisymmetrize(alg, first_words(alg.dim, p))
        for k in range(1, 4):
            if k * k < p:
                for _ in range(20):
                    beta = random_ball_point(alg, k, rng, 1.0)
                    assert np.max(np.abs(g.evaluate(beta))) <= 1e-12


def test_build_pathological():
    levels = build_pathological(C2, 2, np.random.default_rng(3))
    assert [lv.vanishing_up_to for lv in levels] == [1, levels[0].witness_level]
    assert levels[0].p == 2 and levels[1].p == levels[0].witness_level ** 2 + 1
    for j, lv in enumerate(levels, start=1):
        assert lv.witness_norm > j
        assert lv.witness_radius == pytest.approx(1 / j)
    total = partial_sum(levels, C2)
    assert total.degree == max(lv.poly.degree for lv in levels)


@given(st.integers(min_value=2, max_value=9), st.integers(min_value=1, max_value=30))
def test_first_words(dim, count):
    words = first_words(dim, count)
    assert len(words) == count == len(set(words))
    assert len({len(w) for w in words}) == 1
