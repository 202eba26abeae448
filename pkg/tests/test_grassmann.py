import numpy as np
import pytest
from hypothesis import given

from freegrass import linalg
from freegrass.algebra import BaseAlgebra, Embedding, MatOverB
from freegrass.grassmann import (CAYLEY, FLIP, GrassPoint, NotInResolventSet, delta_point, e_tensor,
                                 grass_diff_quotient, in_disk, in_resolvent_set, probe_point, resolvent,
                                 resolvent_closed_form, resolvent_star_identity, transversal, unitary_identities)
from freegrass.suites import (grassmann_identities_suite, hermitian_graph, random_e_point, random_grass_point,
                              resolvent_suite, sample_resolvent_instance)
from conftest import seeds

C, C2, M2 = (BaseAlgebra.parse(s) for s in ("c", "c2", "m2"))


def affine(x, alg=C, chart="graph"):
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    return GrassPoint.from_affine(MatOverB.from_dense(alg, x), chart=chart)


def test_affine_point_is_equivalent_to_itself():
    zero = MatOverB.zeros(M2, 2)
    assert GrassPoint.from_affine(zero).equivalent(GrassPoint.from_affine(zero))
    assert not affine(0.0).equivalent(affine(1.0))


def test_charts_differ_but_are_both_valid():
    rng = np.random.default_rng(0)
    beta = MatOverB.random(C2, 2, rng)
    up = GrassPoint.from_affine(beta, chart="upper")
    _, b, _, d = up.blocks()
    assert np.allclose(b, beta.dense()) and np.allclose(d, np.eye(4))
    with pytest.raises(ValueError):
        GrassPoint.from_affine(beta, chart="lower")


def test_fold_of_graph():
    y = np.array([[1.0, 2.0], [0.5, -1.0]])
    folded = GrassPoint.graph_of(y).fold(3)
    eye = np.eye(3)
    expected = linalg.block([[np.zeros((6, 6)), np.kron(eye, np.eye(2))], [np.kron(eye, np.eye(2)), np.kron(eye, y)]])
    assert np.array_equal(folded.rep, expected)
    assert folded.level == 3


@given(seeds)
def test_equivalence_under_column_change(seed):
    rng = np.random.default_rng(seed)
    p = random_grass_point(M2, 2, rng)
    t = linalg.ginibre(4, rng) + 3 * np.eye(4)
    assert p.with_column_scaled(t).equivalent(p)


def test_group_action_laws():
    rng = np.random.default_rng(1)
    p = random_grass_point(C2, 2, rng)
    assert p.gl2_action(np.eye(2)).equivalent(p)
    g = linalg.ginibre(4, rng)
    assert p.gl2_action(g).gl2_action(linalg.inverse(g)).equivalent(p)


def test_permutation_fixes_equal_summands():
    rng = np.random.default_rng(2)
    p = random_grass_point(C2, 1, rng)
    swap = np.array([[0, 1], [1, 0]])
    both = p.direct_sum(p)
    assert both.scalar_action(swap).equivalent(both)


def test_transversality_examples():
    rng = np.random.default_rng(3)
    infinity = GrassPoint(np.eye(4), 1, 2, C2)
    for _ in range(5):
        beta = MatOverB.random(C2, 1, rng, norm=5.0)
        assert transversal(GrassPoint.from_affine(beta), infinity)
    p = random_grass_point(C2, 1, rng)
    assert not transversal(p, p)


@given(seeds)
def test_transversality_invariance(seed):
    rng = np.random.default_rng(seed)
    a, b = random_grass_point(M2, 1, rng), random_grass_point(M2, 1, rng)
    g = linalg.ginibre(4, rng)
    assert transversal(a, b) == transversal(a.gl2_action(g), b.gl2_action(g))


def test_graph_resolvent_example():
    pi = GrassPoint.graph_of(np.zeros((1, 1)))
    assert resolvent(pi, affine(2.0))[0, 0] == pytest.approx(0.5)


def test_graph_resolvent_matches_inverse():
    rng = np.random.default_rng(4)
    y = linalg.ginibre(3, rng)
    beta = MatOverB.random(C, 2, rng)
    emb = Embedding(C, 3)
    got = resolvent(GrassPoint.graph_of(y), GrassPoint.from_affine(beta), emb)
    want = linalg.inverse(np.kron(beta.dense(), np.eye(3)) - np.kron(np.eye(2), y))
    assert np.allclose(got, want, atol=1e-12)


def test_resolvent_outside_set():
    pi = GrassPoint.graph_of(np.ones((1, 1)))
    with pytest.raises(NotInResolventSet):
        resolvent(pi, affine(1.0))
    assert not in_resolvent_set(pi, affine(1.0))


@given(seeds)
def test_representative_independence_and_closed_form(seed):
    rng = np.random.default_rng(seed)
    pi, sigma, emb = sample_resolvent_instance(M2, 4, 2, rng)
    r = resolvent(pi, sigma, emb)
    t = linalg.ginibre(4, rng) + 3 * np.eye(4)
    scale = max(1, np.max(np.abs(r)))
    assert np.max(np.abs(r - resolvent(pi, sigma.with_column_scaled(t), emb))) <= 1e-10 * scale
    assert np.max(np.abs(r - resolvent_closed_form(pi, sigma, emb))) <= 1e-10 * scale


def test_star_of_graph():
    d = np.array([[1.0 + 1j, 2.0], [0.0, -1.0j]])
    expected = linalg.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), d.conj().T]])
    assert GrassPoint.graph_of(d).star().equivalent(GrassPoint.over_e(expected))


@given(seeds)
def test_involutions(seed):
    rng = np.random.default_rng(seed)
    p = random_e_point(3, rng)
    assert p.star().star().equivalent(p)
    assert p.orthogonal().orthogonal().equivalent(p)
    q = random_grass_point(C2, 2, rng)
    s = linalg.ginibre(2, rng) + 2 * np.eye(2)
    assert q.scalar_action(s).star().equivalent(q.star().scalar_action(linalg.inverse(s.conj().T)))


def test_disk_examples():
    assert in_disk(GrassPoint.from_affine(MatOverB.identity(M2, 2) * 0.5), "D0")
    assert not in_disk(GrassPoint.from_affine(MatOverB.identity(M2, 2) * 1.5), "D0")
    assert in_disk(GrassPoint.from_affine(MatOverB.identity(C2, 2) * 1j), "H+")
    assert not in_disk(GrassPoint.from_affine(MatOverB.identity(C2, 2) * 1j), "H-")
    assert in_disk(affine(np.exp(0.3j)), "U")
    rng = np.random.default_rng(5)
    for p, q in ((1, 1), (1, 2), (2, 1)):
        m = MatOverB.random(C2, p + q, rng, norm=0.7)
        assert in_disk(delta_point(m, p, q), "Delta", p, q)


def test_scalar_resolvent_equation():
    pi = GrassPoint.graph_of(np.array([[0.3]]))
    s1, s2 = affine(1.2), affine(-0.5 + 1j)
    dq = grass_diff_quotient(lambda s: resolvent(pi, s), s1, s2)
    assert dq[0, 0, 0, 0, 0, 0] == pytest.approx(-1 / ((1.2 - 0.3) * (-0.5 + 1j - 0.3)))


@given(seeds)
def test_resolvent_equation(seed):
    rng = np.random.default_rng(seed)
    pi, s1, emb = sample_resolvent_instance(C, 3, 1, rng)
    _, s2, _ = sample_resolvent_instance(C, 3, 2, rng, pi=pi)
    dq = grass_diff_quotient(lambda s: resolvent(pi, s, emb), s1, s2, out_size=3)
    rhs = -e_tensor(resolvent(pi, s1, emb), resolvent(pi, s2, emb), 3)
    assert np.max(np.abs(dq - rhs)) <= 1e-9 * max(1, np.max(np.abs(rhs)))


def test_block_formula_and_coefficient_multiplicativity():
    rng = np.random.default_rng(6)
    pi, s1, emb = sample_resolvent_instance(C, 1, 2, rng)
    _, s2, _ = sample_resolvent_instance(C, 1, 2, rng, pi=pi)
    r1, r2 = resolvent(pi, s1, emb), resolvent(pi, s2, emb)
    t = linalg.ginibre(2, rng)
    big = resolvent(pi, probe_point(s1, s2, t), emb)
    assert np.allclose(big[:2, 2:], -r1 @ t @ r2, atol=1e-10)
    unit = np.zeros((2, 2))
    unit[0, 1] = 1
    corner = -resolvent(pi, probe_point(s1, s2, unit), emb)[:2, 2:]
    assert np.allclose(corner, np.outer((-r1)[:, 0], (-r2)[1, :]), atol=1e-10)


def test_unitary_identities_scalar():
    u = np.array([[1.0 + 0j]])
    rpt = unitary_identities(u, affine(0.4 + 0.2j), Embedding(C, 1))
    assert rpt["inverse_identity"] <= 1e-15
    assert rpt["cayley_identity"] <= 1e-14


def test_unitary_identities_random():
    rng = np.random.default_rng(7)
    u = linalg.haar_unitary(3, rng)
    rpt = unitary_identities(u, affine(0.3 - 0.1j), Embedding(C, 3))
    assert rpt["inverse_identity"] <= 1e-10
    assert rpt["cayley_identity"] <= 1e-9
    assert rpt["cayley_identity_opposite_sign"] > 1e-3


def test_resolvent_star_identity_hermitian():
    rng = np.random.default_rng(8)
    pi = hermitian_graph(3, rng)
    assert pi.star().equivalent(pi)
    sigma = affine(0.7 + 2j)
    rpt = resolvent_star_identity(pi, sigma, Embedding(C, 3))
    assert rpt["star_in_resolvent_set"] and rpt["residual"] <= 1e-10


@given(seeds)
def test_resolvent_star_identity_random(seed):
    rng = np.random.default_rng(seed)
    pi, sigma, emb = sample_resolvent_instance(M2, 4, 1, rng)
    rpt = resolvent_star_identity(pi, sigma, emb)
    assert rpt["star_in_resolvent_set"]
    assert rpt["residual"] <= 1e-9 * max(1, np.max(np.abs(resolvent(pi, sigma, emb))))


def test_suites_pass():
    for report in (resolvent_suite(instances=12), grassmann_identities_suite(instances=12)):
        failed = [c.identity for c in report.checks.values() if not c.passed]
        assert not failed, failed
