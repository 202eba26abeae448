"""Randomized verification suites shared by the CLI, the acceptance tests and the scripts.

Each suite returns a SuiteReport: one Check per identity carrying the worst
residual over all sampled instances.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .algebra import BaseAlgebra, Embedding, Functional, MatOverB
from .calculus import (CoassociativityViolation, CoefficientFamily, MatricialFn, b_valued_evaluator,
                       compose_families, diff_quotient, diff_quotient_nested, extract_coefficients,
                       lambda_numeric, truncation_bound)
from .duality import DualitySetup, dual_positivity_check, verify_involution
from .grassmann import (CAYLEY, FLIP, W, GrassPoint, NotInResolventSet, delta_point, e_tensor, g_pq,
                        grass_diff_quotient, in_disk, in_resolvent_set, resolvent, resolvent_closed_form,
                        resolvent_star_identity, s_pq, stacked, transversal, unitary_identities)
from .ncpoly import NCPoly, NCTensor, build_pathological, random_ball_point
from .sphere import Circle, family_residuals, geometric_decay

DEFAULT_TOLERANCES: dict[str, float] = {
    "leibniz-symbolic": 0.0,
    "coassociativity-symbolic": 0.0,
    "lambda-coderivation-symbolic": 0.0,
    "leibniz-numeric": 1e-9,
    "coassociativity-numeric": 1e-9,
    "difference-quotient-bridge": 1e-10,
    "lambda-numeric": 1e-6,
    "resolvent-equation": 1e-9,
    "representative-independence": 1e-10,
    "resolvent-closed-form": 1e-10,
    "unitary-inverse-identity": 1e-9,
    "unitary-cayley-identity": 1e-9,
    "double-star": 0.0,
    "double-orthogonal": 0.0,
    "derivative-star-symbolic": 0.0,
    "lambda-star-symbolic": 0.0,
    "resolvent-star": 1e-9,
    "transform-star": 1e-9,
    "dual-positivity": 1e-8,
    "non-positive-witness": -1e-3,
    "flip-maps-delta": 0.0,
    "x-star-symmetry": 0.0,
    "delta-in-resolvent-set": 0.0,
    "transversality-invariance": 0.0,
    "action-inverse": 0.0,
    "scalar-action-star": 0.0,
    "gl2-action-star": 0.0,
    "direct-sum-resolvent": 1e-9,
    "similarity-resolvent": 1e-9,
    "contour-coproduct": 1e-8,
    "contour-product": 1e-8,
    "contour-lambda": 1e-8,
    "quadrature-decay": 0.0,
    "series-roundtrip": 1e-11,
    "series-composition": 1e-9,
    "series-truncation": 0.0,
    "pathological-vanishing": 1e-12,
    "pathological-witness": 0.0,
    "pathological-growth": 0.0,
    # Monte Carlo residuals are normalized by their allowance, so 1 is the threshold
    "haar-orthogonality": 1.0,
    "coefficient-z-score": 3.0,
    "constant-term-exact": 1e-12,
    "semicircle": 1e-6,
    "point-mass": 1e-9,
    "free-additivity": 1e-9,
}



@dataclass
class Check:
    identity: str
    residual: float = 0.0
    tolerance: float = 0.0
    instances: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.instances == 0 or not math.isfinite(self.residual):
            return False
        if self.tolerance < 0:
            # witness searches: the residual must drop below a negative threshold
            return self.residual < self.tolerance
        return self.residual <= self.tolerance

    def record(self, value: float):
        self.residual = max(self.residual, float(value)) if self.instances else float(value)
        self.instances += 1

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class SuiteReport:
    suite: str
    checks: dict[str, Check] = field(default_factory=dict)
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def check(self, identity: str, tolerances: dict | None = None) -> Check:
        if identity not in self.checks:
            tol = (tolerances or {}).get(identity)
            tol = DEFAULT_TOLERANCES[identity] if tol is None else tol
            self.checks[identity] = Check(identity, tolerance=tol)
        return self.checks[identity]

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks.values())

    def as_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": self.seconds,
                "checks": [c.as_dict() for c in self.checks.values()], "details": self.details}


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        report = fn(*args, **kwargs)
        report.seconds = time.perf_counter() - start
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _tensor_gap(a: NCTensor | NCPoly, b: NCTensor | NCPoly) -> float:
    diff = a - b
    return max((abs(c) for c in diff.terms.values()), default=0.0)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def _algebras(algebra: BaseAlgebra | None, default: tuple[str, ...]) -> list[BaseAlgebra]:
    return [algebra] if algebra is not None else [BaseAlgebra.parse(s) for s in default]


def _random_poly(alg: BaseAlgebra, rng: np.random.Generator, max_degree: int) -> NCPoly:
    # integer coefficients keep the symbolic identities exact in floating point
    return NCPoly.random(alg, rng, int(rng.integers(1, max_degree + 1)), n_terms=6, integer=True)


def _point(alg: BaseAlgebra, rng: np.random.Generator, n: int, norm: float = 0.8) -> MatOverB:
    return MatOverB.random(alg, n, rng, norm=norm)


# bialgebra


@_timed
def bialgebra_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 50,
                    max_degree: int = 5, tolerances: dict | None = None) -> SuiteReport:
    """Leibniz rule, coassociativity and the coderivation property of Lambda,
    symbolically and through block-embedding difference quotients."""
    rep = SuiteReport("bialgebra")
    ck = lambda name: rep.check(name, tolerances)
    for alg in _algebras(algebra, ("m2", "c2", "c3")):
        rng = linalg.stream(seed, "bialgebra", alg.name)
        for _ in range(instances):
            p, q = _random_poly(alg, rng, max_degree), _random_poly(alg, rng, max_degree)
            dp = p.derivative()
            ck("leibniz-symbolic").record(_tensor_gap((p * q).derivative(), leibniz_rhs(p, q)))
            ck("coassociativity-symbolic").record(_tensor_gap(dp.derive_slot(0), dp.derive_slot(1)))
            ck("lambda-coderivation-symbolic").record(
                _tensor_gap(p.coderivation_lambda().derivative(), dp.lambda_slot(0) + dp.lambda_slot(1)))

            m, n, l = (int(x) for x in rng.integers(1, 3, size=3))
            b1, b2, b3 = _point(alg, rng, m), _point(alg, rng, n), _point(alg, rng, l)
            fp, fq = MatricialFn.from_poly(p), MatricialFn.from_poly(q)
            kp, kq = diff_quotient(fp, b1, b2), diff_quotient(fq, b1, b2)
            kpq = diff_quotient(fp * fq, b1, b2)
            rhs = np.einsum("ix,xjkl->ijkl", p.evaluate(b1), kq) + np.einsum("ijky,yl->ijkl", kp, q.evaluate(b2))
            ck("leibniz-numeric").record(_rel(kpq, rhs))
            ck("difference-quotient-bridge").record(_rel(kp, dp.evaluate(b1, b2)))
            try:
                nested = diff_quotient_nested(fp, b1, b2, b3)
                ck("coassociativity-numeric").record(_rel(nested, dp.derive_slot(1).evaluate(b1, b2, b3)))
            except CoassociativityViolation:
                ck("coassociativity-numeric").record(math.inf)
            beta = _point(alg, rng, n, norm=0.5)
            ck("lambda-numeric").record(_rel(lambda_numeric(fp, beta), p.coderivation_lambda().evaluate(beta)))
    return rep


from .ncpoly import leibniz_rhs  # noqa: E402


# resolvents


def random_grass_point(alg: BaseAlgebra, n: int, rng: np.random.Generator) -> GrassPoint:
    blocks = [MatOverB.random(alg, n, rng).dense() for _ in range(4)]
    return GrassPoint(linalg.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]]), n, alg.k, alg)


def random_e_point(d: int, rng: np.random.Generator) -> GrassPoint:
    return GrassPoint.over_e(linalg.ginibre(2 * d, rng))


def _well_conditioned(pi: GrassPoint, sigma: GrassPoint, emb: Embedding, limit: float = 1e4) -> bool:
    return np.linalg.cond(stacked(pi, sigma, emb)) < limit


def sample_resolvent_instance(alg: BaseAlgebra, d: int, n: int, rng: np.random.Generator,
                              pi: GrassPoint | None = None, tries: int = 100):
    """(pi, sigma, emb) with a well-conditioned stacked matrix (condition number below 1e4)."""
    emb = Embedding(alg, d)
    for _ in range(tries):
        p = pi if pi is not None else random_e_point(d, rng)
        s = random_grass_point(alg, n, rng)
        if _well_conditioned(p, s, emb):
            return p, s, emb
    raise RuntimeError("could not sample a well-conditioned resolvent instance")


@_timed
def resolvent_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 100,
                    E: int | None = None, tolerances: dict | None = None) -> SuiteReport:
    """Resolvent equation, representative independence, the closed form, and the
    identities relating resolvents of a unitary, its inverse and its Cayley transform."""
    rep = SuiteReport("resolvent")
    ck = lambda name: rep.check(name, tolerances)
    algs = _algebras(algebra, ("c", "c2", "m2"))
    for idx in range(instances):
        alg = algs[idx % len(algs)]
        rng = linalg.stream(seed, "resolvent", idx)
        d = E if E is not None else (3 if alg.k == 1 or idx % 2 else 4)
        if alg.kind == "full" and d % alg.k:
            d = alg.k * max(1, d // alg.k)
        m, n = (int(x) for x in rng.integers(1, 3, size=2))
        pi, s1, emb = sample_resolvent_instance(alg, d, m, rng)
        _, s2, _ = sample_resolvent_instance(alg, d, n, rng, pi=pi)
        big = probe_ok = True
        try:
            dq = grass_diff_quotient(lambda s: resolvent(pi, s, emb), s1, s2, out_size=d)
            r1, r2 = resolvent(pi, s1, emb), resolvent(pi, s2, emb)
            ck("resolvent-equation").record(_rel(dq, -e_tensor(r1, r2, d)))
        except NotInResolventSet:
            ck("resolvent-equation").record(math.inf)
        t = MatOverB.random(alg, m, rng).dense() + 2 * np.eye(m * alg.k)
        ck("representative-independence").record(
            _rel(resolvent(pi, s1, emb), resolvent(pi, s1.with_column_scaled(t), emb)))
        ck("resolvent-closed-form").record(_rel(resolvent(pi, s1, emb), resolvent_closed_form(pi, s1, emb)))

        u = linalg.haar_unitary(d, rng)
        for _ in range(100):
            sigma = random_grass_point(alg, m, rng)
            rpt = unitary_identities(u, sigma, emb)
            if rpt["in_resolvent_set"] and _well_conditioned(GrassPoint.graph_of(u), sigma, emb) \
                    and _well_conditioned(GrassPoint.graph_of(u.conj().T), sigma.gl2_action(FLIP), emb):
                break
        ck("unitary-inverse-identity").record(rpt.get("inverse_identity", math.inf))
        ck("unitary-cayley-identity").record(rpt.get("cayley_identity", math.inf))
        rep.details.setdefault("cayley_identity_printed_sign", 0.0)
        rep.details["cayley_identity_printed_sign"] = max(
            rep.details["cayley_identity_printed_sign"], rpt.get("cayley_identity_opposite_sign", 0.0))
    return rep


# involution


@_timed
def involution_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 50,
                     E: int | None = None, tolerances: dict | None = None) -> SuiteReport:
    rep = SuiteReport("involution")
    ck = lambda name: rep.check(name, tolerances)
    algs = _algebras(algebra, ("c", "c2", "m2"))
    for idx in range(instances):
        alg = algs[idx % len(algs)]
        rng = linalg.stream(seed, "involution", idx)
        d = E if E is not None else 4
        pi = random_e_point(d, rng)
        sigma = random_grass_point(alg, int(rng.integers(1, 3)), rng)
        for point in (pi, sigma):
            ck("double-star").record(0 if point.star().star().equivalent(point) else 1)
            ck("double-orthogonal").record(0 if point.orthogonal().orthogonal().equivalent(point) else 1)
        p = _random_poly(alg, rng, 5)
        ck("derivative-star-symbolic").record(_tensor_gap(p.star().derivative(), p.derivative().star().flip()))
        ck("lambda-star-symbolic").record(_tensor_gap(p.star().coderivation_lambda(), p.coderivation_lambda().star()))
        pi, sigma, emb = sample_resolvent_instance(alg, d, sigma.level, rng)
        star = resolvent_star_identity(pi, sigma, emb)
        ck("resolvent-star").record(star["residual"] if star["star_in_resolvent_set"] else math.inf)
        phi = Functional(linalg.ginibre(d, rng))
        setup = DualitySetup(alg, d, pi, phi)
        ck("transform-star").record(verify_involution(setup, sigma))
    return rep


# positivity


def hermitian_graph(d: int, rng: np.random.Generator) -> GrassPoint:
    y = linalg.ginibre(d, rng)
    return GrassPoint.graph_of((y + y.conj().T) / 2)


@_timed
def positivity_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 20,
                     E: int = 3, control_budget: int = 200, tolerances: dict | None = None) -> SuiteReport:
    """Complete positivity of minus the difference quotient of U(phi) at (sigma, sigma^*)
    for positive phi, and a witness search for a non-positive functional."""
    rep = SuiteReport("positivity")
    ck = lambda name: rep.check(name, tolerances)
    algs = _algebras(algebra, ("c", "c2", "m2"))
    tr = Functional.trace(E)
    if not tr.is_positive():
        raise AssertionError("trace functional failed its positivity self-check")
    for idx in range(instances):
        alg = algs[idx % len(algs)]
        rng = linalg.stream(seed, "positivity", idx)
        d = E if alg.kind == "diag" or E % alg.k == 0 else alg.k * 2
        phi = Functional.trace(d)
        pi = hermitian_graph(d, rng)
        pi, sigma, emb = sample_resolvent_instance(alg, d, int(rng.integers(1, 3)), rng, pi=pi)
        setup = DualitySetup(alg, d, pi, phi)
        res = dual_positivity_check(setup, sigma)
        ck("dual-positivity").record(-res["min_choi_eigenvalue"] if res["hermitian"] else math.inf)
    # negative control: phi(X) = Tr(X diag(1, -1, ...)) is not positive
    alg = algs[0]
    d = E if alg.kind == "diag" or E % alg.k == 0 else alg.k * 2
    dual = np.diag([1.0] + [-1.0] * (d - 1)).astype(complex)
    control = Functional(dual)
    if control.is_positive():
        raise AssertionError("control functional unexpectedly positive")
    rng = linalg.stream(seed, "positivity-control")
    pi = hermitian_graph(d, rng)
    best = math.inf
    tried = 0
    for tried in range(1, control_budget + 1):
        _, sigma, emb = sample_resolvent_instance(alg, d, 1, rng, pi=pi)
        res = dual_positivity_check(DualitySetup(alg, d, pi, control), sigma)
        if res["hermitian"]:
            best = min(best, res["min_choi_eigenvalue"])
        if best < DEFAULT_TOLERANCES["non-positive-witness"]:
            break
    c = ck("non-positive-witness")
    c.residual, c.instances, c.note = best, tried, f"witness after {tried} samples"
    return rep


# Grassmannian set identities


def _d0_matrix(alg: BaseAlgebra, n: int, rng: np.random.Generator) -> MatOverB:
    return MatOverB.random(alg, n, rng, norm=float(rng.uniform(0.1, 0.9)))


@_timed
def grassmann_identities_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 30,
                               E: int = 4, tolerances: dict | None = None) -> SuiteReport:
    """Symmetries of the stably matricial sets, group-action laws and fully matricial resolvent laws."""
    rep = SuiteReport("grassmann-identities")
    ck = lambda name: rep.check(name, tolerances)
    algs = _algebras(algebra, ("c", "c2", "m2"))
    for idx in range(instances):
        alg = algs[idx % len(algs)]
        rng = linalg.stream(seed, "grassmann", idx)
        p, q = (int(x) for x in rng.integers(1, 3, size=2))
        n = p + q
        sigma = delta_point(_d0_matrix(alg, n, rng), p, q)
        member = in_disk(sigma, "Delta", p, q)
        flipped = sigma.gl2_action(FLIP).scalar_action(linalg.inverse(s_pq(p, q)))
        ck("flip-maps-delta").record(0 if member and in_disk(flipped, "Delta", q, p) else 1)

        g = np.kron(CAYLEY, np.eye(n * alg.k)) @ np.kron(g_pq(p, q), np.eye(alg.k))
        x_point = GrassPoint(g @ GrassPoint.from_affine(_d0_matrix(alg, n, rng)).rep, n, alg.k, alg)
        x_star = x_point.star().scalar_action(linalg.inverse(s_pq(p, q)))
        ck("x-star-symmetry").record(0 if in_disk(x_point, "X", p, q) and in_disk(x_star, "X", q, p) else 1)

        d = E if alg.kind == "diag" or E % alg.k == 0 else alg.k * 2
        emb = Embedding(alg, d)
        u = GrassPoint.graph_of(linalg.haar_unitary(d, rng))
        ck("delta-in-resolvent-set").record(0 if in_resolvent_set(u, sigma, emb) else 1)

        a, b = random_grass_point(alg, n, rng), random_grass_point(alg, n, rng)
        gg = linalg.ginibre(2 * alg.k, rng)
        ck("transversality-invariance").record(
            0 if transversal(a, b) == transversal(a.gl2_action(gg), b.gl2_action(gg)) else 1)
        ck("action-inverse").record(0 if a.gl2_action(gg).gl2_action(linalg.inverse(gg)).equivalent(a) else 1)
        s = linalg.ginibre(n, rng)
        lhs = a.scalar_action(s).star()
        rhs = a.star().scalar_action(linalg.inverse(s.conj().T))
        ck("scalar-action-star").record(0 if lhs.equivalent(rhs) else 1)
        gs = np.kron(np.eye(1), gg)
        w = np.kron(W, np.eye(alg.k))
        conj = w @ linalg.inverse(gs.conj().T) @ linalg.inverse(w)
        ck("gl2-action-star").record(0 if a.gl2_action(gs).star().equivalent(a.star().gl2_action(conj)) else 1)

        pi, s1, emb = sample_resolvent_instance(alg, d, p, rng)
        _, s2, _ = sample_resolvent_instance(alg, d, q, rng, pi=pi)
        r = resolvent(pi, s1.direct_sum(s2), emb)
        expect = linalg.direct_sum(resolvent(pi, s1, emb), resolvent(pi, s2, emb))
        ck("direct-sum-resolvent").record(_rel(r, expect))
        sm = linalg.ginibre(p, rng) + 3 * np.eye(p)
        sd = np.kron(sm, np.eye(d))
        moved = resolvent(pi, s1.scalar_action(sm), emb)
        ck("similarity-resolvent").record(_rel(moved, sd @ resolvent(pi, s1, emb) @ linalg.inverse(sd)))
    return rep


# contour duality


@_timed
def sphere_duality_suite(points: int = 512, seed: int = 0, cases: int = 12, ladder: tuple = (64, 128, 256, 512),
                         tolerances: dict | None = None) -> SuiteReport:
    rep = SuiteReport("sphere-duality")
    ck = lambda name: rep.check(name, tolerances)
    for r in family_residuals(points, seed, cases):
        ck("contour-coproduct").record(r.coproduct)
        ck("contour-product").record(r.product)
        ck("contour-lambda").record(r.lambda_relation)
    worst = [max(r.worst() for r in family_residuals(m, seed, cases)) for m in ladder]
    rep.details["residual_by_points"] = dict(zip(ladder, worst))
    ck("quadrature-decay").record(0 if geometric_decay(worst) else 1)
    return rep


# series


def composition_pair(alg: BaseAlgebra, rng: np.random.Generator, degree: int = 3) -> tuple[NCPoly, list[NCPoly]]:
    outer = NCPoly.random(alg, rng, degree, n_terms=5)
    inner = []
    for _ in range(alg.dim):
        q = NCPoly.random(alg, rng, degree, n_terms=4)
        inner.append(q - NCPoly.constant(alg, q.terms.get((), 0.0)) if () in q.terms else q)
    return outer, inner


def truncation_experiment(rng: np.random.Generator, degrees=(2, 4, 6), radius: float = 0.3,
                          outer_radius: float = 0.6, samples: int = 40) -> list[dict]:
    """Geometric tail bound for f(beta) = (1 - a beta_1 - b beta_2)^{-1} over C^2.

    C is measured as the largest sampled value of ||f|| on the ball of radius
    R' (including the scalar points where the maximum is attained) and the
    tail of the extracted series is compared with C q^N / (1 - q), q = R / R'.
    """
    alg = BaseAlgebra.parse("c2")
    a, b = 0.6, 0.4  # ||a beta_1 + b beta_2|| <= ||beta||, so f is analytic on the unit ball

    def ev(beta: MatOverB) -> np.ndarray:
        z1, z2 = beta.coords()
        return linalg.inverse(np.eye(beta.n) - a * z1 - b * z2)

    f = MatricialFn(alg, ev, radius=1.0)
    c = 0.0
    for n in (1, 2, 3):
        for _ in range(samples):
            c = max(c, linalg.spectral_norm(f(_point(alg, rng, n, outer_radius))))
    for phase in np.exp(2j * np.pi * np.arange(16) / 16):
        c = max(c, linalg.spectral_norm(f(MatOverB.identity(alg, 1) * (outer_radius * phase))))
    fam = extract_coefficients(f, max(degrees) - 1)
    rows = []
    for N in degrees:
        trunc = CoefficientFamily(alg, fam.coefficients[:N]).to_poly()
        worst = 0.0
        for n in (1, 2, 3):
            for _ in range(samples):
                beta = _point(alg, rng, n, radius)
                worst = max(worst, linalg.spectral_norm(f(beta) - trunc.evaluate(beta)))
        bound = truncation_bound(c, radius, outer_radius, N)
        rows.append({"N": N, "remainder": worst, "bound": bound, "measured_C": c})
    return rows


@_timed
def series_suite(algebra: BaseAlgebra | None = None, seed: int = 0, instances: int = 20, max_degree: int = 6,
                 tolerances: dict | None = None) -> SuiteReport:
    """Exact coefficient extraction, composition of families, and the geometric tail bound."""
    rep = SuiteReport("series")
    ck = lambda name: rep.check(name, tolerances)
    algs = _algebras(algebra, ("c", "c2", "c3", "m2"))
    for idx in range(instances):
        alg = algs[idx % len(algs)]
        rng = linalg.stream(seed, "series", idx)
        deg = max_degree if alg.dim ** max_degree <= 1000 else 4
        p = NCPoly.random(alg, rng, int(rng.integers(1, deg + 1)), n_terms=8)
        fam = extract_coefficients(MatricialFn.from_poly(p), deg)
        ck("series-roundtrip").record(fam.max_difference(CoefficientFamily.from_poly(p, deg)))

        outer, inner = composition_pair(alg, rng, 2 if alg.dim > 3 else 3)
        cdeg = 4 if alg.dim <= 3 else 3
        inner_eval = b_valued_evaluator(inner)
        composed = MatricialFn(alg, lambda beta: outer.evaluate(inner_eval(beta)), exact=True)
        direct = extract_coefficients(composed, cdeg)
        chained = compose_families(CoefficientFamily.from_poly(outer, cdeg),
                                   [CoefficientFamily.from_poly(q, cdeg) for q in inner])
        ck("series-composition").record(direct.max_difference(chained) / max(1.0, _fam_scale(direct)))
    rows = truncation_experiment(linalg.stream(seed, "truncation"))
    rep.details["truncation"] = rows
    for row in rows:
        ck("series-truncation").record(0 if row["remainder"] <= 1.1 * row["bound"] else 1)
    return rep


def _fam_scale(fam: CoefficientFamily) -> float:
    return max(float(np.max(np.abs(c), initial=0.0)) for c in fam.coefficients)


# pathological


@_timed
def pathological_suite(algebra: BaseAlgebra | None = None, seed: int = 0, depth: int = 2, samples: int = 50,
                       tolerances: dict | None = None) -> SuiteReport:
    """Antisymmetrized polynomials vanish below their level and partial sums grow on shrinking balls."""
    rep = SuiteReport("pathological")
    ck = lambda name: rep.check(name, tolerances)
    alg = algebra if algebra is not None else BaseAlgebra.parse("c2")
    rng = linalg.stream(seed, "pathological")
    levels = build_pathological(alg, depth, rng)
    table = []
    for j, lv in enumerate(levels, start=1):
        for k in range(1, lv.vanishing_up_to + 1):
            if k * k >= lv.p:
                continue
            for _ in range(samples):
                beta = random_ball_point(alg, k, rng, 1.0)
                # the identity concerns the unscaled antisymmetrization
                ck("pathological-vanishing").record(float(np.max(np.abs(lv.poly.evaluate(beta)))) / lv.scale)
        ck("pathological-witness").record(0 if lv.witness_norm > 0 else 1)
        ck("pathological-growth").record(0 if lv.witness_norm > j and lv.witness_radius <= 1.0 / j else 1)
        table.append({"j": j, "p": lv.p, "vanishing_up_to": lv.vanishing_up_to, "witness_level": lv.witness_level,
                      "scale": lv.scale, "radius": lv.witness_radius, "witness_norm": lv.witness_norm})
    rep.details["levels"] = table
    return rep


SUITES = {
    "bialgebra": bialgebra_suite,
    "resolvent": resolvent_suite,
    "involution": involution_suite,
    "positivity": positivity_suite,
    "grassmann-identities": grassmann_identities_suite,
    "sphere-duality": sphere_duality_suite,
}


# Monte Carlo and R-transform experiments

from .freeprob import (ExpectationSetup, McConfig, MomentSeries, catalan_moments, convergence_rows,  # noqa: E402
                       exact_limit, free_cumulants, free_sum_moments, jacobi_semicircle, mc_tolerance,
                       orthogonality_gram, r_transform, r_transform_series, recover_coefficients_mc,
                       vector_state_setup)


@_timed
def mc_orthogonality(config: McConfig, max_len: int = 3, tolerances: dict | None = None) -> SuiteReport:
    """Haar estimates of N^{-1} Tr(w(omega) w'(omega)^*) against their exact limits, all word pairs."""
    rep = SuiteReport("mc-orthogonality")
    grams = orthogonality_gram(config, max_len)
    rows = convergence_rows(config, grams)
    n_final = config.n_ladder[-1]
    c = rep.check("haar-orthogonality", tolerances)
    for r in rows:
        if r["N"] == n_final:
            tol = mc_tolerance(r["stderr"], n_final)
            c.record(abs(r["estimate"] - r["exact_limit"]) / tol)
    c.note = "residual is the worst |estimate - limit| / max(3 stderr, 8/N)"
    rep.details["rows"] = rows
    rep.details["max_error_by_N"] = {g.N: max(abs(r["estimate"] - r["exact_limit"]) for r in rows if r["N"] == g.N)
                                     for g in grams}
    return rep


def _exact_family(p: NCPoly, degree: int) -> CoefficientFamily:
    return CoefficientFamily.from_poly(p, degree)


@_timed
def mc_coefficients(f: NCPoly, config: McConfig, degree: int, tolerances: dict | None = None) -> SuiteReport:
    """Coefficient recovery from Haar integrals, z-scored against the polynomial's own coefficients.

    The constant term is compared exactly at every N."""
    rep = SuiteReport("mc-coefficients")
    exact = _exact_family(f, degree)
    ests = recover_coefficients_mc(f, config, degree)
    final = ests[-1]
    n_final = config.n_ladder[-1]
    zc = rep.check("coefficient-z-score", tolerances)
    c0 = rep.check("constant-term-exact", tolerances)
    table = []
    for m in range(1, degree + 1):
        err = np.abs(final.mean[m] - exact.coefficients[m])
        allowance = np.maximum(final.stderr[m], 1e-300)
        z = err / allowance
        for idx in zip(*np.nonzero(np.ones_like(err))):
            table.append({"degree": m, "word": tuple(int(i) for i in idx), "estimate": complex(final.mean[m][idx]),
                          "exact": complex(exact.coefficients[m][idx]), "stderr": float(final.stderr[m][idx]),
                          "z": float(z[idx])})
            # bias allowance of order 1/N on top of three standard errors
            zc.record(float(err[idx]) / (3 * float(final.stderr[m][idx]) + 1.0 / n_final) * 3)
    for e in ests:
        c0.record(abs(complex(e.mean[0]) - complex(exact.coefficients[0])))
    rep.details["coefficients"] = table
    rep.details["N"] = n_final
    return rep


def _random_moments(rng: np.random.Generator, order: int, size: int = 4) -> np.ndarray:
    """Moments of a random discrete distribution (spectral measure of a Hermitian matrix)."""
    h = linalg.ginibre(size, rng)
    h = (h + h.conj().T) / 4
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    v /= np.linalg.norm(v)
    out, x = [], v.copy()
    for _ in range(order + 1):
        out.append(np.vdot(v, x))
        x = h @ x
    return np.array(out)


@_timed
def rtransform_suite(seed: int = 0, pairs: int = 5, degree: int = 5, tolerances: dict | None = None) -> SuiteReport:
    """Semicircle and point-mass R-transforms, and additivity of the series for free pairs."""
    rep = SuiteReport("rtransform")
    tols = tolerances
    kappa = free_cumulants(catalan_moments(12))
    semi = vector_state_setup(jacobi_semicircle(40))
    c = rep.check("semicircle", tols)
    for r in (0.01, 0.03, 0.05):
        for th in np.linspace(0, 2 * np.pi, 8, endpoint=False):
            b = r * np.exp(1j * th)
            expected = sum(kappa[n + 1] * b**n for n in range(len(kappa) - 1))
            c.record(abs(complex(r_transform(semi, b)[0, 0]) - expected))
    c = rep.check("point-mass", tols)
    rng = linalg.stream(seed, "rtransform")
    for lam in (0.5, -1.3, 2.0 + 0.5j):
        for alg_name, d in (("c", 3), ("c2", 4), ("m2", 4)):
            alg = BaseAlgebra.parse(alg_name)
            setup = ExpectationSetup(alg, d, lam * np.eye(d))
            for n in (1, 2):
                b = MatOverB.random(alg, n, rng, norm=0.05)
                val = r_transform(setup, b.dense())
                c.record(float(np.max(np.abs(val - lam * np.eye(val.shape[0])))))
    c = rep.check("free-additivity", tols)
    for i in range(pairs):
        m1, m2 = _random_moments(rng, degree + 1), _random_moments(rng, degree + 1)
        ms = free_sum_moments(m1, m2, degree + 1)
        r1 = r_transform_series(MomentSeries(m1), degree)[0]
        r2 = r_transform_series(MomentSeries(m2), degree)[0]
        rs = r_transform_series(MomentSeries(ms), degree)[0]
        c.record(rs.max_difference(r1 + r2))
    return rep
