"""Haar Monte Carlo for the asymptotic integral formulas, free moment oracles,
and the operator-valued R-transform with its series expansion."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .algebra import DIAG, FULL, BaseAlgebra, Embedding, MatOverB
from .calculus import CoefficientFamily, MatricialFn, extract_b_valued
from .ncpoly import NCPoly

Word = tuple[int, ...]


class OutOfDomain(ValueError):
    pass


class NoConvergence(ArithmeticError):
    pass


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("FREEGRASS_THREADS")
    return max(1, int(env)) if env else 1


def trace_state(b: np.ndarray) -> complex:
    """Normalized trace k^{-1} Tr on B (for C^k this is the uniform average)."""
    return complex(np.trace(b)) / b.shape[0]


def free_moment_oracle(a: Sequence[np.ndarray], c: np.ndarray, b: Sequence[np.ndarray]) -> complex:
    """phi(a_1 U a_2 U ... a_m U c U^{-1} b_n ... U^{-1} b_1) for U Haar-free from B.

    Zero unless m == n, in which case it is prod_j phi(a_j b_j) * phi(c).
    """
    if len(a) != len(b):
        return 0.0
    out = trace_state(c)
    for x, y in zip(a, b):
        out *= trace_state(np.asarray(x) @ np.asarray(y))
    return out


def _unit(k: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((k, k), dtype=complex)
    e[i, j] = 1.0
    return e


def exact_limit(algebra: BaseAlgebra, w1: Word, w2: Word) -> complex:
    """lim N^{-1} Tr(word_1(omega) word_2(omega)^*) under Haar measure.

    For M_k the generator z(phi_pq)_N is the corner of e_1p U e_q1, so the
    integral becomes a free moment of matrix units; for C^k the generators
    are independent Haar unitaries and the limit is a Kronecker delta.
    """
    if algebra.kind == DIAG and algebra.k > 1:
        return 1.0 if tuple(w1) == tuple(w2) else 0.0
    k = algebra.k
    pairs = algebra.index_pairs()
    p = [pairs[j] for j in w1]
    r = [pairs[j] for j in w2]
    if not p and not r:
        return 1.0
    q_prev = [0] + [pq[1] for pq in p]
    s_prev = [0] + [rs[1] for rs in r]
    a = [_unit(k, q_prev[i], p[i][0]) for i in range(len(p))]
    c = _unit(k, q_prev[len(p)], s_prev[len(r)])
    b = [_unit(k, r[j][0], s_prev[j]) for j in range(len(r))]
    return k * free_moment_oracle(a, c, b)


def words_upto(dim: int, max_len: int) -> list[Word]:
    out: list[Word] = []
    for m in range(max_len + 1):
        out.extend(itertools.product(range(dim), repeat=m))
    return out


@dataclass
class McConfig:
    algebra: BaseAlgebra
    n_ladder: Sequence[int]
    samples: int
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        ladder = list(self.n_ladder)
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("N-ladder must be strictly increasing")
        if self.samples < 1:
            raise ValueError("need at least one sample")


def sample_coordinates(algebra: BaseAlgebra, N: int, rng: np.random.Generator) -> list[np.ndarray]:
    """z(phi_j)_N(omega) for omega Haar on the unitary group of M_N(B)."""
    if algebra.kind == FULL:
        k = algebra.k
        omega = linalg.haar_unitary(N * k, rng)
        return MatOverB(algebra, omega).coords()
    return [linalg.haar_unitary(N, rng) for _ in range(algebra.k)]


def word_products(coords: Sequence[np.ndarray], words: Sequence[Word]) -> dict[Word, np.ndarray]:
    N = coords[0].shape[0]
    cache: dict[Word, np.ndarray] = {(): np.eye(N, dtype=complex)}
    for w in sorted(words, key=len):
        if w not in cache:
            cache[w] = cache[w[:-1]] @ coords[w[-1]]
    return {w: cache[w] for w in words}


def _map_samples(fn: Callable[[int], np.ndarray], count: int, threads: int | None) -> np.ndarray:
    workers = worker_count(threads)
    if workers == 1:
        return np.array([fn(i) for i in range(count)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, range(count))))


def _stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = values.shape[0]
    mean = values.mean(axis=0)
    if s < 2:
        return mean, np.full(mean.shape, np.inf)
    var = values.real.var(axis=0, ddof=1) + values.imag.var(axis=0, ddof=1)
    return mean, np.sqrt(var / s)


@dataclass
class GramEstimate:
    N: int
    samples: int
    words: list[Word]
    mean: np.ndarray
    stderr: np.ndarray


def orthogonality_gram(config: McConfig, max_len: int) -> list[GramEstimate]:
    """Estimates of N^{-1} Tr(w(omega) w'(omega)^*) for all word pairs up to max_len."""
    alg = config.algebra
    words = words_upto(alg.dim, max_len)
    out = []
    for N in config.n_ladder:
        def one(i: int, N=N) -> np.ndarray:
            coords = sample_coordinates(alg, N, linalg.stream(config.seed, N, i))
            prods = word_products(coords, words)
            flat = np.stack([prods[w].ravel() for w in words])
            return flat @ flat.conj().T / N

        values = _map_samples(one, config.samples, config.threads)
        mean, err = _stats(values)
        out.append(GramEstimate(N, config.samples, words, mean, err))
    return out


def haar_moment_estimate(config: McConfig, w1: Word, w2: Word) -> list[dict]:
    alg = config.algebra
    limit = exact_limit(alg, w1, w2)
    rows = []
    for N in config.n_ladder:
        def one(i: int, N=N) -> complex:
            coords = sample_coordinates(alg, N, linalg.stream(config.seed, N, i))
            prods = word_products(coords, [tuple(w1), tuple(w2)])
            return np.sum(prods[tuple(w1)] * prods[tuple(w2)].conj()) / N

        values = _map_samples(one, config.samples, config.threads)
        mean, err = _stats(values)
        rows.append({"N": N, "samples": config.samples, "estimate": complex(mean), "stderr": float(err),
                     "exact_limit": complex(limit)})
    return rows


def convergence_rows(config: McConfig, grams: list[GramEstimate]) -> list[dict]:
    """Flattened table rows: one per (N, word pair)."""
    alg = config.algebra
    rows = []
    words = grams[0].words
    limits = np.array([[exact_limit(alg, a, b) for b in words] for a in words])
    for g in grams:
        for i, a in enumerate(words):
            for j, b in enumerate(words):
                rows.append({
                    "N": g.N, "samples": g.samples, "word_a": a, "word_b": b,
                    "estimate": complex(g.mean[i, j]), "stderr": float(g.stderr[i, j]),
                    "exact_limit": complex(limits[i, j]),
                })
    return rows


def mc_tolerance(stderr: float, n_final: int) -> float:
    return max(3.0 * stderr, 8.0 / n_final)


@dataclass
class CoefficientEstimate:
    N: int
    samples: int
    mean: list[np.ndarray]
    stderr: list[np.ndarray]


RADIAL_SURROGATE = 1.0 - 1e-3


def recover_coefficients_mc(f: NCPoly | MatricialFn, config: McConfig, max_degree: int,
                            phases: int | None = None, radial: float | None = None) -> list[CoefficientEstimate]:
    """Haar estimates of the Taylor coefficients.

    a_m(w) = c_m * E N^{-1} Tr f_N(omega) (word_w(omega))^* with c_m = k^m for M_k
    and 1 for C^k.  The integrand is averaged over the rotations
    omega -> e^{i theta} omega at ``phases`` equally spaced angles, which leaves
    the Haar integral unchanged and isolates the degree-m part; a_0 then comes
    out exactly on every sample.  ``radial`` < 1 evaluates f at r*omega
    (boundary values of functions not defined beyond the unit ball); the
    default is 1 for polynomials and 1 - 1e-3 otherwise.
    """
    alg = config.algebra
    evaluator = f.evaluate if isinstance(f, NCPoly) else f
    if radial is None:
        radial = 1.0 if isinstance(f, NCPoly) else RADIAL_SURROGATE
    if phases is None:
        deg = f.degree if isinstance(f, NCPoly) else 2 * max_degree + 1
        phases = max(deg, max_degree) + 1
    words = words_upto(alg.dim, max_degree)
    thetas = 2 * np.pi * np.arange(phases) / phases
    weight = alg.k if alg.kind == FULL else 1
    out = []
    for N in config.n_ladder:
        def one(i: int, N=N) -> np.ndarray:
            coords = sample_coordinates(alg, N, linalg.stream(config.seed, N, i))
            omega = MatOverB.from_coords(alg, coords)
            vals = [evaluator(omega * (radial * np.exp(1j * th))) for th in thetas]
            prods = word_products(coords, words)
            res = np.zeros(len(words), dtype=complex)
            for idx, w in enumerate(words):
                m = len(w)
                fm = sum(np.exp(-1j * m * th) * v for th, v in zip(thetas, vals)) / phases
                res[idx] = weight**m * np.sum(fm * prods[w].conj()) / N / radial**m
            return res

        values = _map_samples(one, config.samples, config.threads)
        mean, err = _stats(values)
        means, errs = [], []
        pos = 0
        for m in range(max_degree + 1):
            size = alg.dim**m
            means.append(mean[pos : pos + size].reshape((alg.dim,) * m))
            errs.append(err[pos : pos + size].reshape((alg.dim,) * m))
            pos += size
        out.append(CoefficientEstimate(N, config.samples, means, errs))
    return out


# R-transform


class ExpectationSetup:
    """a in E = M_d with a conditional expectation Phi onto B.

    Phi is id (x) omega on M_k (x) M_{d/k} for a density ``state`` of size d/k;
    for C^k it is X -> (omega_j(P_j X P_j))_j with one density per block.
    """

    def __init__(self, algebra: BaseAlgebra, d: int, a: np.ndarray, state=None, check: bool = True):
        self.algebra = algebra
        self.d = d
        self.emb = Embedding(algebra, d)
        self.a = linalg.as_matrix(a)
        k = algebra.k
        if algebra.kind == FULL:
            m = d // k
            self.state = np.eye(m, dtype=complex) / m if state is None else np.asarray(state, dtype=complex)
        else:
            sizes = [len(ix) for ix in np.array_split(np.arange(d), k)]
            self.state = [np.eye(s, dtype=complex) / s for s in sizes] if state is None else [
                np.asarray(s, dtype=complex) for s in state]
        self.C = linalg.spectral_norm(self.a)
        if check:
            self.check_expectation()

    def expect(self, x: np.ndarray) -> np.ndarray:
        """(id_n (x) Phi)(X) for X in M_n(E); returns the dense element of M_n(B)."""
        d, k = self.d, self.algebra.k
        n = x.shape[0] // d
        if self.algebra.kind == FULL:
            m = d // k
            r = x.reshape(n, k, m, n, k, m)
            return np.einsum("iasjbt,ts->iajb", r, self.state).reshape(n * k, n * k)
        out = np.zeros((n, k, n, k), dtype=complex)
        parts = np.array_split(np.arange(d), k)
        r = x.reshape(n, d, n, d)
        for j, idx in enumerate(parts):
            blk = r[:, idx][:, :, :, idx]
            out[:, j, :, j] = np.einsum("iajb,ba->ij", blk, self.state[j])
        return out.reshape(n * k, n * k)

    def check_expectation(self, tol: float = 1e-12):
        rng = np.random.default_rng(0)
        x = linalg.ginibre(self.d, rng)
        b1, b2 = self.algebra.random_element(rng), self.algebra.random_element(rng)
        e = self.expect
        ib1, ib2 = self.emb(b1), self.emb(b2)
        ex = e(x)
        scale = max(1.0, float(np.max(np.abs(x))))
        errs = [
            np.max(np.abs(e(self.emb(ex)) - ex)),
            np.max(np.abs(e(ib1 @ x @ ib2) - b1 @ ex @ b2)),
            np.max(np.abs(e(np.eye(self.d)) - np.eye(self.algebra.k))),
        ]
        if max(errs) > tol * scale * 10:
            raise ValueError("Phi is not an idempotent unital B-bimodular map")

    def _lifted_a(self, n: int) -> np.ndarray:
        return np.kron(np.eye(n), self.a)

    def cauchy(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0] // self.algebra.k
        lx = self.emb.lift_dense(x)
        A = self._lifted_a(n)
        return self.expect(linalg.solve(np.eye(n * self.d) - lx @ A, lx))

    def phi_h(self, x: np.ndarray) -> np.ndarray:
        """Phi(H(x)) with H(x) = a (1 - x a)^{-1}."""
        n = x.shape[0] // self.algebra.k
        lx = self.emb.lift_dense(x)
        A = self._lifted_a(n)
        return self.expect(A @ linalg.inverse(np.eye(n * self.d) - lx @ A))

    def cauchy_derivative(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        """DG(x)[h] = Phi(Q h (1 + a Q x)), Q = (1 - x a)^{-1}."""
        n = x.shape[0] // self.algebra.k
        lx, lh = self.emb.lift_dense(x), self.emb.lift_dense(h)
        A = self._lifted_a(n)
        Q = linalg.inverse(np.eye(n * self.d) - lx @ A)
        return self.expect(Q @ lh @ (np.eye(n * self.d) + A @ Q @ lx))


class MomentSeries:
    """Scalar distribution given by its moments m_0, m_1, ... (B = C).

    G and Phi(H) are evaluated by the truncated series, exact at nilpotent
    matrices whose nilpotency order does not exceed the number of moments.
    """

    def __init__(self, moments: Sequence[complex]):
        self.moments = np.asarray(moments, dtype=complex)
        self.algebra = BaseAlgebra(FULL, 1)
        self.C = max(1.0, float(np.max(np.abs(self.moments[1:]) ** (1.0 / np.arange(1, len(self.moments)))))) \
            if len(self.moments) > 1 else 1.0

    def _powers(self, x: np.ndarray, count: int) -> list[np.ndarray]:
        out = [np.eye(x.shape[0], dtype=complex)]
        for _ in range(count):
            out.append(out[-1] @ x)
        return out

    def cauchy(self, x: np.ndarray) -> np.ndarray:
        pw = self._powers(x, len(self.moments))
        return sum(m * pw[j + 1] for j, m in enumerate(self.moments))

    def phi_h(self, x: np.ndarray) -> np.ndarray:
        pw = self._powers(x, len(self.moments))
        return sum(self.moments[j] * pw[j - 1] for j in range(1, len(self.moments)))

    def cauchy_derivative(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        pw = self._powers(x, len(self.moments))
        out = np.zeros_like(x, dtype=complex)
        for j, m in enumerate(self.moments):
            for i in range(j + 1):
                out += m * pw[i] @ h @ pw[j - i]
        return out


def _as_dense(setup, b) -> np.ndarray:
    if isinstance(b, MatOverB):
        return b.dense()
    b = np.asarray(b, dtype=complex)
    return b.reshape(1, 1) if b.ndim == 0 else b


def cauchy_G(setup, b) -> np.ndarray:
    """G_a(b) = Phi((1 - b a)^{-1} b) at level n (b given as a dense element of M_n(B))."""
    x = _as_dense(setup, b)
    if np.max(np.abs(x), initial=0.0) == 0.0:
        return np.zeros_like(x)
    if isinstance(setup, ExpectationSetup) and linalg.spectral_norm(x) * setup.C >= 1.0 and not _nilpotent(x):
        raise OutOfDomain("need ||b|| < 1/||a||")
    return setup.cauchy(x)


def _nilpotent(x: np.ndarray) -> bool:
    p = x.copy()
    for _ in range(x.shape[0]):
        p = p @ x
    return bool(np.max(np.abs(p), initial=0.0) < 1e-14 * max(1.0, np.max(np.abs(x))) ** (x.shape[0] + 1))


def _basis_for(setup, n: int) -> list[np.ndarray]:
    alg = setup.algebra
    k = alg.k
    out = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n))
            e[i, j] = 1.0
            for b in alg.basis():
                out.append(np.kron(e, b))
    return out


def _coords(setup, x: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    return np.array([np.sum(x * e) for e in basis])


def domain_radius(setup) -> float:
    """Starting radius 1/(6C) for the local inverse of G."""
    return 1.0 / (6.0 * max(setup.C, 1e-300))


def invert_L(setup, b, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Solve G(x) = b by Newton's method from x = b.

    Points must lie in the ball of radius ``setup.epsilon`` (initially 1/(6C));
    a Newton failure inside it halves the radius before raising.
    Nilpotent points are exempt since every series involved terminates there.
    """
    y = _as_dense(setup, b)
    if np.max(np.abs(y), initial=0.0) == 0.0:
        return np.zeros_like(y)
    eps = getattr(setup, "epsilon", None)
    if eps is None:
        eps = setup.epsilon = domain_radius(setup)
    if linalg.spectral_norm(y) >= eps and not _nilpotent(y):
        raise OutOfDomain(f"||b|| = {linalg.spectral_norm(y):.3g} outside the inverse-function ball {eps:.3g}")
    n = y.shape[0] // setup.algebra.k
    basis = _basis_for(setup, n)
    x = y.copy()
    for _ in range(max_iter):
        res = setup.cauchy(x) - y
        if np.max(np.abs(res)) <= tol:
            return x
        jac = np.stack([_coords(setup, setup.cauchy_derivative(x, e), basis) for e in basis], axis=1)
        step = np.linalg.solve(jac, _coords(setup, res, basis))
        x = x - sum(s * e for s, e in zip(step, basis))
    if np.max(np.abs(setup.cauchy(x) - y)) <= tol:
        return x
    setup.epsilon = eps / 2
    raise NoConvergence("Newton iteration for the inverse of G did not converge")


def r_transform(setup, b) -> np.ndarray:
    """R_a(b) = (1 + Phi(H(L(b))) L(b))^{-1} Phi(H(L(b)))."""
    y = _as_dense(setup, b)
    x = invert_L(setup, y)
    ph = setup.phi_h(x)
    return linalg.solve(np.eye(y.shape[0]) + ph @ x, ph)


def r_transform_series(setup, max_degree: int) -> list[CoefficientFamily]:
    """Coefficient families of the fully matricial R-transform (one per coordinate of B).

    Read at nilpotent points, where G, its inverse and R are all exact
    polynomials, so no radius restriction applies.
    """
    alg = setup.algebra

    def evaluator(beta: MatOverB) -> MatOverB:
        return MatOverB.from_dense(alg, r_transform(setup, beta.dense()), tol=1e-8)

    return extract_b_valued(alg, evaluator, max_degree)


def g_jacobian_defect(setup, b) -> float:
    """||id - DG(b)|| as an operator on M_n(B) coordinates."""
    y = _as_dense(setup, b)
    n = y.shape[0] // setup.algebra.k
    basis = _basis_for(setup, n)
    jac = np.stack([_coords(setup, setup.cauchy_derivative(y, e), basis) for e in basis], axis=1)
    return linalg.spectral_norm(np.eye(len(basis)) - jac)


# combinatorial oracles for scalar distributions


def free_cumulants(moments: Sequence[complex]) -> np.ndarray:
    """Free cumulants kappa_1..kappa_{n} from moments m_0=1, m_1..m_n (noncrossing recursion)."""
    m = np.asarray(moments, dtype=complex)
    nmax = len(m) - 1
    kappa = np.zeros(nmax + 1, dtype=complex)

    @lru_cache(maxsize=None)
    def prod_sum(s: int, total: int) -> complex:
        # sum over i_1 + ... + i_s = total, i_j >= 0, of m_{i_1} ... m_{i_s}
        if s == 0:
            return 1.0 if total == 0 else 0.0
        return sum(m[i] * prod_sum(s - 1, total - i) for i in range(total + 1))

    for n in range(1, nmax + 1):
        acc = m[n]
        for s in range(1, n):
            acc -= kappa[s] * prod_sum(s, n - s)
        kappa[n] = acc
    return kappa


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for i, a in p.items():
        for j, b in q.items():
            out[i + j] = out.get(i + j, 0) + a * b
    return out


def _poly_state(p: dict, moments: Sequence[complex]) -> complex:
    return sum(c * moments[i] for i, c in p.items())


def free_mixed_moment(word: Sequence[tuple[int, dict]], moments: Sequence[Sequence[complex]]) -> complex:
    """phi(x_1 ... x_r) for x_i polynomials in freely independent variables.

    ``word`` lists (variable, {power: coefficient}); expansion into centered
    pieces, using that alternating products of centered elements have zero state.
    """
    merged: list[tuple[int, dict]] = []
    for var, poly in word:
        if merged and merged[-1][0] == var:
            merged[-1] = (var, _poly_mul(merged[-1][1], poly))
        else:
            merged.append((var, dict(poly)))
    r = len(merged)
    if r == 0:
        return 1.0
    if r == 1:
        return _poly_state(merged[0][1], moments[merged[0][0]])
    states = [_poly_state(p, moments[v]) for v, p in merged]
    centered = []
    for (v, p), s in zip(merged, states):
        c = dict(p)
        c[0] = c.get(0, 0) - s
        centered.append((v, c))
    total = 0.0
    for mask in range(2**r - 1):
        chosen = [i for i in range(r) if mask >> i & 1]
        coef = np.prod([states[i] for i in range(r) if not mask >> i & 1])
        if coef == 0:
            continue
        total += coef * free_mixed_moment([centered[i] for i in chosen], moments)
    return total


def free_sum_moments(m1: Sequence[complex], m2: Sequence[complex], n: int) -> np.ndarray:
    """Moments of a_1 + a_2 for free a_1, a_2, up to order n."""
    out = np.zeros(n + 1, dtype=complex)
    for deg in range(n + 1):
        for letters in itertools.product((0, 1), repeat=deg):
            out[deg] += free_mixed_moment([(v, {1: 1.0}) for v in letters], [m1, m2])
    return out


def catalan_moments(n: int) -> np.ndarray:
    """Moments of the standard semicircle law up to order n."""
    out = np.zeros(n + 1)
    for j in range(0, n + 1, 2):
        out[j] = math.comb(j, j // 2) / (j // 2 + 1)
    return out


def jacobi_semicircle(d: int) -> np.ndarray:
    """Tridiagonal matrix whose (0, 0) spectral measure matches the semicircle up to order 2d - 1."""
    return np.diag(np.ones(d - 1), 1) + np.diag(np.ones(d - 1), -1)


def vector_state_setup(a: np.ndarray) -> ExpectationSetup:
    """B = C inside M_d with Phi the vector state at the first basis vector."""
    d = a.shape[0]
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return ExpectationSetup(BaseAlgebra(FULL, 1), d, a, state=rho)


CSV_FIELDS = ("N", "samples", "word_a", "word_b", "estimate_re", "estimate_im", "stderr",
              "exact_limit_re", "exact_limit_im", "abs_error")


def csv_rows(rows: list[dict]) -> list[dict]:
    """Flatten convergence rows for CSV output; floats use repr so reruns are byte-identical."""
    out = []
    for r in rows:
        est, lim = complex(r["estimate"]), complex(r["exact_limit"])
        out.append({
            "N": r["N"], "samples": r["samples"],
            "word_a": " ".join(map(str, r.get("word_a", ()))), "word_b": " ".join(map(str, r.get("word_b", ()))),
            "estimate_re": repr(est.real), "estimate_im": repr(est.imag), "stderr": repr(float(r["stderr"])),
            "exact_limit_re": repr(lim.real), "exact_limit_im": repr(lim.imag), "abs_error": repr(abs(est - lim)),
        })
    return out
