"""Grassmannian points, their group actions, involution, resolvents, and the
stably matricial sets used as resolvent domains."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .algebra import BaseAlgebra, Embedding, MatOverB

EQUIV_TOL = 1e-9

FLIP = np.array([[0, 1], [1, 0]], dtype=complex)
CAYLEY = np.array([[-1j, 1j], [1, 1]], dtype=complex)
CAYLEY_MINUS = np.array([[1j, -1j], [1, 1]], dtype=complex)
W = np.array([[0, 1], [-1, 0]], dtype=complex)


class NotInResolventSet(ArithmeticError):
    pass


@dataclass
class GrassPoint:
    """Class of an invertible 2 x 2 block matrix [[a, b], [c, d]] modulo right
    multiplication of the column (b, d) by invertible elements.

    Blocks are N x N with N = level * size; ``algebra`` is the base algebra
    for points over M_n(B) and None for points over a plain matrix algebra M_size.
    """

    rep: np.ndarray = field(repr=False)
    level: int
    size: int
    algebra: BaseAlgebra | None = None

    def __post_init__(self):
        self.rep = linalg.as_matrix(self.rep)
        if self.rep.shape != (2 * self.N, 2 * self.N):
            raise ValueError(f"representative has shape {self.rep.shape}, expected {(2 * self.N,) * 2}")
        if linalg.is_singular(self.rep):
            raise linalg.SingularMatrix("representative is not invertible")

    @property
    def N(self) -> int:
        return self.level * self.size

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        N = self.N
        r = self.rep
        return r[:N, :N], r[:N, N:], r[N:, :N], r[N:, N:]

    def column(self) -> np.ndarray:
        return self.rep[:, self.N :]

    def _like(self, rep: np.ndarray, level: int | None = None) -> "GrassPoint":
        return GrassPoint(rep, self.level if level is None else level, self.size, self.algebra)

    # constructors

    @classmethod
    def from_affine(cls, beta: MatOverB, chart: str = "graph") -> "GrassPoint":
        """Affine point beta.

        chart="graph": column (1, beta), representative [[0, 1], [1, beta]]; the
        resolvent of a graph point at it is (beta - Y)^{-1}.
        chart="upper": representative [[1, beta], [0, 1]], column (beta, 1).
        """
        N = beta.n * beta.algebra.k
        eye = np.eye(N, dtype=complex)
        zero = np.zeros((N, N), dtype=complex)
        x = beta.dense()
        if chart == "graph":
            rep = linalg.block([[zero, eye], [eye, x]])
        elif chart == "upper":
            rep = linalg.block([[eye, x], [zero, eye]])
        else:
            raise ValueError(f"unknown chart {chart!r}")
        return cls(rep, beta.n, beta.algebra.k, beta.algebra)

    @classmethod
    def graph_of(cls, y: np.ndarray) -> "GrassPoint":
        """Level-one point [[0, 1], [1, Y]] over the matrix algebra of Y."""
        y = linalg.as_matrix(y)
        d = y.shape[0]
        eye = np.eye(d, dtype=complex)
        return cls(linalg.block([[np.zeros_like(eye), eye], [eye, y]]), 1, d, None)

    @classmethod
    def over_e(cls, rep: np.ndarray, level: int = 1) -> "GrassPoint":
        rep = linalg.as_matrix(rep)
        return cls(rep, level, rep.shape[0] // (2 * level), None)

    def affine_value(self) -> MatOverB:
        """beta with column equivalent to (1, beta); raises if b is singular."""
        _, b, _, d = self.blocks()
        x = d @ linalg.inverse(b)
        return MatOverB.from_dense(self.algebra, x, tol=1e-9)

    def fold(self, n: int) -> "GrassPoint":
        """n-fold direct sum, with representative blocks I_n (x) block."""
        a, b, c, d = self.blocks()
        eye = np.eye(n)
        rep = linalg.block([[np.kron(eye, a), np.kron(eye, b)], [np.kron(eye, c), np.kron(eye, d)]])
        return GrassPoint(rep, self.level * n, self.size, self.algebra)

    # equivalence

    def equivalent(self, other: "GrassPoint", tol: float = EQUIV_TOL) -> bool:
        """Least squares for t in (b1; d1) t = (b2; d2); accept on small residual and invertible t."""
        if other.rep.shape != self.rep.shape:
            return False
        c1, c2 = self.column(), other.column()
        t, *_ = np.linalg.lstsq(c1, c2, rcond=None)
        scale = max(1.0, float(np.max(np.abs(c2))))
        if np.max(np.abs(c1 @ t - c2)) > tol * scale:
            return False
        return not linalg.is_singular(t)

    # operations

    def direct_sum(self, other: "GrassPoint") -> "GrassPoint":
        if other.size != self.size or other.algebra != self.algebra:
            raise ValueError("algebra mismatch")
        a1, b1, c1, d1 = self.blocks()
        a2, b2, c2, d2 = other.blocks()
        ds = linalg.direct_sum
        rep = linalg.block([[ds(a1, a2), ds(b1, b2)], [ds(c1, c2), ds(d1, d2)]])
        return GrassPoint(rep, self.level + other.level, self.size, self.algebra)

    def lift_gl2(self, g: np.ndarray) -> np.ndarray:
        """Realize g acting on this point's representative.

        g may be a scalar 2 x 2 matrix, a 2 x 2 matrix of algebra elements
        (shape 2s x 2s, acting as I_n (x) g), or already 2N x 2N.
        """
        g = np.asarray(g, dtype=complex)
        s, n, N = self.size, self.level, self.N
        if g.shape == (2 * N, 2 * N):
            return g
        if g.shape == (2, 2):
            return np.kron(g, np.eye(N))
        if g.shape == (2 * s, 2 * s):
            eye = np.eye(n)
            return linalg.block([[np.kron(eye, g[:s, :s]), np.kron(eye, g[:s, s:])],
                                 [np.kron(eye, g[s:, :s]), np.kron(eye, g[s:, s:])]])
        raise ValueError(f"cannot act with a matrix of shape {g.shape}")

    def gl2_action(self, g: np.ndarray) -> "GrassPoint":
        return self._like(self.lift_gl2(g) @ self.rep)

    def gl2n_action(self, g: np.ndarray) -> "GrassPoint":
        """Action of a scalar matrix in GL(2n; C) (block rows: n top, n bottom)."""
        return self._like(np.kron(np.asarray(g, dtype=complex), np.eye(self.size)) @ self.rep)

    def scalar_action(self, s: np.ndarray) -> "GrassPoint":
        """s . pi = diag(s (x) 1, s (x) 1) pi for s in GL(n; C)."""
        sk = np.kron(np.asarray(s, dtype=complex), np.eye(self.size))
        return self._like(linalg.direct_sum(sk, sk) @ self.rep)

    def orthogonal(self) -> "GrassPoint":
        """[[z^*, x^*], [t^*, y^*]] where [[x, y], [z, t]] is the inverse representative."""
        N = self.N
        inv = linalg.inverse(self.rep)
        x, y, z, t = inv[:N, :N], inv[:N, N:], inv[N:, :N], inv[N:, N:]
        h = lambda m: m.conj().T
        return self._like(linalg.block([[h(z), h(x)], [h(t), h(y)]]))

    def star(self) -> "GrassPoint":
        return self._like(np.kron(W, np.eye(self.N)) @ self.orthogonal().rep)

    def with_column_scaled(self, t: np.ndarray) -> "GrassPoint":
        """Same class: column (b, d) replaced by (b t, d t); first column untouched if still invertible."""
        N = self.N
        rep = self.rep.copy()
        rep[:, N:] = rep[:, N:] @ t
        return self._like(rep)


def transversal(p: GrassPoint, q: GrassPoint) -> bool:
    if p.rep.shape != q.rep.shape:
        raise ValueError("level or algebra mismatch")
    return not linalg.is_singular(np.hstack([p.column(), q.column()]))


# resolvents


def _lift(sigma: GrassPoint, emb: Embedding | None):
    _, b, _, d = sigma.blocks()
    if emb is None:
        return b, d
    return emb.lift_dense(b), emb.lift_dense(d)


def stacked(pi: GrassPoint, sigma: GrassPoint, emb: Embedding | None = None) -> np.ndarray:
    """[[I_n (x) b, beta], [I_n (x) d, delta]] over M_n(E)."""
    n = sigma.level
    _, b, _, d = pi.blocks()
    beta, delta = _lift(sigma, emb)
    eye = np.eye(n)
    return linalg.block([[np.kron(eye, b), beta], [np.kron(eye, d), delta]])


def in_resolvent_set(pi: GrassPoint, sigma: GrassPoint, emb: Embedding | None = None) -> bool:
    return not linalg.is_singular(stacked(pi, sigma, emb))


def resolvent(pi: GrassPoint, sigma: GrassPoint, emb: Embedding | None = None) -> np.ndarray:
    """beta zeta, zeta the lower-right block of the inverse stacked matrix; an element of M_n(E)."""
    s = stacked(pi, sigma, emb)
    M = s.shape[0] // 2
    try:
        inv = linalg.inverse(s)
    except linalg.SingularMatrix as exc:
        raise NotInResolventSet(str(exc)) from exc
    beta, _ = _lift(sigma, emb)
    return beta @ inv[M:, M:]


def resolvent_closed_form(pi: GrassPoint, sigma: GrassPoint, emb: Embedding | None = None) -> np.ndarray:
    """beta (x beta + y delta)^{-1} y, with [[x, y], [z, t]] the inverse of the n-fold representative."""
    n = sigma.level
    inv = linalg.inverse(pi.rep)
    s = pi.N
    x, y = np.kron(np.eye(n), inv[:s, :s]), np.kron(np.eye(n), inv[:s, s:])
    beta, delta = _lift(sigma, emb)
    try:
        core = linalg.inverse(x @ beta + y @ delta)
    except linalg.SingularMatrix as exc:
        raise NotInResolventSet(str(exc)) from exc
    return beta @ core @ y


def e_tensor(r1: np.ndarray, r2: np.ndarray, d: int) -> np.ndarray:
    """R1 (x)_E R2 as an array [i, j, k, l, a, c] = (R1_ij R2_kl)_ac."""
    m, n = r1.shape[0] // d, r2.shape[0] // d
    return np.einsum("iajx,kxlc->ijklac", r1.reshape(m, d, m, d), r2.reshape(n, d, n, d))


def probe_point(s1: GrassPoint, s2: GrassPoint, t: np.ndarray) -> GrassPoint:
    """Direct sum of s1 and s2 with t b_2 added in the off-diagonal delta slot."""
    a1, b1, c1, d1 = s1.blocks()
    a2, b2, c2, d2 = s2.blocks()
    N1, N2 = s1.N, s2.N
    z12, z21 = np.zeros((N1, N2)), np.zeros((N2, N1))
    tb2 = np.kron(t, np.eye(s1.size)) @ b2
    rep = linalg.block([
        [a1, z12, b1, z12],
        [z21, a2, z21, b2],
        [c1, z12, d1, tb2],
        [z21, c2, z21, d2],
    ])
    return GrassPoint(rep, s1.level + s2.level, s1.size, s1.algebra)


def grass_diff_quotient(fn: Callable[[GrassPoint], np.ndarray], s1: GrassPoint, s2: GrassPoint,
                        out_size: int = 1, eps: float = 1.0) -> np.ndarray:
    """Difference quotient of a function on Grassmannian points, as [i, j, k, l, a, b].

    The value at the probe point has upper-right block T(t) linear in t; entry
    [i, j, k, l] is the (i, l) block of T(e_jk), of size out_size.
    """
    m, n, o = s1.level, s2.level, out_size
    out = np.zeros((m, m, n, n, o, o), dtype=complex)
    for j, k in itertools.product(range(m), range(n)):
        t = np.zeros((m, n))
        t[j, k] = eps
        val = fn(probe_point(s1, s2, t))
        block = val[: m * o, m * o :].reshape(m, o, n, o) / eps
        out[:, j, k, :, :, :] = block.transpose(0, 2, 1, 3)
    return out


# stably matricial sets


def g_pq(p: int, q: int) -> np.ndarray:
    """Scalar permutation exchanging the q-parts of the two block rows."""
    n = p + q
    g = np.zeros((2 * n, 2 * n), dtype=complex)
    g[:p, :p] = np.eye(p)
    g[p:n, n + p :] = np.eye(q)
    g[n : n + p, n : n + p] = np.eye(p)
    g[n + p :, p:n] = np.eye(q)
    return g


def s_pq(p: int, q: int) -> np.ndarray:
    s = np.zeros((p + q, p + q), dtype=complex)
    s[:p, q:] = np.eye(p)
    s[p:, :q] = np.eye(q)
    return s


def _mobius(sigma: GrassPoint, ginv: np.ndarray) -> np.ndarray | None:
    col = ginv @ sigma.column()
    N = sigma.N
    top, bottom = col[:N], col[N:]
    if linalg.is_singular(top):
        return None
    return bottom @ linalg.inverse(top)


def in_disk(sigma: GrassPoint, which: str, p: int | None = None, q: int | None = None,
            tol: float = 1e-10) -> bool:
    """Membership in D0, Dinf, U, H+, H-, Delta (needs p, q) or X (needs p, q)."""
    N, n, s = sigma.N, sigma.level, sigma.size
    unitary = which == "U"
    if which in ("D0", "U"):
        g = np.eye(2 * N)
    elif which == "Dinf":
        g = np.kron(FLIP, np.eye(N))
    elif which == "H+":
        g = np.kron(CAYLEY, np.eye(N))
    elif which == "H-":
        g = np.kron(CAYLEY_MINUS, np.eye(N))
    elif which in ("Delta", "X"):
        if p is None or q is None or p + q != n:
            raise ValueError("Delta/X membership needs p + q equal to the level")
        g = np.kron(g_pq(p, q), np.eye(s))
        if which == "X":
            g = np.kron(CAYLEY, np.eye(N)) @ g
    else:
        raise ValueError(f"unknown set {which!r}")
    x = _mobius(sigma, linalg.inverse(g))
    if x is None:
        return False
    if unitary:
        return bool(np.max(np.abs(x @ x.conj().T - np.eye(N))) <= tol * max(1.0, np.max(np.abs(x))))
    return linalg.spectral_norm(x) < 1.0


def delta_point(m: MatOverB, p: int, q: int) -> GrassPoint:
    """Point of Delta_{p,q} parametrized by [[x, y], [z, t]] in D0 at level p + q."""
    alg = m.algebra
    k = alg.k
    P, Q = p * k, q * k
    dense = m.dense()
    x, y, z, t = dense[:P, :P], dense[:P, P:], dense[P:, :P], dense[P:, P:]
    ip, iq = np.eye(P), np.eye(Q)
    zpq, zqp, zpp, zqq = np.zeros((P, Q)), np.zeros((Q, P)), np.zeros((P, P)), np.zeros((Q, Q))
    rep = linalg.block([
        [zpp, zpq, ip, zpq],
        [zqp, iq, z, t],
        [ip, zpq, x, y],
        [zqp, zqq, zqp, iq],
    ])
    return GrassPoint(rep, p + q, k, alg)


# resolvent-level identities


def unitary_identities(u: np.ndarray, sigma: GrassPoint, emb: Embedding) -> dict:
    """Residuals of the identities linking resolvents of u, u^{-1} and the Cayley transform chi.

    sigma^{-1} = C(flip) sigma, nu = C(cayley) sigma, chi = C(cayley) u.
    The Cayley identity is checked with nu's (1,2) block equal to i(delta - beta),
    which is what the action produces; the opposite-sign variant is reported too.
    """
    n = sigma.level
    d = u.shape[0]
    ui = u.conj().T
    pu, pui = GrassPoint.graph_of(u), GrassPoint.graph_of(ui)
    chi = pu.gl2_action(CAYLEY)
    sig_inv = sigma.gl2_action(FLIP)
    nu = sigma.gl2_action(CAYLEY)
    report: dict = {"in_resolvent_set": True}
    try:
        r_u = resolvent(pu, sigma, emb)
        r_ui = resolvent(pui, sig_inv, emb)
        r_chi = resolvent(chi, nu, emb)
    except NotInResolventSet:
        report["in_resolvent_set"] = False
        return report
    one = np.eye(n * d)
    iu, iui = np.kron(np.eye(n), u), np.kron(np.eye(n), ui)
    lhs_a = iu @ r_u @ iu + iu
    report["inverse_identity"] = float(np.max(np.abs(lhs_a + r_ui)))
    rhs_c = 0.5j * r_ui @ (one - iui) - 0.5j * r_u @ (one - iu)
    report["cayley_identity"] = float(np.max(np.abs(r_chi - rhs_c)))
    report["cayley_identity_opposite_sign"] = float(np.max(np.abs(r_chi + rhs_c)))
    return report


def resolvent_star_identity(pi: GrassPoint, sigma: GrassPoint, emb: Embedding | None = None) -> dict:
    ps, ss = pi.star(), sigma.star()
    lhs = resolvent(pi, sigma, emb).conj().T
    return {
        "star_in_resolvent_set": in_resolvent_set(ps, ss, emb),
        "residual": float(np.max(np.abs(lhs - resolvent(ps, ss, emb)))),
    }
