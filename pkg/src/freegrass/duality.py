"""The duality transform U(phi) = (id (x) phi) of Grassmannian resolvents and
the identities it satisfies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .algebra import BaseAlgebra, Embedding, Functional
from .calculus import FD_STEP, derivative_at_zero
from .grassmann import GrassPoint, e_tensor, grass_diff_quotient, resolvent


@dataclass
class DualitySetup:
    algebra: BaseAlgebra
    d: int
    pi: GrassPoint
    phi: Functional

    def __post_init__(self):
        self.emb = Embedding(self.algebra, self.d)
        _check_embedding(self.emb)
        if self.pi.size != self.d or self.pi.level != 1:
            raise ValueError("pi must be a level-one point over M_d")
        if self.phi.size != self.d:
            raise ValueError("functional lives on the wrong algebra")

    def with_pi(self, pi: GrassPoint) -> "DualitySetup":
        return DualitySetup(self.algebra, self.d, pi, self.phi)

    def with_phi(self, phi: Functional) -> "DualitySetup":
        return DualitySetup(self.algebra, self.d, self.pi, phi)

    def star(self) -> "DualitySetup":
        return DualitySetup(self.algebra, self.d, self.pi.star(), self.phi.star())


def _check_embedding(emb: Embedding, tol: float = 1e-12):
    rng = np.random.default_rng(0)
    a, b = emb.algebra.random_element(rng), emb.algebra.random_element(rng)
    ok = (
        np.max(np.abs(emb(a @ b) - emb(a) @ emb(b))) <= tol * 100
        and np.max(np.abs(emb(a.conj().T) - emb(a).conj().T)) <= tol
        and np.max(np.abs(emb(emb.algebra.unit()) - np.eye(emb.d))) <= tol
    )
    if not ok:
        raise ValueError("embedding is not a unital *-homomorphism")


def transform(setup: DualitySetup, sigma: GrassPoint) -> np.ndarray:
    return setup.phi.apply_entrywise(resolvent(setup.pi, sigma, setup.emb))


def _scaled(point: GrassPoint, t: float) -> GrassPoint:
    return point.gl2_action(np.diag([1.0, math.exp(t)]))


def _residual(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def comultiplication_sides(setup: DualitySetup, s1: GrassPoint, s2: GrassPoint) -> tuple[np.ndarray, np.ndarray]:
    """(id (x) id (x) phi)(R(s1) (x)_E R(s2)) and -dU(phi)(s1; s2), both as [i, j, k, l]."""
    d = setup.d
    r1, r2 = resolvent(setup.pi, s1, setup.emb), resolvent(setup.pi, s2, setup.emb)
    lhs = np.einsum("ijklac,ac->ijkl", e_tensor(r1, r2, d), setup.phi.dual)
    dq = grass_diff_quotient(lambda s: transform(setup, s), s1, s2)[..., 0, 0]
    return lhs, -dq


def verify_comultiplication(setup: DualitySetup, s1: GrassPoint, s2: GrassPoint) -> float:
    return _residual(*comultiplication_sides(setup, s1, s2))


def verify_trace_symmetry(setup: DualitySetup, s1: GrassPoint, s2: GrassPoint) -> float:
    """dU(s1; s2) against the flipped dU(s2; s1)."""
    f = lambda s: transform(setup, s)
    k12 = grass_diff_quotient(f, s1, s2)[..., 0, 0]
    k21 = grass_diff_quotient(f, s2, s1)[..., 0, 0]
    return _residual(k12, k21.transpose(2, 3, 0, 1))


def lambda_duality_sides(setup: DualitySetup, sigma: GrassPoint, h: float = FD_STEP) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the coderivation duality, by central differences.

    Left: (id (x) phi)[R(pi)(sigma) + d/dt R(diag(1, e^t) pi)(sigma)], deforming pi.
    Right: U(phi)(sigma) - Lambda U(phi)(sigma), with Lambda U = d/dt e^t U(diag(1, e^t) sigma).
    """
    u0 = transform(setup, sigma)
    dpi = derivative_at_zero(lambda t: transform(setup.with_pi(_scaled(setup.pi, t)), sigma), h)
    lhs = u0 + dpi
    lam = derivative_at_zero(lambda t: math.exp(t) * transform(setup, _scaled(sigma, t)), h)
    return lhs, u0 - lam


def verify_lambda_duality(setup: DualitySetup, sigma: GrassPoint) -> float:
    return _residual(*lambda_duality_sides(setup, sigma))


def verify_involution(setup: DualitySetup, sigma: GrassPoint) -> float:
    """U_pi(phi)(sigma)^* against U_{pi^*}(phi^*)(sigma^*)."""
    lhs = transform(setup, sigma).conj().T
    return _residual(lhs, transform(setup.star(), sigma.star()))


def choi_matrix(setup: DualitySetup, sigma: GrassPoint) -> np.ndarray:
    """Choi matrix sum_jk Phi(e_jk) (x) e_jk of Phi = -(difference quotient of U(phi) at (sigma, sigma^*))."""
    k = grass_diff_quotient(lambda s: transform(setup, s), sigma, sigma.star())[..., 0, 0]
    n = sigma.level
    # Phi(e_jk)[i, l] = -k[i, j, k, l]; row (i, j), column (l, k)
    return -k.transpose(0, 1, 3, 2).reshape(n * n, n * n)


def dual_positivity_check(setup: DualitySetup, sigma: GrassPoint) -> dict:
    theta = choi_matrix(setup, sigma)
    theta = (theta + theta.conj().T) / 2 if np.max(np.abs(theta - theta.conj().T)) < 1e-8 * max(1, np.max(np.abs(theta))) else theta
    try:
        lam = linalg.hermitian_min_eigenvalue(theta)
    except linalg.NotHermitian:
        # a non-Hermitian Choi matrix cannot be completely positive
        return {"is_cp": False, "min_choi_eigenvalue": float("nan"), "hermitian": False}
    return {"is_cp": lam >= -1e-8, "min_choi_eigenvalue": lam, "hermitian": True}


def injectivity_rank(setup: DualitySetup, sigmas: list[GrassPoint]) -> int:
    """Numerical rank of phi -> (U(phi)(sigma))_sigma over the d^2 matrix units."""
    d = setup.d
    cols = []
    for a in range(d):
        for b in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = 1.0
            s = setup.with_phi(Functional(e))
            cols.append(np.concatenate([transform(s, sg).ravel() for sg in sigmas]))
    return int(np.linalg.matrix_rank(np.array(cols).T, tol=1e-9))
