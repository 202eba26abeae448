"""Numerical fully matricial calculus: block-embedding difference quotients,
the scaling coderivation, and Taylor coefficient families."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import BaseAlgebra, MatOverB
from .ncpoly import NCPoly

FD_STEP = 1e-5
PROBE_EPS = (1e-3, 2e-3)
LINEARITY_TOL = 1e-8
COASSOC_TOL = 1e-8


class DomainError(ValueError):
    pass


class NonlinearProbe(ArithmeticError):
    pass


class CoassociativityViolation(ArithmeticError):
    pass


@dataclass
class MatricialFn:
    """Scalar-valued fully matricial function given by an evaluator on M_n(B).

    ``exact`` marks evaluators whose off-diagonal block is exactly linear in
    the probe (polynomials, resolvents); they are probed once at unit scale.
    """

    algebra: BaseAlgebra
    evaluator: Callable[[MatOverB], np.ndarray]
    radius: float = math.inf
    exact: bool = False

    def __call__(self, beta: MatOverB) -> np.ndarray:
        if beta.norm() >= self.radius:
            raise DomainError(f"norm {beta.norm():.3g} outside radius {self.radius}")
        return np.asarray(self.evaluator(beta), dtype=complex)

    @classmethod
    def from_poly(cls, p: NCPoly) -> "MatricialFn":
        return cls(p.algebra, p.evaluate, math.inf, True)

    def __mul__(self, other: "MatricialFn") -> "MatricialFn":
        return MatricialFn(
            self.algebra,
            lambda b: self(b) @ other(b),
            min(self.radius, other.radius),
            self.exact and other.exact,
        )


def upper_block_point(b1: MatOverB, b2: MatOverB, t: np.ndarray) -> MatOverB:
    """The level m+n point [[b1, t (x) 1], [0, b2]]."""
    return MatOverB.block(b1.algebra, [[b1, t], [None, b2]])


def _unit(m: int, n: int, j: int, k: int) -> np.ndarray:
    t = np.zeros((m, n), dtype=complex)
    t[j, k] = 1.0
    return t


def diff_quotient(f: MatricialFn, b1: MatOverB, b2: MatOverB, check_linear: bool = False) -> np.ndarray:
    """Difference quotient as a 4-index array K[i, j, k, l] = T(e_jk)[i, l].

    T(t) is the upper-right block of f at the block point; it is linear in t.
    """
    m, n = b1.n, b2.n
    out = np.zeros((m, m, n, n), dtype=complex)
    for j, k in itertools.product(range(m), range(n)):
        t = _unit(m, n, j, k)
        if f.exact:
            block = f(upper_block_point(b1, b2, t))[:m, m:]
            if check_linear:
                e1, e2 = PROBE_EPS
                y1 = f(upper_block_point(b1, b2, e1 * t))[:m, m:] / e1
                y2 = f(upper_block_point(b1, b2, e2 * t))[:m, m:] / e2
                scale = max(1.0, np.max(np.abs(y1)))
                if np.max(np.abs(y1 - y2)) > LINEARITY_TOL * scale:
                    raise NonlinearProbe("off-diagonal block is not linear in the probe")
        else:
            e = PROBE_EPS[0]
            plus = f(upper_block_point(b1, b2, e * t))[:m, m:]
            minus = f(upper_block_point(b1, b2, -e * t))[:m, m:]
            block = (plus - minus) / (2 * e)
        out[:, j, k, :] = block
    return out


def diff_quotient_nested(f: MatricialFn, b1: MatOverB, b2: MatOverB, b3: MatOverB,
                         tol: float = COASSOC_TOL) -> np.ndarray:
    """Second difference quotient, a 6-index array over M_m (x) M_n (x) M_p.

    Both iterated orders are computed from the 3 x 3 block point with probes
    in the (1,2) and (2,3) slots; they must agree.  The second order is probed
    at twice the scale: for a fully matricial evaluator the corner block is
    exactly bilinear in the two probes, so any disagreement flags an evaluator
    that is not.
    """
    m, n, p = b1.n, b2.n, b3.n
    e = 1.0 if f.exact else PROBE_EPS[0]
    left = np.zeros((m, m, n, n, p, p), dtype=complex)
    right = np.zeros_like(left)
    for j, k, l, r in itertools.product(range(m), range(n), range(n), range(p)):
        s = e * _unit(m, n, j, k)
        t = e * _unit(n, p, l, r)
        # (id (x) d) d: inner point [[b2, t],[0, b3]], outer probe s against it
        inner = upper_block_point(b2, b3, t)
        pt = upper_block_point(b1, inner, np.hstack([s, np.zeros((m, p))]))
        val = f(pt)
        # coefficient of e_{i j} (x) e_{k l} (x) e_{r q}: block (1,3) of the 3x3 block value
        left[:, j, k, l, r, :] = val[:m, m + n :] / e**2
        # (d (x) id) d: inner point [[b1, s],[0, b2]], outer probe t
        inner2 = upper_block_point(b1, b2, 2 * s)
        pt2 = upper_block_point(inner2, b3, np.vstack([np.zeros((m, p)), 2 * t]))
        val2 = f(pt2)
        right[:, j, k, l, r, :] = val2[:m, m + n :] / (2 * e) ** 2
    scale = max(1.0, float(np.max(np.abs(left), initial=0.0)))
    if np.max(np.abs(left - right), initial=0.0) > tol * scale:
        raise CoassociativityViolation("iterated difference quotients disagree")
    return left


def tensor_to_map(k: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """alpha: K -> the map t -> sum K[i,j,k,l] t_jk e_il."""
    return lambda t: np.einsum("ijkl,jk->il", k, t)


def kron_form(k: np.ndarray) -> np.ndarray:
    """Kronecker form in M_m (x) M_n of a 4-index array."""
    m, n = k.shape[0], k.shape[2]
    return k.transpose(0, 2, 1, 3).reshape(m * n, m * n)


def _richardson(g: Callable[[float], np.ndarray], h: float = FD_STEP) -> np.ndarray:
    d1 = (g(h) - g(-h)) / (2 * h)
    d2 = (g(h / 2) - g(-h / 2)) / h
    return (4 * d2 - d1) / 3


def derivative_at_zero(g: Callable[[float], np.ndarray], h: float = FD_STEP) -> np.ndarray:
    return _richardson(g, h)


def lambda_numeric(f: MatricialFn, beta: MatOverB, h: float = FD_STEP) -> np.ndarray:
    """d/dt e^t f(e^t beta) at t = 0."""
    return _richardson(lambda t: math.exp(t) * f(beta * math.exp(t)), h)


@dataclass
class CoefficientFamily:
    """Scalar-valued coefficient family: coefficients[m] has shape (dim,)*m and
    coefficients[m][j_1..j_m] = alpha_m(b_{j_1}, ..., b_{j_m}) on the canonical basis."""

    algebra: BaseAlgebra
    coefficients: list[np.ndarray] = field(default_factory=list)

    @property
    def max_degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def from_poly(cls, p: NCPoly, max_degree: int | None = None) -> "CoefficientFamily":
        deg = p.degree if max_degree is None else max_degree
        dim = p.algebra.dim
        coeffs = [np.zeros((dim,) * m, dtype=complex) for m in range(max(deg, 0) + 1)]
        for w, c in p.terms.items():
            if len(w) <= deg:
                coeffs[len(w)][w] += c
        return cls(p.algebra, coeffs)

    def to_poly(self, cap: int | None = None) -> NCPoly:
        terms = {}
        for arr in self.coefficients:
            arr = np.asarray(arr)
            if arr.ndim == 0:
                if arr != 0:
                    terms[()] = complex(arr)
                continue
            for idx in zip(*np.nonzero(arr)):
                terms[tuple(int(i) for i in idx)] = arr[idx]
        return NCPoly(self.algebra, terms, cap=cap if cap is not None else max(self.max_degree, 12))

    def max_difference(self, other: "CoefficientFamily") -> float:
        out = 0.0
        for m in range(max(len(self.coefficients), len(other.coefficients))):
            a = self.coefficients[m] if m < len(self.coefficients) else 0
            b = other.coefficients[m] if m < len(other.coefficients) else 0
            out = max(out, float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0)))
        return out

    def __add__(self, other: "CoefficientFamily") -> "CoefficientFamily":
        deg = min(self.max_degree, other.max_degree)
        return CoefficientFamily(self.algebra, [self.coefficients[m] + other.coefficients[m] for m in range(deg + 1)])

    def to_json(self) -> dict:
        return {
            "algebra": {"kind": self.algebra.kind, "k": self.algebra.k},
            "coefficients": [
                {"degree": m, "re": np.real(a).ravel().tolist(), "im": np.imag(a).ravel().tolist()}
                for m, a in enumerate(self.coefficients)
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "CoefficientFamily":
        if isinstance(data, str):
            data = json.loads(data)
        alg = BaseAlgebra(data["algebra"]["kind"], int(data["algebra"]["k"]))
        coeffs = []
        for entry in sorted(data["coefficients"], key=lambda e: e["degree"]):
            m = entry["degree"]
            arr = np.array(entry["re"]) + 1j * np.array(entry["im"])
            coeffs.append(arr.reshape((alg.dim,) * m))
        return cls(alg, coeffs)


def nilpotent_point(algebra: BaseAlgebra, basis_indices: Sequence[int]) -> MatOverB:
    """sum_i e_{i,i+1} (x) b_{j_i} at level len+1."""
    m = len(basis_indices)
    basis = algebra.basis()
    n = m + 1
    dense = np.zeros((n * algebra.k, n * algebra.k), dtype=complex)
    for i, j in enumerate(basis_indices):
        e = np.zeros((n, n))
        e[i, i + 1] = 1.0
        dense += np.kron(e, basis[j])
    return MatOverB.from_dense(algebra, dense)


def extract_coefficients(f: MatricialFn, max_degree: int) -> CoefficientFamily:
    """Taylor coefficients at the origin from corner entries at nilpotent points.

    f_{m+1}(z beta) has corner entry z^m alpha_m(b_1, ..., b_m) and no other
    powers of z, so m+1 evaluations on a circle followed by a discrete
    Fourier inversion recover it exactly up to roundoff.
    """
    fams = _extract(f.algebra, lambda beta, m: f(beta)[0, m:m + 1], f.radius, max_degree, 1)
    return fams[0]


def extract_b_valued(algebra: BaseAlgebra, evaluator: Callable[[MatOverB], MatOverB], max_degree: int,
                     radius: float = math.inf) -> list[CoefficientFamily]:
    """Coefficient families of a B-valued function, one per dual-basis coordinate."""
    k = algebra.k

    def corner(beta: MatOverB, m: int) -> np.ndarray:
        val = evaluator(beta).dense()
        n = m + 1
        return algebra.coords(val.reshape(n, k, n, k)[0, :, m, :])

    return _extract(algebra, corner, radius, max_degree, algebra.dim)


def _extract(alg: BaseAlgebra, corner: Callable[[MatOverB, int], np.ndarray], radius: float,
             max_degree: int, width: int) -> list[CoefficientFamily]:
    dim = alg.dim
    zero = MatOverB.zeros(alg, 1)
    out = [[np.asarray(v, dtype=complex).reshape(())] for v in corner(zero, 0)]
    for m in range(1, max_degree + 1):
        r = 1.0 if math.isinf(radius) else min(1.0, 0.5 * radius / m)
        roots = np.exp(2j * np.pi * np.arange(m + 1) / (m + 1))
        arr = np.zeros((width,) + (dim,) * m, dtype=complex)
        for idx in itertools.product(range(dim), repeat=m):
            beta = nilpotent_point(alg, idx)
            acc = np.zeros(width, dtype=complex)
            for w in roots:
                acc += np.asarray(corner(beta * (r * w), m)) * w ** (-m)
            arr[(slice(None),) + idx] = acc / ((m + 1) * r**m)
        for c in range(width):
            out[c].append(arr[c])
    return [CoefficientFamily(alg, coeffs) for coeffs in out]


def compose_families(outer: CoefficientFamily | Sequence[CoefficientFamily],
                     inner: Sequence[CoefficientFamily]) -> CoefficientFamily | list[CoefficientFamily]:
    """Coefficients of outer(inner(.)) from the chain rule for coefficient families.

    ``inner`` is B-valued: one scalar family per dual-basis coordinate of the
    output, and must vanish at the origin.  ``outer`` is a scalar family or a
    list of them (B-valued).
    """
    if isinstance(outer, CoefficientFamily):
        return _compose_scalar(outer, inner)
    return [_compose_scalar(o, inner) for o in outer]


def _compose_scalar(outer: CoefficientFamily, inner: Sequence[CoefficientFamily]) -> CoefficientFamily:
    alg = inner[0].algebra
    dim = alg.dim
    if len(inner) != outer.algebra.dim:
        raise ValueError("inner family must have one coordinate per generator of the outer family")
    for fam in inner:
        if abs(complex(fam.coefficients[0])) > 0:
            raise ValueError("inner family must send the origin to the origin")
    deg = min(outer.max_degree, min(f.max_degree for f in inner))
    stacked = [None] + [np.stack([f.coefficients[i] for f in inner]) for i in range(1, deg + 1)]
    coeffs = [np.asarray(outer.coefficients[0], dtype=complex).reshape(())]
    for k in range(1, deg + 1):
        gamma = np.zeros((dim,) * k, dtype=complex)
        for comp in _compositions(k):
            res = outer.coefficients[len(comp)]
            for i in comp:
                res = np.tensordot(res, stacked[i], axes=([0], [0]))
            gamma = gamma + res
        coeffs.append(gamma)
    return CoefficientFamily(alg, coeffs)


def _compositions(k: int):
    """Ordered tuples of positive integers summing to k."""
    if k == 0:
        yield ()
        return
    for first in range(1, k + 1):
        for rest in _compositions(k - first):
            yield (first,) + rest


def b_valued_evaluator(polys: Sequence[NCPoly]) -> Callable[[MatOverB], MatOverB]:
    alg = polys[0].algebra
    return lambda beta: MatOverB.from_coords(alg, [p.evaluate(beta) for p in polys])


def truncation_bound(c: float, r: float, r_outer: float, n: int) -> float:
    """C (R/R')^N (1 - R/R')^{-1}."""
    q = r / r_outer
    return c * q**n / (1 - q)
