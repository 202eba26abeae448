"""Fully matricial functions over finite-dimensional C*-algebras: noncommutative
polynomials, Grassmannian resolvents, the duality transform, and free probability
experiments."""

__version__ = "0.1.0"

from .algebra import BaseAlgebra, Embedding, Functional, MatOverB
from .calculus import CoefficientFamily, MatricialFn, compose_families, diff_quotient, extract_coefficients
from .grassmann import GrassPoint, resolvent
from .ncpoly import NCPoly, NCTensor

__all__ = [
    "BaseAlgebra", "Embedding", "Functional", "MatOverB", "CoefficientFamily", "MatricialFn", "compose_families",
    "diff_quotient", "extract_coefficients", "GrassPoint", "resolvent", "NCPoly", "NCTensor",
]
