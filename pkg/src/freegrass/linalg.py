"""Dense complex linear algebra used by every other module."""

from __future__ import annotations

import warnings
import zlib

import numpy as np
import scipy.linalg as sla

SINGULAR_RTOL = 1e-12
HERMITIAN_TOL = 1e-10


class SingularMatrix(ArithmeticError):
    pass


class NotHermitian(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def is_singular(a: np.ndarray) -> bool:
    """LU with partial pivoting; a pivot below 1e-12 * max|a_ij| counts as singular."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, _ = sla.lu_factor(a, check_finite=False)
    return bool(np.min(np.abs(np.diag(lu))) < SINGULAR_RTOL * scale)


def inverse(a) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < SINGULAR_RTOL * scale:
        raise SingularMatrix("pivot below singularity threshold")
    return sla.lu_solve((lu, piv), np.eye(a.shape[0], dtype=complex), check_finite=False)


def solve(a, b) -> np.ndarray:
    """a^{-1} b with the same singularity policy as `inverse`."""
    a = as_matrix(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < SINGULAR_RTOL * scale:
        raise SingularMatrix("pivot below singularity threshold")
    return sla.lu_solve((lu, piv), np.asarray(b, dtype=complex), check_finite=False)


def spectral_norm(a) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_min_eigenvalue(a) -> float:
    a = as_matrix(a)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def _entropy(key: int | str) -> int:
    return zlib.crc32(key.encode()) if isinstance(key, str) else int(key)


def stream(seed: int, *keys: int | str) -> np.random.Generator:
    """Independent RNG stream for (seed, *keys); string keys are hashed stably."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(_entropy, keys)]))


def ginibre(n: int, rng: np.random.Generator, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of U(n): QR of a Ginibre matrix with phase-corrected columns."""
    if n < 1:
        raise ValueError("n must be positive")
    q, r = np.linalg.qr(ginibre(n, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def block(rows) -> np.ndarray:
    return np.block([[np.asarray(x, dtype=complex) for x in row] for row in rows])


def direct_sum(*mats) -> np.ndarray:
    return sla.block_diag(*[np.asarray(m, dtype=complex) for m in mats])
