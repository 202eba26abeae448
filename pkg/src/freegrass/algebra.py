"""Finite-dimensional base algebras B (M_k or C^k), matrices over them, and functionals.

Elements of B are always handled as k x k complex matrices; for the diagonal
kind they are diagonal.  An element of M_n(B) lives in M_n (x) B with the
matricial index outermost, so A (x) b is ``np.kron(A, b)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg

FULL = "full"
DIAG = "diag"


@dataclass(frozen=True)
class BaseAlgebra:
    kind: str
    k: int

    def __post_init__(self):
        if self.kind not in (FULL, DIAG):
            raise ValueError(f"unknown algebra kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be positive")

    @classmethod
    def parse(cls, spec: str) -> "BaseAlgebra":
        """'m2' -> M_2, 'c3' -> C^3, 'c' -> C."""
        s = spec.strip().lower()
        if s == "c":
            return cls(FULL, 1)
        m = re.fullmatch(r"([mc])(\d+)", s)
        if not m:
            raise ValueError(f"malformed algebra spec {spec!r}")
        k = int(m.group(2))
        return cls(FULL if m.group(1) == "m" else DIAG, k)

    @property
    def name(self) -> str:
        if self.k == 1:
            return "c"
        return ("m" if self.kind == FULL else "c") + str(self.k)

    @property
    def dim(self) -> int:
        return self.k * self.k if self.kind == FULL else self.k

    @property
    def is_commutative(self) -> bool:
        return self.kind == DIAG or self.k == 1

    def index_pairs(self) -> list[tuple[int, int]]:
        """Matrix position of each basis element: (p, q) lexicographic, or (j, j)."""
        if self.kind == FULL:
            return [(p, q) for p in range(self.k) for q in range(self.k)]
        return [(j, j) for j in range(self.k)]

    def basis(self) -> list[np.ndarray]:
        out = []
        for p, q in self.index_pairs():
            e = np.zeros((self.k, self.k), dtype=complex)
            e[p, q] = 1.0
            out.append(e)
        return out

    def dual_basis(self) -> list["Functional"]:
        return [Functional(e) for e in self.basis()]

    def star_index(self, j: int) -> int:
        """Index of phi_j^*: phi_pq^* = phi_qp, phi_j^* = phi_j."""
        p, q = self.index_pairs()[j]
        return self.index_pairs().index((q, p))

    def unit(self) -> np.ndarray:
        return np.eye(self.k, dtype=complex)

    def coords(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        return np.array([b[p, q] for p, q in self.index_pairs()])

    def element(self, coords: Sequence[complex]) -> np.ndarray:
        b = np.zeros((self.k, self.k), dtype=complex)
        for c, (p, q) in zip(coords, self.index_pairs()):
            b[p, q] = c
        return b

    def contains(self, b, tol: float = 0.0) -> bool:
        b = np.asarray(b)
        if b.shape != (self.k, self.k):
            return False
        if self.kind == DIAG:
            return bool(np.max(np.abs(b - np.diag(np.diag(b))), initial=0.0) <= tol)
        return True

    def theta_coords(self) -> np.ndarray:
        """Coordinates of the normalized trace (the functional with theta(1) = 1)."""
        return self.coords(np.eye(self.k)) / self.k

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return self.element(scale * (rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)))


@dataclass(frozen=True)
class Functional:
    """phi(X) = Tr(X A^t) = sum_ij X_ij A_ij on a matrix algebra."""

    dual: np.ndarray

    def __call__(self, x) -> complex:
        return complex(np.sum(np.asarray(x) * self.dual))

    @property
    def size(self) -> int:
        return self.dual.shape[0]

    def star(self) -> "Functional":
        # phi^*(X) = conj(phi(X^*)) has dual matrix A^H
        return Functional(self.dual.conj().T)

    def __add__(self, other: "Functional") -> "Functional":
        return Functional(self.dual + other.dual)

    def __rmul__(self, c: complex) -> "Functional":
        return Functional(c * self.dual)

    def apply_entrywise(self, x: np.ndarray) -> np.ndarray:
        """(id_{M_n} (x) phi)(X) for X in M_n (x) M_d."""
        d = self.size
        n = x.shape[0] // d
        return np.einsum("iajb,ab->ij", x.reshape(n, d, n, d), self.dual)

    @classmethod
    def trace(cls, d: int, normalized: bool = True) -> "Functional":
        return cls(np.eye(d, dtype=complex) / (d if normalized else 1))

    def is_positive(self, tol: float = 1e-10) -> bool:
        """phi(y^* y) >= 0 on all y iff the Gram form sum_ij A_ij is PSD in this dual form."""
        # phi(y^* y) = sum (y^* y)_ij A_ij = Tr(y^* y A^t); nonnegative for all y iff A^t >= 0
        a = self.dual.T
        if np.max(np.abs(a - a.conj().T)) > tol:
            return False
        return linalg.hermitian_min_eigenvalue(a) >= -tol


@dataclass
class MatOverB:
    """Element of M_n(B).

    Full kind: ``data`` is the nk x nk matrix in M_n (x) M_k order.
    Diagonal kind: ``data`` has shape (k, n, n), one n x n matrix per coordinate.
    """

    algebra: BaseAlgebra
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite entries")

    @property
    def n(self) -> int:
        if self.algebra.kind == DIAG:
            return self.data.shape[1]
        return self.data.shape[0] // self.algebra.k

    def coord(self, j: int) -> np.ndarray:
        """z(phi_j)_n of this element: the n x n matrix of phi_j applied entrywise."""
        if self.algebra.kind == DIAG:
            return self.data[j]
        p, q = self.algebra.index_pairs()[j]
        k, n = self.algebra.k, self.n
        return self.data.reshape(n, k, n, k)[:, p, :, q]

    def coords(self) -> list[np.ndarray]:
        return [self.coord(j) for j in range(self.algebra.dim)]

    @classmethod
    def from_coords(cls, algebra: BaseAlgebra, coords: Sequence[np.ndarray]) -> "MatOverB":
        coords = [np.asarray(c, dtype=complex) for c in coords]
        if len(coords) != algebra.dim:
            raise ValueError("wrong number of coordinates")
        if algebra.kind == DIAG:
            return cls(algebra, np.stack(coords))
        n = coords[0].shape[0]
        out = np.zeros((n, algebra.k, n, algebra.k), dtype=complex)
        for c, (p, q) in zip(coords, algebra.index_pairs()):
            out[:, p, :, q] = c
        return cls(algebra, out.reshape(n * algebra.k, n * algebra.k))

    def dense(self) -> np.ndarray:
        if self.algebra.kind == FULL:
            return self.data
        k, n = self.algebra.k, self.n
        out = np.zeros((n, k, n, k), dtype=complex)
        for j in range(k):
            out[:, j, :, j] = self.data[j]
        return out.reshape(n * k, n * k)

    @classmethod
    def from_dense(cls, algebra: BaseAlgebra, x: np.ndarray, tol: float = 1e-12) -> "MatOverB":
        x = np.asarray(x, dtype=complex)
        if algebra.kind == FULL:
            return cls(algebra, x)
        k = algebra.k
        n = x.shape[0] // k
        r = x.reshape(n, k, n, k)
        blocks = np.stack([r[:, j, :, j] for j in range(k)])
        check = cls(algebra, blocks).dense()
        if np.max(np.abs(check - x), initial=0.0) > tol * max(1.0, np.max(np.abs(x), initial=0.0)):
            raise ValueError("matrix is not in M_n(C^k)")
        return cls(algebra, blocks)

    @classmethod
    def kron(cls, algebra: BaseAlgebra, a: np.ndarray, b: np.ndarray) -> "MatOverB":
        """A (x) b for a scalar matrix A and b in B."""
        return cls.from_dense(algebra, np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))

    @classmethod
    def scalar(cls, algebra: BaseAlgebra, a: np.ndarray) -> "MatOverB":
        """A (x) 1_B."""
        return cls.kron(algebra, a, algebra.unit())

    @classmethod
    def zeros(cls, algebra: BaseAlgebra, n: int) -> "MatOverB":
        return cls.scalar(algebra, np.zeros((n, n)))

    @classmethod
    def identity(cls, algebra: BaseAlgebra, n: int) -> "MatOverB":
        return cls.scalar(algebra, np.eye(n))

    @classmethod
    def random(cls, algebra: BaseAlgebra, n: int, rng: np.random.Generator, norm: float | None = None) -> "MatOverB":
        coords = [linalg.ginibre(n, rng) for _ in range(algebra.dim)]
        m = cls.from_coords(algebra, coords)
        if norm is not None:
            m = m * (norm / m.norm())
        return m

    def entry(self, i: int, j: int) -> np.ndarray:
        n, k = self.n, self.algebra.k
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError("entry index out of range")
        return self.dense().reshape(n, k, n, k)[i, :, j, :].copy()

    def norm(self) -> float:
        if self.algebra.kind == DIAG:
            return max(linalg.spectral_norm(b) for b in self.data)
        return linalg.spectral_norm(self.data)

    def adjoint(self) -> "MatOverB":
        if self.algebra.kind == DIAG:
            return MatOverB(self.algebra, np.conj(np.transpose(self.data, (0, 2, 1))))
        return MatOverB(self.algebra, self.data.conj().T)

    def _check(self, other: "MatOverB"):
        if other.algebra != self.algebra or other.n != self.n:
            raise ValueError("algebra or level mismatch")

    def __matmul__(self, other: "MatOverB") -> "MatOverB":
        self._check(other)
        if self.algebra.kind == DIAG:
            return MatOverB(self.algebra, self.data @ other.data)
        return MatOverB(self.algebra, self.data @ other.data)

    def __add__(self, other: "MatOverB") -> "MatOverB":
        self._check(other)
        return MatOverB(self.algebra, self.data + other.data)

    def __sub__(self, other: "MatOverB") -> "MatOverB":
        self._check(other)
        return MatOverB(self.algebra, self.data - other.data)

    def __neg__(self) -> "MatOverB":
        return MatOverB(self.algebra, -self.data)

    def __mul__(self, c: complex) -> "MatOverB":
        return MatOverB(self.algebra, c * self.data)

    __rmul__ = __mul__

    def inverse(self) -> "MatOverB":
        if self.algebra.kind == DIAG:
            return MatOverB(self.algebra, np.stack([linalg.inverse(b) for b in self.data]))
        return MatOverB(self.algebra, linalg.inverse(self.data))

    def conjugate_by(self, s: np.ndarray) -> "MatOverB":
        """(S (x) 1) x (S (x) 1)^{-1} for S in GL(n; C)."""
        s = np.asarray(s, dtype=complex)
        si = linalg.inverse(s)
        return MatOverB.from_coords(self.algebra, [s @ c @ si for c in self.coords()])

    def direct_sum(self, other: "MatOverB") -> "MatOverB":
        if other.algebra != self.algebra:
            raise ValueError("algebra mismatch")
        return MatOverB.from_coords(
            self.algebra, [linalg.direct_sum(a, b) for a, b in zip(self.coords(), other.coords())]
        )

    @classmethod
    def block(cls, algebra: BaseAlgebra, rows) -> "MatOverB":
        """Block matrix from a grid whose cells are MatOverB, scalar matrices (taken as A (x) 1), or None."""
        sizes = []
        for i, row in enumerate(rows):
            s = None
            for cell in row:
                if isinstance(cell, MatOverB):
                    s = cell.n
                    break
            if s is None:
                for r in rows:
                    cell = r[i]
                    if isinstance(cell, MatOverB):
                        s = cell.n
                        break
                    if cell is not None:
                        s = np.asarray(cell).shape[1]
                        break
            sizes.append(s)
        coords = []
        for j in range(algebra.dim):
            p, q = algebra.index_pairs()[j]
            grid = []
            for a, row in enumerate(rows):
                grid_row = []
                for b, cell in enumerate(row):
                    if cell is None:
                        grid_row.append(np.zeros((sizes[a], sizes[b]), dtype=complex))
                    elif isinstance(cell, MatOverB):
                        grid_row.append(cell.coord(j))
                    else:
                        c = np.asarray(cell, dtype=complex)
                        grid_row.append(c if p == q else np.zeros_like(c))
                grid.append(grid_row)
            coords.append(np.block(grid))
        return cls.from_coords(algebra, coords)


def embed(algebra: BaseAlgebra, n: int, entries) -> MatOverB:
    """Assemble an n x n matrix of B-elements; C^k entries may be given as k-vectors."""
    k = algebra.k
    out = np.zeros((n, k, n, k), dtype=complex)
    if len(entries) != n:
        raise IndexError("entries must be n x n")
    for i in range(n):
        if len(entries[i]) != n:
            raise IndexError("entries must be n x n")
        for j in range(n):
            b = np.asarray(entries[i][j], dtype=complex)
            if algebra.kind == DIAG and b.ndim == 1:
                b = np.diag(b)
            if not algebra.contains(b):
                raise ValueError("entry is not an element of the base algebra")
            out[i, :, j, :] = b
    return MatOverB.from_dense(algebra, out.reshape(n * k, n * k))


def extract_entry(m: MatOverB, i: int, j: int) -> np.ndarray:
    return m.entry(i, j)


def involution(m: MatOverB) -> MatOverB:
    return m.adjoint()


@dataclass(frozen=True)
class Embedding:
    """Unital *-embedding of B into E = M_d.

    M_k goes to M_k (x) I_{d/k}; C^k goes to block-diagonal constants on a
    partition of d into k nonempty blocks.
    """

    algebra: BaseAlgebra
    d: int

    def __post_init__(self):
        if self.algebra.kind == FULL and self.d % self.algebra.k:
            raise ValueError("k must divide d for a full matrix algebra")
        if self.algebra.kind == DIAG and self.d < self.algebra.k:
            raise ValueError("need d >= k for a diagonal algebra")

    def projections(self) -> list[np.ndarray]:
        parts = np.array_split(np.arange(self.d), self.algebra.k)
        out = []
        for idx in parts:
            p = np.zeros((self.d, self.d), dtype=complex)
            p[idx, idx] = 1.0
            out.append(p)
        return out

    def __call__(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        if self.algebra.kind == FULL:
            return np.kron(b, np.eye(self.d // self.algebra.k))
        return sum(b[j, j] * p for j, p in enumerate(self.projections()))

    def lift(self, x: MatOverB) -> np.ndarray:
        """id_{M_n} (x) iota applied to an element of M_n(B); result is nd x nd."""
        if self.algebra.kind == FULL:
            return np.kron(x.data, np.eye(self.d // self.algebra.k))
        return sum(np.kron(x.data[j], p) for j, p in enumerate(self.projections()))

    def lift_dense(self, x: np.ndarray) -> np.ndarray:
        return self.lift(MatOverB.from_dense(self.algebra, x, tol=1e-9))
