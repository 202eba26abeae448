"""Noncommutative polynomials in the coordinate generators z(phi_j) of a base algebra."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import BaseAlgebra, MatOverB

Word = tuple[int, ...]
DEGREE_CAP = 12


class DegreeCapExceeded(ValueError):
    pass


class SearchFailed(RuntimeError):
    pass


def _prune(terms: Mapping, cap: int | None = DEGREE_CAP) -> dict:
    out = {}
    for key, c in terms.items():
        if c == 0:
            continue
        if cap is not None and _degree(key) > cap:
            raise DegreeCapExceeded(f"degree {_degree(key)} exceeds cap {cap}")
        out[key] = complex(c)
    return dict(sorted(out.items()))


def _degree(key) -> int:
    if key and isinstance(key[0], tuple):
        return sum(len(w) for w in key)
    return len(key)


class NCPoly:
    def __init__(self, algebra: BaseAlgebra, terms: Mapping[Word, complex] | None = None,
                 cap: int | None = DEGREE_CAP):
        self.algebra = algebra
        self.cap = cap
        terms = {tuple(int(i) for i in w): c for w, c in (terms or {}).items()}
        for w in terms:
            if any(not 0 <= i < algebra.dim for i in w):
                raise ValueError(f"word {w} uses an index outside the dual basis")
        self.terms: dict[Word, complex] = _prune(terms, cap)

    @classmethod
    def constant(cls, algebra: BaseAlgebra, c: complex = 1.0) -> "NCPoly":
        return cls(algebra, {(): c})

    @classmethod
    def generator(cls, algebra: BaseAlgebra, j: int) -> "NCPoly":
        return cls(algebra, {(j,): 1.0})

    @classmethod
    def linear(cls, algebra: BaseAlgebra, coeffs: Sequence[complex]) -> "NCPoly":
        """z(phi) for phi = sum_j c_j phi_j."""
        return cls(algebra, {(j,): c for j, c in enumerate(coeffs)})

    @classmethod
    def random(cls, algebra: BaseAlgebra, rng: np.random.Generator, degree: int, n_terms: int = 8,
               integer: bool = False) -> "NCPoly":
        """Random polynomial; ``integer`` draws Gaussian-integer coefficients so symbolic arithmetic is exact."""
        terms = {}
        for _ in range(n_terms):
            m = int(rng.integers(0, degree + 1))
            w = tuple(int(i) for i in rng.integers(0, algebra.dim, size=m))
            if integer:
                c = complex(*rng.integers(-5, 6, size=2))
            else:
                c = complex(rng.standard_normal(), rng.standard_normal())
            terms[w] = terms.get(w, 0) + c
        return cls(algebra, terms)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def homogeneous(self, m: int) -> "NCPoly":
        return NCPoly(self.algebra, {w: c for w, c in self.terms.items() if len(w) == m})

    def _check(self, other: "NCPoly"):
        if other.algebra != self.algebra:
            raise ValueError("algebra mismatch")

    def __add__(self, other) -> "NCPoly":
        if not isinstance(other, NCPoly):
            other = NCPoly.constant(self.algebra, other)
        self._check(other)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0) + c
        return NCPoly(self.algebra, terms, _cap(self, other))

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly(self.algebra, {w: -c for w, c in self.terms.items()}, self.cap)

    def __sub__(self, other) -> "NCPoly":
        return self + (-other)

    def __mul__(self, other) -> "NCPoly":
        if not isinstance(other, NCPoly):
            return NCPoly(self.algebra, {w: other * c for w, c in self.terms.items()}, self.cap)
        self._check(other)
        terms: dict[Word, complex] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                terms[w] = terms.get(w, 0) + c1 * c2
        return NCPoly(self.algebra, terms, _cap(self, other))

    def __rmul__(self, c) -> "NCPoly":
        return NCPoly(self.algebra, {w: c * v for w, v in self.terms.items()}, self.cap)

    def __pow__(self, e: int) -> "NCPoly":
        out = NCPoly(self.algebra, {(): 1.0}, self.cap)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, NCPoly) and other.algebra == self.algebra and other.terms == self.terms

    def allclose(self, other: "NCPoly", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(w, 0) - other.terms.get(w, 0)) <= tol for w in keys)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms.items():
            mono = "*".join(f"z{j}" for j in w) or "1"
            parts.append(f"({c:g})*{mono}")
        return " + ".join(parts)

    # evaluation

    def evaluate(self, beta: MatOverB) -> np.ndarray:
        if beta.algebra != self.algebra:
            raise ValueError("algebra mismatch")
        zs = beta.coords()
        return _eval_words(self.terms, zs, beta.n)

    def evaluate_coords(self, zs: Sequence[np.ndarray]) -> np.ndarray:
        return _eval_words(self.terms, zs, zs[0].shape[0])

    # symbolic operations

    def derivative(self) -> "NCTensor":
        """Difference quotient: d(word) = sum_i phi_{j_i}(1) prefix (x) suffix."""
        units = self.algebra.coords(self.algebra.unit())
        terms: dict = {}
        for w, c in self.terms.items():
            for i, j in enumerate(w):
                if units[j] == 0:
                    continue
                key = (w[:i], w[i + 1 :])
                terms[key] = terms.get(key, 0) + c * units[j]
        return NCTensor(self.algebra, terms)

    def coderivation_lambda(self) -> "NCPoly":
        return NCPoly(self.algebra, {w: (len(w) + 1) * c for w, c in self.terms.items()})

    def star(self) -> "NCPoly":
        s = self.algebra.star_index
        return NCPoly(self.algebra, {tuple(s(j) for j in reversed(w)): np.conj(c) for w, c in self.terms.items()})

    # serialization

    def to_json(self) -> dict:
        return {
            "algebra": {"kind": self.algebra.kind, "k": self.algebra.k},
            "terms": [{"word": list(w), "re": c.real, "im": c.imag} for w, c in self.terms.items()],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "NCPoly":
        if isinstance(data, str):
            data = json.loads(data)
        alg = BaseAlgebra(data["algebra"]["kind"], int(data["algebra"]["k"]))
        terms: dict[Word, complex] = {}
        for t in data["terms"]:
            w = tuple(t["word"])
            terms[w] = terms.get(w, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(alg, terms)


def _cap(a: "NCPoly", b: "NCPoly") -> int | None:
    if a.cap is None or b.cap is None:
        return None
    return max(a.cap, b.cap)


def _eval_words(terms: Mapping[Word, complex], zs: Sequence[np.ndarray], n: int) -> np.ndarray:
    # words are sorted, so shared prefixes are reused through a small cache
    cache: dict[Word, np.ndarray] = {(): np.eye(n, dtype=complex)}

    def prod(w: Word) -> np.ndarray:
        if w not in cache:
            cache[w] = prod(w[:-1]) @ zs[w[-1]]
        return cache[w]

    out = np.zeros((n, n), dtype=complex)
    for w, c in terms.items():
        out += c * prod(w)
    return out


class NCTensor:
    """Element of Z^{(x) r}: a map from r-tuples of words to coefficients."""

    def __init__(self, algebra: BaseAlgebra, terms: Mapping[tuple[Word, ...], complex] | None = None):
        self.algebra = algebra
        self.terms: dict[tuple[Word, ...], complex] = _prune(
            {tuple(tuple(w) for w in key): c for key, c in (terms or {}).items()}
        )

    @property
    def arity(self) -> int:
        return len(next(iter(self.terms))) if self.terms else 2

    def __add__(self, other: "NCTensor") -> "NCTensor":
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return NCTensor(self.algebra, terms)

    def __sub__(self, other: "NCTensor") -> "NCTensor":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "NCTensor":
        return NCTensor(self.algebra, {k: c * v for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, NCTensor) and self.terms == other.terms

    def allclose(self, other: "NCTensor", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def __repr__(self) -> str:
        return f"NCTensor({self.terms})"

    @classmethod
    def simple(cls, *polys: NCPoly) -> "NCTensor":
        """p_1 (x) ... (x) p_r."""
        terms: dict = {}
        for combo in itertools.product(*[p.terms.items() for p in polys]):
            key = tuple(w for w, _ in combo)
            terms[key] = terms.get(key, 0) + np.prod([c for _, c in combo])
        return cls(polys[0].algebra, terms)

    def multiply_slots(self, left: Sequence[NCPoly] | None = None, right: Sequence[NCPoly] | None = None) -> "NCTensor":
        """(l_1 (x) ... (x) l_r) * T * (r_1 (x) ... (x) r_r), slotwise products."""
        out = self
        if left is not None:
            out = _slot_product(NCTensor.simple(*left), out)
        if right is not None:
            out = _slot_product(out, NCTensor.simple(*right))
        return out

    def apply_slot(self, slot: int, op) -> "NCTensor":
        """Apply a linear map NCPoly -> NCPoly or NCPoly -> NCTensor in one tensor slot."""
        terms: dict = {}
        for key, c in self.terms.items():
            image = op(NCPoly(self.algebra, {key[slot]: 1.0}))
            if isinstance(image, NCPoly):
                items = [((w,), v) for w, v in image.terms.items()]
            else:
                items = list(image.terms.items())
            for sub, v in items:
                new = key[:slot] + tuple(sub) + key[slot + 1 :]
                terms[new] = terms.get(new, 0) + c * v
        return NCTensor(self.algebra, terms)

    def derive_slot(self, slot: int) -> "NCTensor":
        return self.apply_slot(slot, NCPoly.derivative)

    def lambda_slot(self, slot: int) -> "NCTensor":
        return self.apply_slot(slot, NCPoly.coderivation_lambda)

    def star(self) -> "NCTensor":
        """Slotwise involution (a (x) b)^* = a^* (x) b^*."""
        s = self.algebra.star_index
        return NCTensor(
            self.algebra,
            {tuple(tuple(s(j) for j in reversed(w)) for w in key): np.conj(c) for key, c in self.terms.items()},
        )

    def flip(self) -> "NCTensor":
        return NCTensor(self.algebra, {tuple(reversed(key)): c for key, c in self.terms.items()})

    def evaluate(self, *betas: MatOverB) -> np.ndarray:
        """Value as a multi-index array: coefficient of e_{i1 j1} (x) ... (x) e_{ir jr}.

        For two slots the entry [i, j, k, l] equals T(e_jk)[i, l] where
        T(A (x) B)(t) = A t B, i.e. the off-diagonal block read by the
        block-embedding difference quotient.
        """
        zs = [b.coords() for b in betas]
        ns = [b.n for b in betas]
        shape = [x for n in ns for x in (n, n)]
        out = np.zeros(shape, dtype=complex)
        caches = [dict() for _ in betas]
        for key, c in self.terms.items():
            factors = []
            for s, w in enumerate(key):
                if w not in caches[s]:
                    caches[s][w] = _eval_words({w: 1.0}, zs[s], ns[s])
                factors.append(caches[s][w])
            t = factors[0]
            for f in factors[1:]:
                t = np.multiply.outer(t, f)
            out += c * t
        return out


def _slot_product(a: NCTensor, b: NCTensor) -> NCTensor:
    terms: dict = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            terms[key] = terms.get(key, 0) + ca * cb
    return NCTensor(a.algebra, terms)


def leibniz_rhs(p: NCPoly, q: NCPoly) -> NCTensor:
    """(p (x) 1) dq + dp (1 (x) q)."""
    one = NCPoly.constant(p.algebra)
    return q.derivative().multiply_slots(left=[p, one]) + p.derivative().multiply_slots(right=[one, q])


def antisymmetrize(algebra: BaseAlgebra, monomials: Sequence[Word]) -> NCPoly:
    """sum over permutations s of sign(s) m_{s(1)} ... m_{s(p)}."""
    words = [tuple(m) for m in monomials]
    if len(set(words)) != len(words):
        raise ValueError("monomials must be pairwise distinct")
    if len({len(w) for w in words}) > 1:
        raise ValueError("monomials must have equal degree")
    if sum(len(w) for w in words) > DEGREE_CAP * 4:
        raise DegreeCapExceeded("antisymmetrization too large")
    terms: dict[Word, complex] = {}
    for perm in itertools.permutations(range(len(words))):
        w = tuple(i for j in perm for i in words[j])
        terms[w] = terms.get(w, 0) + _sign(perm)
    return NCPoly(algebra, terms, cap=None)


def _sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def first_words(dim: int, count: int) -> list[Word]:
    """The first `count` words of the shortest length admitting that many, lexicographically."""
    length = 1
    while dim**length < count:
        length += 1
    return [w for _, w in zip(range(count), itertools.product(range(dim), repeat=length))]


@dataclass
class PathologicalLevel:
    p: int
    vanishing_up_to: int
    witness_level: int
    scale: float
    witness_norm: float
    witness_radius: float
    poly: NCPoly


def random_ball_point(algebra: BaseAlgebra, n: int, rng: np.random.Generator, radius: float) -> MatOverB:
    b = MatOverB.random(algebra, n, rng)
    return b * (radius * rng.uniform(0.5, 1.0) ** (1.0 / 8) / b.norm())


def first_nonvanishing_level(g: NCPoly, start: int, rng: np.random.Generator, samples: int = 20,
                             max_level: int = 12, tol: float = 1e-8) -> int:
    for level in range(start, max_level + 1):
        for _ in range(samples):
            b = random_ball_point(g.algebra, level, rng, 0.9)
            if np.max(np.abs(g.evaluate(b))) > tol:
                return level
    raise SearchFailed(f"no nonvanishing level found up to {max_level}")


def build_pathological(algebra: BaseAlgebra, depth: int, rng: np.random.Generator,
                       samples: int = 200, max_doublings: int = 200) -> list[PathologicalLevel]:
    """Polynomials g_j whose partial sums are large on small balls at growing levels.

    g_j antisymmetrizes p_j = N_j^2 + 1 distinct monomials, so it vanishes on
    levels k <= N_j; N_{j+1} is the first level where g_j is seen to be
    nonzero.  The scale of g_j is doubled until the partial sum exceeds j at
    some sampled point of norm < 1/j on level N_{j+1}.
    """
    if algebra.dim < 2:
        raise ValueError("need dim B > 1")
    levels: list[PathologicalLevel] = []
    partial = NCPoly(algebra, cap=None)
    n_j = 1
    for j in range(1, depth + 1):
        p = n_j * n_j + 1
        g = antisymmetrize(algebra, first_words(algebra.dim, p))
        nxt = first_nonvanishing_level(g, n_j + 1, rng)
        radius = 1.0 / j
        points = [random_ball_point(algebra, nxt, rng, radius) for _ in range(samples)]
        base_vals = [partial.evaluate(b) if partial.terms else 0.0 for b in points]
        g_vals = [g.evaluate(b) for b in points]
        lam = 1.0
        for _ in range(max_doublings):
            norms = [np.linalg.norm(bv + lam * gv, 2) for bv, gv in zip(base_vals, g_vals)]
            best = int(np.argmax(norms))
            if norms[best] > j:
                break
            lam *= 2.0
        else:
            raise SearchFailed(f"no witness found at level {nxt} for j={j}")
        scaled = g * lam
        partial = partial + scaled if partial.terms else scaled
        levels.append(PathologicalLevel(p, n_j, nxt, lam, float(norms[best]), radius, scaled))
        n_j = nxt
    return levels


def partial_sum(levels: Iterable[PathologicalLevel], algebra: BaseAlgebra) -> NCPoly:
    out = NCPoly(algebra, cap=None)
    for lv in levels:
        out = out + lv.poly
    return out
