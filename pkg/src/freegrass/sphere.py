"""Contour pairing between germs on a compact set K and functions vanishing at
infinity off K, with numerical checks of the three duality relations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PoleOnContour(ValueError):
    pass


class UnsupportedKind(TypeError):
    pass


@dataclass(frozen=True)
class Circle:
    center: complex = 0.0
    radius: float = 1.0

    def nodes(self, points: int) -> tuple[np.ndarray, np.ndarray]:
        """Trapezoid nodes and weights for (2 pi i)^{-1} times the contour integral."""
        theta = 2 * np.pi * np.arange(points) / points
        z = self.center + self.radius * np.exp(1j * theta)
        return z, (z - self.center) / points


class ScalarFn:
    poles: tuple = ()

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self) -> "ScalarFn":
        raise UnsupportedKind(f"{type(self).__name__} has no closed-form derivative")

    def __mul__(self, other: "ScalarFn") -> "ScalarFn":
        return Product(self, other)


@dataclass
class Rational(ScalarFn):
    """sum_j poly[j] z^j + sum_p sum_j poles[p][j] (z - p)^{-(j+1)}."""

    poly: tuple = ()
    pole_terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.poly = tuple(complex(c) for c in self.poly)
        self.pole_terms = {complex(p): tuple(complex(c) for c in cs) for p, cs in self.pole_terms.items()}

    @classmethod
    def polynomial(cls, coeffs) -> "Rational":
        return cls(tuple(coeffs), {})

    @classmethod
    def inner_resolvent(cls, zeta: complex) -> "Rational":
        """(zeta - z)^{-1}, holomorphic near any K not containing zeta."""
        return cls((), {zeta: (-1.0,)})

    @classmethod
    def outer_kernel(cls, w: complex) -> "Rational":
        """(z - w)^{-1}, holomorphic off {w} and zero at infinity."""
        return cls((), {w: (1.0,)})

    @property
    def poles(self) -> tuple:
        return tuple(p for p, cs in self.pole_terms.items() if any(cs))

    @property
    def vanishes_at_infinity(self) -> bool:
        return not any(self.poly)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c in reversed(self.poly):
            out = out * z + c
        for p, cs in self.pole_terms.items():
            inv = 1.0 / (z - p)
            pw = inv
            for c in cs:
                out = out + c * pw
                pw = pw * inv
        return out

    def __add__(self, other: "Rational") -> "Rational":
        n = max(len(self.poly), len(other.poly))
        poly = [0j] * n
        for i, c in enumerate(self.poly):
            poly[i] += c
        for i, c in enumerate(other.poly):
            poly[i] += c
        terms = {p: list(cs) for p, cs in self.pole_terms.items()}
        for p, cs in other.pole_terms.items():
            cur = terms.setdefault(p, [])
            cur.extend([0j] * (len(cs) - len(cur)))
            for i, c in enumerate(cs):
                cur[i] += c
        return Rational(tuple(poly), terms)

    def scale(self, s: complex) -> "Rational":
        return Rational(tuple(s * c for c in self.poly), {p: tuple(s * c for c in cs) for p, cs in self.pole_terms.items()})

    def derivative(self) -> "Rational":
        poly = tuple(i * c for i, c in enumerate(self.poly))[1:]
        terms = {p: (0j,) + tuple(-(j + 1) * c for j, c in enumerate(cs)) for p, cs in self.pole_terms.items()}
        return Rational(poly, terms)

    def times_z(self) -> "Rational":
        poly = [0j] + list(self.poly)
        terms = {}
        for p, cs in self.pole_terms.items():
            # z (z-p)^{-j} = (z-p)^{-(j-1)} + p (z-p)^{-j}
            new = [p * c for c in cs]
            for j, c in enumerate(cs):
                if j == 0:
                    poly[0] += c
                else:
                    new[j - 1] += c
            terms[p] = tuple(new)
        return Rational(tuple(poly), terms)

    def star(self) -> "Rational":
        """z -> conj(f(conj z))."""
        return Rational(tuple(np.conj(self.poly)), {np.conj(p): tuple(np.conj(cs)) for p, cs in self.pole_terms.items()})


@dataclass
class Product(ScalarFn):
    left: ScalarFn
    right: ScalarFn

    @property
    def poles(self) -> tuple:
        return tuple(self.left.poles) + tuple(self.right.poles)

    def __call__(self, z):
        return self.left(z) * self.right(z)

    def derivative(self) -> ScalarFn:
        return Sum(Product(self.left.derivative(), self.right), Product(self.left, self.right.derivative()))


@dataclass
class Sum(ScalarFn):
    left: ScalarFn
    right: ScalarFn

    @property
    def poles(self) -> tuple:
        return tuple(self.left.poles) + tuple(self.right.poles)

    def __call__(self, z):
        return self.left(z) + self.right(z)

    def derivative(self) -> ScalarFn:
        return Sum(self.left.derivative(), self.right.derivative())


@dataclass
class DiffQuotient:
    """(z1 - z2)^{-1} (f(z1) - f(z2)), equal to f'(z) on the diagonal."""

    f: ScalarFn
    coincidence_tol: float = 1e-12

    def __post_init__(self):
        self.df = self.f.derivative()

    @property
    def poles(self) -> tuple:
        return tuple(self.f.poles)

    def __call__(self, z1, z2):
        z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
        diff = z1 - z2
        close = np.abs(diff) <= self.coincidence_tol * np.maximum(1.0, np.abs(z1))
        safe = np.where(close, 1.0, diff)
        return np.where(close, self.df(z1), (self.f(z1) - self.f(z2)) / safe)


def scalar_diff_quotient(f: ScalarFn) -> DiffQuotient:
    return DiffQuotient(f)


def scalar_L(f: Rational) -> Rational:
    """(z f)'."""
    if not isinstance(f, Rational):
        raise UnsupportedKind("closed form needs a rational function")
    return f.times_z().derivative()


def scalar_Lambda(g: Rational) -> Rational:
    """(zeta g)' in the variable zeta."""
    return scalar_L(g)


def _check_contour(contour: Circle, inside: tuple = (), outside: tuple = (), min_dist: float = 1e-8):
    for p in tuple(inside) + tuple(outside):
        if abs(abs(p - contour.center) - contour.radius) < min_dist * max(1.0, contour.radius):
            raise PoleOnContour(f"pole {p} lies on the contour")
    for p in outside:
        if abs(p - contour.center) < contour.radius:
            raise ValueError(f"germ has a pole {p} inside the contour")
    for p in inside:
        if abs(p - contour.center) > contour.radius:
            raise ValueError(f"outer function has a pole {p} outside the contour")


def _outer_poles(g) -> tuple:
    if isinstance(g, Rational) and not g.vanishes_at_infinity:
        raise ValueError("outer function must vanish at infinity")
    return tuple(g.poles)


def pairing(f: ScalarFn, g: ScalarFn, contour: Circle = Circle(), points: int = 512) -> complex:
    """(2 pi i)^{-1} * contour integral of f g, by the trapezoid rule."""
    _check_contour(contour, inside=_outer_poles(g), outside=f.poles)
    z, w = contour.nodes(points)
    return complex(np.sum(f(z) * g(z) * w))


def tensor_pairing(F, g1: ScalarFn, g2: ScalarFn, contour: Circle = Circle(), points: int = 512) -> complex:
    """<F | g1 (x) g2> for a two-variable germ F, by tensor-product trapezoid sums."""
    _check_contour(contour, inside=_outer_poles(g1) + _outer_poles(g2), outside=F.poles)
    z, w = contour.nodes(points)
    vals = F(z[:, None], z[None, :])
    return complex((g1(z) * w) @ vals @ (g2(z) * w))


def cotensor_pairing(f1: ScalarFn, f2: ScalarFn, G, contour: Circle = Circle(), points: int = 512) -> complex:
    """<f1 (x) f2 | G> for a two-variable outer function G."""
    _check_contour(contour, inside=tuple(G.poles), outside=tuple(f1.poles) + tuple(f2.poles))
    z, w = contour.nodes(points)
    vals = G(z[:, None], z[None, :])
    return complex((f1(z) * w) @ vals @ (f2(z) * w))


@dataclass
class DualityResiduals:
    coproduct: float
    product: float
    lambda_relation: float

    def as_dict(self) -> dict:
        return {"coproduct": self.coproduct, "product": self.product, "lambda_relation": self.lambda_relation}

    def worst(self) -> float:
        return max(self.coproduct, self.product, self.lambda_relation)


def verify_duality_relations(f, f1, f2, g, g1, g2, contour: Circle = Circle(), points: int = 512) -> DualityResiduals:
    """Residuals of
    <df | g1 (x) g2> = <f | g1 g2>,
    <f1 f2 | g> = -<f1 (x) f2 | dg>,
    <L f | g> + <f | Lambda g> = <f | g>."""
    r1 = tensor_pairing(DiffQuotient(f), g1, g2, contour, points) - pairing(f, g1 * g2, contour, points)
    r2 = pairing(f1 * f2, g, contour, points) + cotensor_pairing(f1, f2, DiffQuotient(g), contour, points)
    r3 = (pairing(scalar_L(f), g, contour, points) + pairing(f, scalar_Lambda(g), contour, points)
          - pairing(f, g, contour, points))
    return DualityResiduals(abs(r1), abs(r2), abs(r3))


def random_germ(rng: np.random.Generator, radius_range=(1.2, 1.3), n_poles: int = 2, degree: int = 2) -> Rational:
    terms = {}
    for _ in range(n_poles):
        p = rng.uniform(*radius_range) * np.exp(2j * np.pi * rng.uniform())
        order = int(rng.integers(1, 3))
        terms[p] = tuple(rng.normal(size=order) + 1j * rng.normal(size=order))
    return Rational(tuple(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)), terms)


def random_outer(rng: np.random.Generator, radius_range=(0.8, 0.85), n_poles: int = 2) -> Rational:
    terms = {}
    for _ in range(n_poles):
        p = rng.uniform(*radius_range) * np.exp(2j * np.pi * rng.uniform())
        order = int(rng.integers(1, 3))
        terms[p] = tuple(rng.normal(size=order) + 1j * rng.normal(size=order))
    return Rational((), terms)


def rational_family(seed: int = 0, cases: int = 12) -> list[tuple]:
    """Test cases (f, f1, f2, g, g1, g2): germs with poles near |z| = 1.25, outer functions
    with poles near |z| = 0.8, paired on the unit circle."""
    rng = np.random.default_rng(seed)
    return [tuple([random_germ(rng) for _ in range(3)] + [random_outer(rng) for _ in range(3)]) for _ in range(cases)]


def family_residuals(points: int, seed: int = 0, cases: int = 12, contour: Circle = Circle()) -> list[DualityResiduals]:
    return [verify_duality_relations(*case, contour=contour, points=points) for case in rational_family(seed, cases)]


def geometric_decay(residuals: list[float], floor: float = 1e-10, factor: float = 0.01) -> bool:
    """Each doubling of the point count shrinks the residual by ``factor`` until it hits ``floor``."""
    return all(b <= max(factor * a, floor) for a, b in zip(residuals, residuals[1:]))
