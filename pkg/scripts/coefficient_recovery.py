#!/usr/bin/env python3
"""Taylor coefficients from Haar integrals, for a polynomial and for a resolvent.

The resolvent (1 - c z)^-1 is evaluated at r*omega; the table shows how the
recovered coefficients move with r, next to the exact values c^m.
"""

from dataclasses import dataclass, field

import numpy as np

from _common import parse_config
from freegrass import linalg
from freegrass.algebra import BaseAlgebra
from freegrass.calculus import MatricialFn
from freegrass.freeprob import McConfig, recover_coefficients_mc
from freegrass.ncpoly import NCPoly


@dataclass
class Config:
    N: int = 100
    samples: int = 30
    c: float = 0.6
    degree: int = 3
    radii: list = field(default_factory=lambda: [0.9, 0.99, 0.999, 1.0])
    seed: int = 0


def polynomial_part(cfg: Config):
    m2 = BaseAlgebra.parse("m2")
    e11, e22 = m2.index_pairs().index((0, 0)), m2.index_pairs().index((1, 1))
    f = NCPoly.generator(m2, e11) * NCPoly.generator(m2, e22)
    est = recover_coefficients_mc(f, McConfig(m2, [cfg.N], cfg.samples, cfg.seed), 2)[-1]
    print(f"z(phi_11) z(phi_22) over M2, N={cfg.N}:")
    print(f"  a2(11;22) = {est.mean[2][e11, e22]:.4f} +- {est.stderr[2][e11, e22]:.4f} (exact 1)")
    off = est.mean[2].copy()
    off[e11, e22] = 0
    print(f"  max |other a2| = {np.abs(off).max():.4f}, a0 = {complex(est.mean[0]):.2e}")


def resolvent_part(cfg: Config):
    c1 = BaseAlgebra.parse("c")
    f = MatricialFn(c1, lambda b: linalg.inverse(np.eye(b.n) - cfg.c * b.coords()[0]), radius=1.0 / cfg.c)
    print(f"(1 - {cfg.c} z)^-1 over C, N={cfg.N}; exact a_m = {cfg.c}^m")
    print(f"{'r':>7} " + " ".join(f"{'a' + str(m):>16}" for m in range(cfg.degree + 1)))
    for r in cfg.radii:
        est = recover_coefficients_mc(f, McConfig(c1, [cfg.N], cfg.samples, cfg.seed), cfg.degree, radial=r)[-1]
        vals = [complex(np.ravel(est.mean[m])[0]) for m in range(cfg.degree + 1)]
        print(f"{r:>7} " + " ".join(f"{v.real:>9.5f}{v.imag:+.0e}" for v in vals))


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    polynomial_part(cfg)
    resolvent_part(cfg)


if __name__ == "__main__":
    main()
