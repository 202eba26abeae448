#!/usr/bin/env python3
"""Partial sums of antisymmetrized polynomials: zero on low levels, large on small balls."""

from dataclasses import dataclass

from _common import parse_config
from freegrass.algebra import BaseAlgebra
from freegrass.suites import pathological_suite


@dataclass
class Config:
    algebra: str = "c2"
    depth: int = 2
    samples: int = 50
    seed: int = 0


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    rep = pathological_suite(BaseAlgebra.parse(cfg.algebra), cfg.seed, cfg.depth, cfg.samples)
    print(f"{'j':>3} {'p':>4} {'zero up to':>11} {'witness lvl':>12} {'scale':>10} {'radius':>8} {'norm':>10}")
    for row in rep.details["levels"]:
        print(f"{row['j']:>3} {row['p']:>4} {row['vanishing_up_to']:>11} {row['witness_level']:>12} "
              f"{row['scale']:>10.3g} {row['radius']:>8.3g} {row['witness_norm']:>10.4g}")
    print(f"largest value on vanishing levels: {rep.checks['pathological-vanishing'].residual:.2e}")


if __name__ == "__main__":
    main()
