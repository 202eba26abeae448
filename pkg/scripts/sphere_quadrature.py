#!/usr/bin/env python3
"""Residuals of the three contour duality relations as the quadrature is refined."""

from dataclasses import dataclass, field

from _common import parse_config
from freegrass.sphere import family_residuals


@dataclass
class Config:
    ladder: list = field(default_factory=lambda: [16, 32, 64, 128, 256, 512])
    cases: int = 12
    seed: int = 0


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    print(f"{'points':>7} {'coproduct':>11} {'product':>11} {'lambda':>11}")
    for n in cfg.ladder:
        res = family_residuals(n, cfg.seed, cfg.cases)
        worst = [max(getattr(r, k) for r in res) for k in ("coproduct", "product", "lambda_relation")]
        print(f"{n:>7} " + " ".join(f"{w:>11.3e}" for w in worst))


if __name__ == "__main__":
    main()
