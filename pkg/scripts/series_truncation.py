#!/usr/bin/env python3
"""Remainder of truncated Taylor series against the geometric tail bound C q^N / (1 - q)."""

from dataclasses import dataclass

from _common import parse_config
from freegrass import linalg
from freegrass.suites import truncation_experiment


@dataclass
class Config:
    radius: float = 0.3
    outer_radius: float = 0.6
    samples: int = 40
    seed: int = 0


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    rows = truncation_experiment(linalg.stream(cfg.seed, "truncation"), degrees=(1, 2, 3, 4, 5, 6),
                                 radius=cfg.radius, outer_radius=cfg.outer_radius, samples=cfg.samples)
    print(f"{'N':>3} {'remainder':>12} {'bound':>12} {'ratio':>8}")
    for row in rows:
        print(f"{row['N']:>3} {row['remainder']:>12.4g} {row['bound']:>12.4g} {row['remainder'] / row['bound']:>8.3f}")


if __name__ == "__main__":
    main()
