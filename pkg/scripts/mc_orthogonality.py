#!/usr/bin/env python3
"""Convergence of Haar estimates of N^-1 Tr(w(omega) w'(omega)^*) to their limits.

Prints the worst absolute error per N and writes the full table as CSV.
"""

import csv
from dataclasses import dataclass, field

from _common import parse_config
from freegrass.algebra import BaseAlgebra
from freegrass.freeprob import CSV_FIELDS, McConfig, convergence_rows, csv_rows, mc_tolerance, orthogonality_gram


@dataclass
class Config:
    algebra: str = "m2"
    ladder: list = field(default_factory=lambda: [20, 50, 100, 150])
    samples: int = 40
    max_len: int = 3
    seed: int = 0
    threads: int = 1
    out: str = "orthogonality.csv"


def main():
    cfg = parse_config(Config, __doc__.splitlines()[0])
    mc = McConfig(BaseAlgebra.parse(cfg.algebra), cfg.ladder, cfg.samples, cfg.seed, cfg.threads)
    rows = convergence_rows(mc, orthogonality_gram(mc, cfg.max_len))
    print(f"{'N':>6} {'max |err|':>12} {'max err/allowance':>18}")
    for N in cfg.ladder:
        sel = [r for r in rows if r["N"] == N]
        err = max(abs(r["estimate"] - r["exact_limit"]) for r in sel)
        ratio = max(abs(r["estimate"] - r["exact_limit"]) / mc_tolerance(r["stderr"], N) for r in sel)
        print(f"{N:>6} {err:>12.4g} {ratio:>18.4g}")
    with open(cfg.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(csv_rows(rows))
    print(f"wrote {len(rows)} rows to {cfg.out}")


if __name__ == "__main__":
    main()
