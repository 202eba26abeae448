"""Command-line driver: verification suites and experiments with JSON or CSV reports.

Exit status is 0 when every check passes, 1 when one fails and 2 for a bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import subprocess
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .algebra import BaseAlgebra
from .calculus import CoefficientFamily, MatricialFn, extract_coefficients
from .freeprob import CSV_FIELDS, McConfig, csv_rows
from .ncpoly import NCPoly
from .suites import (DEFAULT_TOLERANCES, SUITES, SuiteReport, mc_coefficients, mc_orthogonality,
                     pathological_suite, rtransform_suite, series_suite, sphere_duality_suite)

SCHEMA = "freegrass-report/1"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    target: str = ""
    algebra: str | None = None
    seed: int = 0
    E: int | None = None
    N: list[int] = field(default_factory=lambda: [20, 50, 100])
    samples: int | None = None
    poly: str | None = None
    degree: int | None = None
    depth: int = 2
    points: int = 512
    threads: int | None = None
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def digest(self) -> str:
        data = asdict(self)
        data.pop("output")
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()

    def base_algebra(self) -> BaseAlgebra | None:
        if self.algebra is None:
            return None
        try:
            return BaseAlgebra.parse(self.algebra)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self):
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if list(self.N) != sorted(set(self.N)) or any(n < 1 for n in self.N):
            raise ConfigError("N-ladder must be strictly increasing positive integers")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        self.base_algebra()


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _parse_ladder(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad N-ladder {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--algebra", default=S, help="base algebra: c, cK (diagonal C^K) or mK (K x K matrices)")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--E", type=int, default=S, help="size d of the ambient matrix algebra M_d")
    common.add_argument("--N", type=_parse_ladder, default=S, help="comma-separated N-ladder")
    common.add_argument("--samples", type=int, default=S, help="Monte Carlo samples per N, or instances per suite")
    common.add_argument("--poly", default=S, help="NCPoly JSON file")
    common.add_argument("--degree", type=int, default=S)
    common.add_argument("--depth", type=int, default=S)
    common.add_argument("--points", type=int, default=S)
    common.add_argument("--threads", type=int, default=S)
    common.add_argument("--output", default=S, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=S)

    parser = argparse.ArgumentParser(prog="freegrass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("target", choices=sorted(SUITES))
    p = sub.add_parser("mc", parents=[common], help="Haar Monte Carlo and R-transform experiments")
    p.add_argument("target", choices=("orthogonality", "coefficients", "rtransform-additivity"))
    sub.add_parser("pathological", parents=[common], help="polynomials with growing norms on shrinking balls")
    p = sub.add_parser("series", parents=[common], help="coefficient extraction and composition")
    p.add_argument("target", choices=("roundtrip",))
    sub.add_parser("sphere", parents=[common], help="contour duality relations on the sphere")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if hasattr(args, "config"):
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    values.update({k: v for k, v in vars(args).items() if k != "config"})
    names = {f.name for f in fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _load_poly(cfg: RunConfig) -> NCPoly:
    if cfg.poly is None:
        raise ConfigError("this command needs --poly")
    try:
        return NCPoly.from_json(Path(cfg.poly).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read polynomial: {exc}") from exc


def _mc_config(cfg: RunConfig, algebra: BaseAlgebra) -> McConfig:
    return McConfig(algebra, cfg.N, cfg.samples or 40, cfg.seed, cfg.threads)


def roundtrip_report(p: NCPoly, degree: int | None) -> SuiteReport:
    deg = p.degree if degree is None else degree
    rep = SuiteReport("series-roundtrip")
    fam = extract_coefficients(MatricialFn.from_poly(p), max(deg, 0))
    rep.check("series-roundtrip").record(fam.max_difference(CoefficientFamily.from_poly(p, max(deg, 0))))
    rep.details["coefficients"] = fam.to_json()
    return rep


def run(cfg: RunConfig) -> SuiteReport:
    alg = cfg.base_algebra()
    tol = cfg.tolerances
    if cfg.command == "verify":
        if cfg.target == "sphere-duality":
            return sphere_duality_suite(cfg.points, cfg.seed, tolerances=tol)
        kwargs = {"algebra": alg, "seed": cfg.seed, "tolerances": tol}
        if cfg.samples:
            kwargs["instances"] = cfg.samples
        if cfg.E is not None and cfg.target != "bialgebra":
            kwargs["E"] = cfg.E
        return SUITES[cfg.target](**kwargs)
    if cfg.command == "mc":
        if cfg.target == "orthogonality":
            return mc_orthogonality(_mc_config(cfg, alg or BaseAlgebra.parse("m2")), cfg.degree or 3, tol)
        if cfg.target == "coefficients":
            p = _load_poly(cfg)
            return mc_coefficients(p, _mc_config(cfg, p.algebra), cfg.degree or max(p.degree, 1), tol)
        return rtransform_suite(cfg.seed, degree=cfg.degree or 5, tolerances=tol)
    if cfg.command == "pathological":
        return pathological_suite(alg, cfg.seed, cfg.depth, tolerances=tol)
    if cfg.command == "series":
        if cfg.poly is not None:
            return roundtrip_report(_load_poly(cfg), cfg.degree)
        return series_suite(alg, cfg.seed, tolerances=tol)
    if cfg.command == "sphere":
        return sphere_duality_suite(cfg.points, cfg.seed, tolerances=tol)
    raise ConfigError(f"unknown command {cfg.command!r}")


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def render(report: SuiteReport, cfg: RunConfig) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        rows = report.details.get("rows")
        if rows is not None:
            writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(csv_rows(rows))
        else:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["anchor", "identity", "residual", "tolerance", "instances", "passed"])
            for c in report.checks.values():
                writer.writerow([f"{report.suite}/{c.identity}", c.identity, repr(c.residual), repr(c.tolerance),
                                 c.instances, c.passed])
        return buf.getvalue()
    body = {
        "schema": SCHEMA,
        "version": version_string(),
        "config_hash": cfg.digest(),
        "config": {k: v for k, v in asdict(cfg).items() if k != "output"},
        "suite": report.suite,
        "passed": report.passed,
        "checks": [dict(c.as_dict(), anchor=f"{report.suite}/{c.identity}") for c in report.checks.values()],
        "details": report.details,
    }
    return json.dumps(_jsonable(body), indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = resolve_config(args)
        report = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = render(report, cfg)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {report.suite} ({report.seconds:.1f}s)", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
