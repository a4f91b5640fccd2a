"""Command line: ``loewnersim {simulate,hull,converge,checks}``.

Exit codes: 0 success, 1 invalid arguments, 2 numerical failure,
3 a check was violated.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, diagnostics, odesolver, output, zipper
from . import driver as drv

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    driver: str = "zero"
    kappa: str | None = None
    c: float | None = None
    n: int = 64
    seed: int = 0
    file: str | None = None
    perturb: float = 0.0
    perturb_seed: int = 0
    mode: str = "tilted"
    m: int = 4
    csv: str | None = None
    svg: str | None = None
    json: str | None = None
    out: str | None = None
    t: float = 1.0
    bounds: tuple = (-1.0, 1.0, 0.0, 2.0)
    resolution: float = 20.0
    eps_blow: float = 1e-6
    seeds: list = field(default_factory=lambda: [0])
    n0: int = 16
    doublings: int = 3
    trials: int = 10_000
    workers: int | None = None

    @property
    def kappa_value(self) -> float | None:
        return None if self.kappa is None else float(Fraction(self.kappa))

    def validate(self) -> "RunConfig":
        def positive(name, value):
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"--{name.replace('_', '-')} must be positive and finite")

        if self.kappa is not None:
            try:
                k = Fraction(self.kappa)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"cannot parse kappa {self.kappa!r}") from None
            if k < 0:
                raise ConfigError("kappa must be nonnegative")
        if self.driver in ("bm", "rw") and self.kappa is None:
            raise ConfigError(f"--driver {self.driver} needs --kappa")
        if self.driver == "sqrt" and self.c is None:
            raise ConfigError("--driver sqrt needs --c")
        if self.driver == "file" and not self.file:
            raise ConfigError("--driver file needs --file")
        if self.c is not None and not math.isfinite(self.c):
            raise ConfigError("--c must be finite")
        for name in ("n", "m", "resolution", "eps_blow", "n0", "doublings", "trials"):
            positive(name, getattr(self, name))
        if self.command == "converge" and (self.n0 < 16 or self.doublings < 2):
            raise ConfigError("converge needs --n0 >= 16 and --doublings >= 2")
        if not (self.perturb >= 0 and math.isfinite(self.perturb)):
            raise ConfigError("--perturb must be nonnegative")
        if not 0 <= self.t <= 1:
            raise ConfigError("--t must lie in [0, 1]")
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin and ymin >= 0):
            raise ConfigError("--bounds must be XMIN XMAX YMIN YMAX with YMIN >= 0")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return self

    def metadata(self) -> dict:
        meta = {"loewnersim": __version__, "command": self.command, "driver": self.driver,
                "n": self.n, "mode": self.mode}
        if self.driver in ("bm", "rw"):
            meta.update(kappa=self.kappa, seed=self.seed, rng=drv.RNG_NAME)
        if self.driver == "sqrt":
            meta["c"] = repr(self.c)
        if self.driver == "file":
            meta["file"] = self.file
        if self.perturb:
            meta.update(perturb=repr(self.perturb), perturb_seed=self.perturb_seed)
        return meta


def make_driver(cfg: RunConfig) -> drv.SampledDriver:
    if cfg.driver == "bm":
        d = drv.sample_bm(cfg.kappa_value, cfg.n, cfg.seed)
    elif cfg.driver == "rw":
        d = drv.sample_rw(cfg.kappa_value, cfg.n, cfg.seed)
    elif cfg.driver == "sqrt":
        d = drv.sqrt_driver(cfg.c, cfg.n)
    elif cfg.driver == "zero":
        d = drv.zero_driver(cfg.n)
    elif cfg.driver == "file":
        d = drv.load_driver(cfg.file)
    else:
        raise ConfigError(f"unknown driver {cfg.driver!r}")
    if cfg.perturb:
        d = drv.perturb(d, cfg.perturb, cfg.perturb_seed)
    if cfg.mode == "vertical":
        d = d.with_mode(drv.STEP)
    return d


def run_simulate(cfg: RunConfig) -> list[str]:
    d = make_driver(cfg)
    chain = zipper.build(d, cfg.mode)
    curve = zipper.simulate(chain, cfg.m, workers=cfg.workers)
    meta = cfg.metadata()
    meta["n"] = d.n
    if cfg.mode == "tilted":
        meta["m"] = cfg.m
    written = []
    if cfg.csv and cfg.csv != "-":
        output.write_curve_csv(curve, cfg.csv, meta)
        written.append(cfg.csv)
    elif not cfg.svg or cfg.csv == "-":
        sys.stdout.write(output.curve_csv(curve, meta))
    if cfg.svg:
        output.write_svg(curve, cfg.svg, meta)
        written.append(cfg.svg)
    return written


def run_hull(cfg: RunConfig) -> odesolver.HullRaster:
    d = make_driver(cfg)
    raster = odesolver.hull_raster(d, cfg.t, cfg.bounds, cfg.resolution,
                                   eps_blow=cfg.eps_blow, workers=cfg.workers)
    meta = cfg.metadata()
    meta.update(t=repr(cfg.t), bounds=" ".join(map(repr, cfg.bounds)),
                resolution=repr(cfg.resolution), eps_blow=repr(cfg.eps_blow))
    text = output.raster_pgm(raster.mask, meta)
    if cfg.out and cfg.out != "-":
        output.atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)
    return raster


def run_converge(cfg: RunConfig) -> diagnostics.ConvergenceReport:
    report = diagnostics.convergence_study(
        cfg.driver, seeds=cfg.seeds, n0=cfg.n0, doublings=cfg.doublings, m=cfg.m,
        kappa=cfg.kappa_value, c=cfg.c, workers=cfg.workers)
    doc = report.to_dict()
    doc["descriptor"]["kappa_str"] = cfg.kappa
    doc["provenance"] = cfg.metadata()
    if cfg.json and cfg.json != "-":
        output.write_json(doc, cfg.json)
    else:
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return report


def run_checks(cfg: RunConfig) -> tuple[bool, list]:
    """Run every diagnostic on the configured driver; returns ``(all_passed, reports)``."""
    d = make_driver(cfg).with_mode(drv.SQRT)
    chain = zipper.build(d)
    curve = zipper.simulate(chain, cfg.m)
    W1 = drv.SampledDriver(np.zeros(2))
    W2 = drv.SampledDriver(np.full(2, 0.1))
    reports = [
        diagnostics.check_G_monotone(cfg.trials, cfg.seed),
        diagnostics.check_oscillation(curve, d),
        diagnostics.check_simple(curve),
        diagnostics.check_capacity(chain),
        diagnostics.check_oracle(d),
        diagnostics.check_jrw(W1, W2, 1j, 1.0),
        diagnostics.check_hcap_diam(d, 1.0),
    ]
    ok = all(r.passed for r in reports)
    doc = {"provenance": cfg.metadata(), "passed": ok, "checks": [r.to_dict() for r in reports]}
    if cfg.json and cfg.json != "-":
        output.write_json(doc, cfg.json)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} slack={r.slack:.3g}")
    return ok, reports


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _seed_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="loewnersim", description="Simulate Loewner curves by slit-map composition.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def driver_args(sp, choices=("bm", "rw", "sqrt", "zero", "file")):
        sp.add_argument("--driver", choices=choices, default="zero")
        sp.add_argument("--kappa", help="rational allowed, e.g. 8/3")
        sp.add_argument("--c", type=float, help="coefficient of the c*sqrt(t) driver")
        sp.add_argument("--n", type=int, default=64, help="number of steps")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--file", help="driver file (first line n, then n+1 values)")
        sp.add_argument("--perturb", type=float, default=0.0, help="max grid perturbation")
        sp.add_argument("--perturb-seed", type=int, default=0)
        sp.add_argument("--workers", type=int)

    s = sub.add_parser("simulate", help="simulate the curve; write CSV and/or SVG")
    driver_args(s)
    s.add_argument("--mode", choices=("tilted", "vertical"), default="tilted")
    s.add_argument("--m", type=int, default=4, help="points per step (tilted)")
    s.add_argument("--csv", help="curve CSV path ('-' for stdout)")
    s.add_argument("--svg", help="SVG path")

    h = sub.add_parser("hull", help="rasterise the hull by blow-up times (PGM)")
    driver_args(h)
    h.add_argument("--mode", choices=("tilted", "vertical"), default="tilted")
    h.add_argument("--t", type=float, default=1.0)
    h.add_argument("--bounds", type=float, nargs=4, default=(-1.0, 1.0, 0.0, 2.0),
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    h.add_argument("--resolution", type=float, default=20.0, help="pixels per unit")
    h.add_argument("--eps-blow", type=float, default=1e-6)
    h.add_argument("--out", help="PGM path ('-' for stdout)")

    c = sub.add_parser("converge", help="coupled sup-norm convergence study (JSON)")
    driver_args(c, choices=("bm", "sqrt", "zero"))
    c.add_argument("--seeds", type=_seed_list, default=[0], help="e.g. 1-20 or 1,2,5")
    c.add_argument("--n0", type=int, default=16)
    c.add_argument("--doublings", type=int, default=3)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--json", help="report path ('-' for stdout)")

    k = sub.add_parser("checks", help="run the diagnostic suite")
    driver_args(k)
    k.add_argument("--m", type=int, default=4)
    k.add_argument("--trials", type=int, default=10_000)
    k.add_argument("--json", help="report path")
    return p


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if v is not None}
    if "bounds" in values:
        values["bounds"] = tuple(values["bounds"])
    return RunConfig(**values).validate()


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"loewnersim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if cfg.command == "simulate":
            run_simulate(cfg)
        elif cfg.command == "hull":
            run_hull(cfg)
        elif cfg.command == "converge":
            run_converge(cfg)
        elif cfg.command == "checks":
            ok, _ = run_checks(cfg)
            if not ok:
                return EXIT_CHECK
    except (ConfigError, OSError) as exc:
        print(f"loewnersim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"loewnersim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (odesolver.SolverFailure, FloatingPointError, ArithmeticError) as exc:
        print(f"loewnersim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
