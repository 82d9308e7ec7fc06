"""Command-line front end.

Subcommands::

    relaydmt curve     --config 4,2,3 --protocol fdf --a 0.3 --r 0:0.7:0.01
    relaydmt sim       --config 1,1,1 --protocol ddf --r 0.25 --snr 25:45:5 --samples 1e7
    relaydmt reproduce fig2 --out-dir figures/
    relaydmt compare   --config 2,2,2 --r 0:1:0.05

Exit codes: 0 success, 2 configuration error, 3 sample budget refused,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from relaydmt import __version__
from relaydmt.curves import AntennaConfig, Polyline, first_zero, pp_dmt
from relaydmt.oracle import DdfProblem, ddf_alpha_grid_oracle
from relaydmt.outage import MIN_SAMPLES, SIM_PROTOCOLS, OutageSpec, estimate_outage_curve
from relaydmt.protocols import (
    PROTOCOLS,
    ddf_closed_form_222,
    ddf_closed_form_miso,
    ddf_dmt,
    fdf_dmt,
    full_duplex_dmt,
    max_diversity,
    max_multiplexing,
    vdf_dmt,
)
from relaydmt.stats import fit_diversity

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4
OUTPUT_DIR_ENV = "RELAYDMT_OUTPUT_DIR"
CURVE_HEADER = ["protocol", "M1", "M2", "M3", "r", "d"]
SIM_HEADER = [
    "protocol", "M1", "M2", "M3", "r", "a", "rate", "snr_db",
    "n_samples", "outages", "p_hat", "ci_low", "ci_high", "seed",
]
REPRODUCE_STEP = 0.005
DEFAULT_MAX_SECONDS = 600.0


class ConfigError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, str)):
        return str(x)
    return format(float(x), ".15g")


@dataclass
class RunConfig:
    command: str
    config: AntennaConfig | None = None
    protocols: list[str] = field(default_factory=list)
    r_grid: list[float] = field(default_factory=list)
    a: float | None = None
    rate: float | None = None
    snr_grid_db: list[float] = field(default_factory=list)
    samples: int = 0
    seed: int = 0
    workers: int | None = None
    output: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if self.command == "sim" and self.samples < MIN_SAMPLES:
            raise ConfigError(f"--samples must be at least {MIN_SAMPLES}")


def parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}: {exc}") from None
    if not step > 0:
        raise ConfigError("grid step must be positive")
    if stop < start:
        raise ConfigError("grid stop must not precede start")
    return start, stop, step


def r_grid(start: float, stop: float, step: float, endpoint=None) -> list[float]:
    """Half-open grid ``start, start + step, ... < stop`` plus ``endpoint`` if it lies inside."""
    n = int(math.floor((stop - start) / step + 1e-9))
    pts = [start + k * step for k in range(n + 1)]
    pts = [round(p, 12) for p in pts if p < stop - 1e-12] or [start]
    if endpoint is not None:
        # keep the endpoint unrounded so protocol zeros land on it exactly
        e = float(endpoint)
        if start <= e <= stop:
            pts = [p for p in pts if abs(p - e) > 1e-9] + [e]
            pts.sort()
    return pts


def snr_grid(text: str) -> list[float]:
    start, stop, step = parse_range(text)
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + k * step, 12) for k in range(n + 1)]


def _config(text: str) -> AntennaConfig:
    try:
        return AntennaConfig.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _protocols(text: str, allowed) -> list[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    bad = [p for p in names if p not in allowed]
    if bad or not names:
        raise ConfigError(f"unknown protocol(s) {bad}; choose from {', '.join(allowed)}")
    return names


def _write(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _exact_curve(config: AntennaConfig, protocol: str, a) -> Polyline | None:
    if protocol == "full_duplex":
        return full_duplex_dmt(config)
    if protocol == "fdf":
        return fdf_dmt(config, a)
    return None


def curve_rows(config: AntennaConfig, protocols, rs, a=None):
    """Rows ``(protocol, M1, M2, M3, r, d)`` on the grid."""
    rows = []
    for p in protocols:
        exact = _exact_curve(config, p, a)
        for r in rs:
            if exact is not None:
                d = float(exact.eval(r))
            elif p == "vdf":
                d = vdf_dmt(config, r)
            else:
                d = ddf_dmt(config, r)
            rows.append((p, config.m1, config.m2, config.m3, r, d))
    return rows


def run_curve(cfg: RunConfig) -> int:
    cfg.validate()
    if "fdf" in cfg.protocols and (cfg.a is None or not 0 < cfg.a < 1):
        raise ConfigError("protocol fdf needs --a in (0, 1)")
    rows = curve_rows(cfg.config, cfg.protocols, cfg.r_grid, cfg.a)
    if cfg.fmt == "csv":
        _write(_csv(CURVE_HEADER, rows), cfg.output)
    else:
        doc = {
            "config": [cfg.config.m1, cfg.config.m2, cfg.config.m3],
            "a": cfg.a,
            "rows": [dict(zip(CURVE_HEADER, row)) for row in rows],
            "curves": {
                p: json.loads(c.to_json())
                for p in cfg.protocols
                if (c := _exact_curve(cfg.config, p, cfg.a)) is not None
            },
        }
        _write(json.dumps(doc, indent=2) + "\n", cfg.output)
    return EXIT_OK


def estimated_seconds(config: AntennaConfig, n_samples: int, n_snr: int) -> float:
    """Rough single-core wall-clock estimate for a simulation."""
    entries = config.m1 * config.m2 + config.m2 * config.m3
    k = max(min(config.m1, config.m2), min(config.m2, config.m3))
    per_sample = 1.5e-7 * entries + 2e-8 * n_snr * (1 + (k > 1) * 8 * k**2)
    return n_samples * per_sample


def analytic_diversity(spec: OutageSpec) -> float:
    r = 0.0 if spec.rate is not None else spec.r
    p = spec.protocol
    if p == "cutset" or p == "ddf":
        return ddf_dmt(spec.config, r)
    if p == "vdf":
        return vdf_dmt(spec.config, r)
    if p == "fdf":
        return float(fdf_dmt(spec.config, spec.a).eval(r))
    return float(full_duplex_dmt(spec.config).eval(r))


def run_sim(cfg: RunConfig, max_seconds: float = DEFAULT_MAX_SECONDS) -> int:
    cfg.validate()
    if not cfg.snr_grid_db:
        raise ConfigError("--snr grid is empty")
    protocol = cfg.protocols[0]
    r = cfg.r_grid[0] if cfg.r_grid else 0.0
    try:
        spec = OutageSpec(cfg.config, protocol, r=r, a=cfg.a, rate=cfg.rate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    est = estimated_seconds(cfg.config, cfg.samples, len(cfg.snr_grid_db))
    if est > max_seconds:
        raise BudgetError(f"estimated {est:.0f} s exceeds the {max_seconds:.0f} s cap")
    results = estimate_outage_curve(spec, cfg.snr_grid_db, cfg.samples, cfg.seed, cfg.workers)
    points = [e.to_dict() for e in results]
    try:
        fit = fit_diversity([(e.snr_db, e.p_hat, e.outages, e.n_samples) for e in results])
        summary = {"slope": fit.slope, "stderr": fit.slope_stderr, "used": fit.used}
    except ValueError as exc:
        summary = {"slope": None, "stderr": None, "error": str(exc)}
    summary["analytic"] = analytic_diversity(spec)
    c = cfg.config
    if cfg.fmt == "csv":
        rows = [
            (protocol, c.m1, c.m2, c.m3, spec.r, spec.alloc, spec.rate, e["snr_db"],
             e["n_samples"], e["outages"], e["p_hat"], e["ci_low"], e["ci_high"], e["seed"])
            for e in points
        ]
        _write(_csv(SIM_HEADER, rows), cfg.output)
        if cfg.output is not None:
            fit_path = Path(cfg.output).with_suffix(".fit.json")
            fit_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    else:
        doc = {"spec": spec.to_dict(), "points": points, "fit": summary, "version": __version__}
        _write(json.dumps(doc, indent=2) + "\n", cfg.output)
    if summary["slope"] is not None:
        print(
            f"fitted slope {summary['slope']:.4f} +/- {summary['stderr']:.4f}, "
            f"analytic {summary['analytic']:.4f}",
            file=sys.stderr,
        )
    else:
        print(f"no slope fit: {summary['error']}", file=sys.stderr)
    return EXIT_OK


def _check(name, expected, actual, tol=1e-9) -> dict:
    return {
        "check": name,
        "expected": float(expected),
        "actual": float(actual),
        "passed": abs(float(expected) - float(actual)) <= tol,
    }


def _pp_rows(m, n, label, config, rs):
    c = pp_dmt(m, n)
    return [(label, config.m1, config.m2, config.m3, r, float(c.eval(r))) for r in rs]


def figure_data(figure: str):
    """Curve tables and endpoint checks for one of the reference figures."""
    if figure == "fig2":
        cfg = AntennaConfig(4, 2, 3)
        rs = r_grid(0, 2, REPRODUCE_STEP, endpoint=max_multiplexing(cfg))
        fdf = fdf_dmt(cfg, Fraction(3, 10))
        curves = {
            "pp_4x2": _pp_rows(4, 2, "pp_4x2", cfg, rs),
            "pp_2x3": _pp_rows(2, 3, "pp_2x3", cfg, rs),
            "fdf_a0.3": [
                ("fdf_a0.3",) + row[1:] for row in curve_rows(cfg, ["fdf"], rs, Fraction(3, 10))
            ],
        }
        checks = [
            _check("fdf(a=0.3) at r=0", 6, fdf.eval(0)),
            _check("fdf(a=0.3) first zero", Fraction(3, 5), first_zero(fdf)),
            _check("full duplex equals d_2x3", 1, int(full_duplex_dmt(cfg) == pp_dmt(2, 3))),
        ]
    elif figure == "fig3":
        cfg = AntennaConfig(4, 1, 3)
        rs = r_grid(0, 1, REPRODUCE_STEP, endpoint=max_multiplexing(cfg))
        curves = {
            "cutset_4x1": _pp_rows(4, 1, "cutset_4x1", cfg, rs),
            "cutset_1x3": _pp_rows(1, 3, "cutset_1x3", cfg, rs),
            "full_duplex": curve_rows(cfg, ["full_duplex"], rs),
            "ddf": curve_rows(cfg, ["ddf"], rs),
            "ddf_closed_form": [
                ("ddf_closed_form", 4, 1, 3, r, ddf_closed_form_miso(4, 3, r)) for r in rs
            ],
            "vdf": curve_rows(cfg, ["vdf"], rs),
            "fdf_a0.5": [("fdf_a0.5",) + row[1:] for row in curve_rows(cfg, ["fdf"], rs, 0.5)],
        }
        checks = [
            _check("ddf at r=0", 3, ddf_dmt(cfg, 0)),
            _check("ddf at r=1/2", 0, ddf_dmt(cfg, 0.5)),
            _check("vdf at r=0", max_diversity(cfg), vdf_dmt(cfg, 0)),
            _check("fdf(a=0.5) first zero", Fraction(1, 2), first_zero(fdf_dmt(cfg, Fraction(1, 2)))),
        ]
    elif figure == "fig4":
        cfg = AntennaConfig(2, 2, 2)
        rs = r_grid(0, 2, REPRODUCE_STEP, endpoint=max_multiplexing(cfg))
        curves = {
            "full_duplex": curve_rows(cfg, ["full_duplex"], rs),
            "ddf": curve_rows(cfg, ["ddf"], rs),
            "ddf_closed_form": [
                ("ddf_closed_form", 2, 2, 2, r, ddf_closed_form_222(r)) for r in rs
            ],
            "vdf": curve_rows(cfg, ["vdf"], rs),
            "fdf_a0.5": [("fdf_a0.5",) + row[1:] for row in curve_rows(cfg, ["fdf"], rs, 0.5)],
        }
        checks = [
            _check(f"ddf at r={r}", d, ddf_dmt(cfg, float(r)))
            for r, d in ((Fraction(0), 4), (Fraction(1, 2), 2), (Fraction(2, 3), 1), (Fraction(1), 0))
        ]
        gap = max(
            abs(ddf_dmt(cfg, r) - ddf_closed_form_222(r)) for r in rs if r <= 1
        )
        checks.append({
            "check": "max |ddf - three-branch closed form| on grid (informational)",
            "expected": 0.0,
            "actual": gap,
            "passed": gap <= 1e-6,
        })
    else:
        raise ConfigError(f"unknown figure {figure!r}; choose fig2, fig3 or fig4")
    return cfg, curves, checks


def run_reproduce(figure: str, out_dir: str | os.PathLike, argv=None) -> int:
    cfg, curves, checks = figure_data(figure)
    base = Path(out_dir) / figure
    try:
        base.mkdir(parents=True, exist_ok=True)
        files = []
        for name, rows in curves.items():
            path = base / f"{name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(_csv(CURVE_HEADER, rows))
            files.append(path.name)
        manifest = {
            "figure": figure,
            "config": [cfg.m1, cfg.m2, cfg.m3],
            "r_step": REPRODUCE_STEP,
            "files": files,
            "checks": checks,
            "command": list(argv) if argv is not None else None,
            "seed": None,
            "version": __version__,
        }
        (base / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {base}: {exc}", file=sys.stderr)
        return EXIT_IO
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {figure}: {c['check']}", file=sys.stderr)
    return EXIT_OK


def run_compare(cfg: RunConfig, oracle_step: float) -> int:
    """DDF solver next to the exponent-grid oracle and any closed form."""
    cfg.validate()
    c = cfg.config
    header = ["M1", "M2", "M3", "r", "ddf", "oracle", "closed_form", "vdf", "full_duplex"]
    fd = full_duplex_dmt(c)
    rows = []
    for r in cfg.r_grid:
        if c.m2 == 1:
            closed = ddf_closed_form_miso(c.m1, c.m3, r)
        elif (c.m1, c.m2, c.m3) == (2, 2, 2):
            closed = ddf_closed_form_222(r)
        else:
            closed = None
        oracle = None
        if DdfProblem(c, r).dim <= 6:
            oracle = ddf_alpha_grid_oracle(DdfProblem(c, r), oracle_step)
        rows.append((c.m1, c.m2, c.m3, r, ddf_dmt(c, r), oracle, closed, vdf_dmt(c, r), float(fd.eval(r))))
    if cfg.fmt == "csv":
        _write(_csv(header, rows), cfg.output)
    else:
        doc = [dict(zip(header, row)) for row in rows]
        _write(json.dumps(doc, indent=2) + "\n", cfg.output)
    return EXIT_OK


def _samples(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sample count {text!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError("sample count must be an integer")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaydmt", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="antenna counts M1,M2,M3")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", help="output file (default: stdout)")

    p = sub.add_parser("curve", help="tabulate DMT curves")
    common(p)
    p.add_argument("--protocol", default="full_duplex,vdf,ddf",
                   help=f"comma-separated subset of {','.join(PROTOCOLS)}")
    p.add_argument("--a", type=float, help="fixed time allocation for fdf")
    p.add_argument("--r", help="r grid start:stop:step (default 0:min(M1*,M2*):0.01)")

    p = sub.add_parser("sim", help="Monte Carlo outage probability and slope fit")
    common(p)
    p.add_argument("--protocol", required=True, choices=SIM_PROTOCOLS)
    p.add_argument("--r", type=float, default=0.0, help="multiplexing gain")
    p.add_argument("--a", type=float, help="fixed time allocation for fdf")
    p.add_argument("--rate", type=float, help="fixed rate in bits, overrides r log2 SNR")
    p.add_argument("--snr", default="25:45:5", help="SNR grid in dB, start:stop:step inclusive")
    p.add_argument("--samples", type=_samples, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--max-seconds", type=float, default=DEFAULT_MAX_SECONDS,
                   help="refuse runs whose estimated wall-clock time exceeds this")

    p = sub.add_parser("reproduce", help="write figure data and a manifest")
    p.add_argument("figure", choices=("fig2", "fig3", "fig4", "all"))
    p.add_argument("--out-dir", default=os.environ.get(OUTPUT_DIR_ENV, "dmt_figures"),
                   help=f"output directory (default: ${OUTPUT_DIR_ENV} or ./dmt_figures)")

    p = sub.add_parser("compare", help="DDF solver against the exponent-grid oracle")
    common(p)
    p.add_argument("--r", help="r grid start:stop:step (default 0:max multiplexing:0.05)")
    p.add_argument("--oracle-step", type=float, default=0.005)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            figs = ("fig2", "fig3", "fig4") if args.figure == "all" else (args.figure,)
            code = EXIT_OK
            for f in figs:
                code = max(code, run_reproduce(f, args.out_dir, ["relaydmt", *argv]))
            return code

        config = _config(args.config)
        cfg = RunConfig(command=args.command, config=config, fmt=args.format, output=args.output)
        if args.command == "curve":
            cfg.protocols = _protocols(args.protocol, PROTOCOLS)
            cfg.a = args.a
            stop = max(config.m1_star, config.m2_star)
            start, stop, step = parse_range(args.r) if args.r else (0.0, stop, 0.01)
            cfg.r_grid = r_grid(start, stop, step, endpoint=max_multiplexing(config))
            return run_curve(cfg)
        if args.command == "sim":
            cfg.protocols = [args.protocol]
            cfg.r_grid = [args.r]
            cfg.a, cfg.rate = args.a, args.rate
            cfg.snr_grid_db = snr_grid(args.snr)
            cfg.samples, cfg.seed, cfg.workers = args.samples, args.seed, args.workers
            return run_sim(cfg, args.max_seconds)
        if args.command == "compare":
            mm = max_multiplexing(config)
            start, stop, step = parse_range(args.r) if args.r else (0.0, float(mm), 0.05)
            cfg.r_grid = r_grid(start, stop, step, endpoint=mm)
            if not 0 < args.oracle_step <= 0.1:
                raise ConfigError("--oracle-step must lie in (0, 0.1]")
            return run_compare(cfg, args.oracle_step)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_CONFIG  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
