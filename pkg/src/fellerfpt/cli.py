"""Command-line front end.

Every command writes one self-describing table: ``#``-prefixed metadata lines
followed by a CSV header and rows, or the same content as JSON with
``--format json``.  All quantities are dimensionless; when the model is given
through ``--alpha --beta --k`` the conversion factors are echoed in the
metadata, and ``--physical-units`` makes state and time inputs physical too.

Exit codes: 0 success, 2 configuration error, 3 accuracy flag under
``--strict``, 4 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .invert import StehfestConfig
from .laplace import IntervalSpec, ThresholdSpec
from .mc import CrossingDetection, SimScheme, empirical_cdf, simulate_escape, simulate_fpt
from .passage import (
    default_t_grid,
    escape_curve,
    fpt_curve,
    mean_escape_time,
    mfpt,
)
from .process import DimensionlessModel, FellerParams, transition_pdf
from .specfun import DomainError

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY, EXIT_VALIDATION = 0, 2, 3, 4
STEHFEST_NOISE = 5e-4

# Best-guess presets for the three published figures.  The source does not
# state the parameter values, so these are illustrative choices, not verified
# reproductions.
FIGURE_PRESETS = {
    1: {"x_c": 1.0, "thetas": (0.5, 1.5), "xs": (0.25, 0.5), "t": (0.01, 20.0)},
    2: {"thetas": (0.25, 0.75), "xs": (0.5, 1.0), "t": (0.01, 20.0)},
    3: {"x_c": 1.0, "thetas": (0.5, 1.5), "x_max": 3.0, "dx": 0.05},
}


class ConfigError(ValueError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


# ---------------------------------------------------------------------------
# table output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def render(meta: dict, columns: Sequence[str], rows: Sequence[Sequence], fmt: str = "csv") -> str:
    if fmt == "json":
        def conv(v):
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                return _fmt(v)
            if isinstance(v, np.generic):
                return v.item()
            return v
        doc = {"meta": {k: conv(v) for k, v in meta.items()}, "columns": list(columns),
               "rows": [[conv(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Read back a CSV written by this tool: ``(columns, rows)`` as strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, [row for row in reader]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def figure_table(fig: int):
    """Data behind one of the three figures, as ``(meta, columns, rows)``."""
    p = FIGURE_PRESETS[fig]
    meta = {"tool": f"fellerfpt {__version__}", "figure": fig,
            "preset": "best guess, parameter values unverified"}
    if fig in (1, 2):
        ts = default_t_grid(*p["t"])
        cols, series = ["t"], []
        for th in p["thetas"]:
            for x in p["xs"]:
                m = DimensionlessModel(th)
                if fig == 1:
                    c = fpt_curve(ts, x, ThresholdSpec(p["x_c"]), m, "stehfest")
                    cols.append(f"W_theta={th:g}_x={x:g}")
                else:
                    c = fpt_curve(ts, x, ThresholdSpec(0.0), m, "closed_form")
                    cols.append(f"W0_theta={th:g}_x={x:g}")
                series.append(c.values)
        meta.update({"x_c": p.get("x_c", 0.0), "thetas": " ".join(map(str, p["thetas"])),
                     "xs": " ".join(map(str, p["xs"])),
                     "method": "stehfest N=14" if fig == 1 else "closed_form"})
        rows = [[t, *vals] for t, vals in zip(ts, np.array(series).T)]
        return meta, cols, rows
    n = int(round(p["x_max"] / p["dx"]))
    xs = [round(i * p["dx"], 10) for i in range(n + 1)]
    cols, series = ["x"], []
    for th in p["thetas"]:
        m = DimensionlessModel(th)
        series.append([mfpt(x, ThresholdSpec(p["x_c"]), m).value for x in xs])
        cols.append(f"T_theta={th:g}")
    meta.update({"x_c": p["x_c"], "thetas": " ".join(map(str, p["thetas"])), "method": "quadrature"})
    rows = [[x, *vals] for x, vals in zip(xs, np.array(series).T)]
    return meta, cols, rows


def write_figure(fig: int, out_dir: Path, fmt: str = "csv") -> Path:
    meta, cols, rows = figure_table(fig)
    path = Path(out_dir) / f"figure{fig}.{fmt}"
    path.write_text(render(meta, cols, rows, fmt), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _model(args) -> tuple[DimensionlessModel, dict]:
    phys = [args.alpha, args.beta, args.k]
    if args.theta is not None:
        if any(v is not None for v in phys):
            raise ConfigError("--theta", "give either --theta or --alpha/--beta/--k, not both")
        try:
            m = DimensionlessModel(args.theta)
        except DomainError as exc:
            raise ConfigError("--theta", str(exc)) from None
        return m, {"theta": m.theta}
    if any(v is None for v in phys):
        raise ConfigError("--theta", "a model is required: --theta or all of --alpha --beta --k")
    try:
        m = DimensionlessModel.from_params(FellerParams(*phys))
    except DomainError as exc:
        raise ConfigError("--alpha/--beta/--k", str(exc)) from None
    return m, {"alpha": args.alpha, "beta": args.beta, "k": args.k, "theta": m.theta,
               "time_scale": m.time_scale, "state_scale": m.state_scale}


def _state(args, m, v):
    return v * m.state_scale if args.physical_units else v


def _time(args, m, v):
    return v * m.time_scale if args.physical_units else v


def _require(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise ConfigError("--" + n.replace("_", "-"), "required for this command")


def _t_grid(args, m) -> np.ndarray:
    if not 0 < args.tmin < args.tmax:
        raise ConfigError("--tmin/--tmax", "need 0 < tmin < tmax")
    lo, hi = _time(args, m, args.tmin), _time(args, m, args.tmax)
    if args.points:
        if args.points < 2:
            raise ConfigError("--points", "need at least 2 points")
        return np.geomspace(lo, hi, args.points)
    return default_t_grid(lo, hi)


def _x_sweep(args, m, lo_default: float):
    if args.x is not None:
        return [_state(args, m, args.x)]
    lo = lo_default if args.xmin is None else args.xmin
    if args.xmax is None or not args.xmax > lo:
        raise ConfigError("--x", "give --x or a sweep with --xmax > --xmin")
    n = args.points or 31
    return [float(_state(args, m, v)) for v in np.linspace(lo, args.xmax, n)]


def _cfg(args) -> StehfestConfig:
    try:
        return StehfestConfig(args.n_terms)
    except DomainError as exc:
        raise ConfigError("--n-terms", str(exc)) from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_pdf(args):
    m, meta = _model(args)
    _require(args, "x0", "xmax")
    x0 = _state(args, m, args.x0)
    try:
        times = [float(v) for v in args.t.split(",")]
    except ValueError:
        raise ConfigError("--t", f"expected comma-separated times, got {args.t!r}") from None
    if any(t <= 0 for t in times):
        raise ConfigError("--t", "times must be > 0")
    lo = 0.0 if args.xmin is None else args.xmin
    xs = np.linspace(_state(args, m, lo), _state(args, m, args.xmax), args.points or 201)
    rows = []
    for t in times:
        tt = _time(args, m, t)
        for x, p in zip(xs, transition_pdf(xs, tt, x0, m)):
            rows.append([x, tt, p])
    meta.update({"tool": f"fellerfpt {__version__}", "command": "pdf", "x0": x0,
                 "method": "closed form (Bessel, log space)"})
    return meta, ["x", "t", "pdf"], rows, []


def _mc_column(args, sample_fn, ts):
    scheme = SimScheme("exact_transition", args.dt, CrossingDetection(args.crossing))
    sample = sample_fn(scheme)
    p, se = empirical_cdf(sample, ts)
    return p, se, {"mc_paths": args.compare_mc, "mc_seed": args.seed, "mc_dt": args.dt,
                   "mc_crossing": args.crossing, "mc_censored_fraction": sample.censored_fraction}


def _curve_flags(curve) -> list[str]:
    flags = []
    if curve.error_estimate is not None and curve.error_estimate.size:
        worst = float(np.max(curve.error_estimate))
        if worst > STEHFEST_NOISE:
            flags.append(f"inversion error estimate {worst:.2e} exceeds {STEHFEST_NOISE:g}")
    viol = curve.max_monotone_violation()
    if viol > STEHFEST_NOISE:
        flags.append(f"monotonicity violation {viol:.2e}")
    return flags


def _curve_table(args, m, meta, curve, sample_fn):
    cols = ["t", "W"]
    series = [curve.t_grid, curve.values]
    if curve.error_estimate is not None:
        cols.append("error_estimate")
        series.append(curve.error_estimate)
    if args.compare_mc:
        p, se, mc_meta = _mc_column(args, sample_fn, curve.t_grid)
        cols += ["W_mc", "se_mc"]
        series += [p, se]
        meta.update(mc_meta)
    meta.update({"method": curve.method.value})
    for k, v in curve.meta.items():
        meta.setdefault(k, v)
    if curve.error_estimate is not None and curve.error_estimate.size:
        meta["max_error_estimate"] = float(np.max(curve.error_estimate))
    return meta, cols, [list(r) for r in zip(*series)], _curve_flags(curve)


def cmd_fpt(args):
    m, meta = _model(args)
    _require(args, "x", "xc")
    x, xc = _state(args, m, args.x), _state(args, m, args.xc)
    ts = _t_grid(args, m)
    th = ThresholdSpec(xc)
    curve = fpt_curve(ts, x, th, m, args.method, _cfg(args))
    meta.update({"tool": f"fellerfpt {__version__}", "command": "fpt"})
    return _curve_table(args, m, meta, curve, lambda sc: simulate_fpt(
        x, th, m, sc, max_t=max(50.0, float(ts[-1])), n_paths=args.compare_mc, seed=args.seed))


def cmd_escape(args):
    m, meta = _model(args)
    _require(args, "x", "a", "b")
    x = _state(args, m, args.x)
    iv = IntervalSpec(_state(args, m, args.a), _state(args, m, args.b))
    ts = _t_grid(args, m)
    method = "stehfest" if args.method == "auto" else args.method
    curve = escape_curve(ts, x, iv, m, method, _cfg(args))
    meta.update({"tool": f"fellerfpt {__version__}", "command": "escape"})
    return _curve_table(args, m, meta, curve, lambda sc: simulate_escape(
        x, iv, m, sc, max_t=max(50.0, float(ts[-1])), n_paths=args.compare_mc, seed=args.seed))


def _mean_rows(results, xs, comment_fn):
    rows, flags = [], []
    for x, r in zip(xs, results):
        rows.append([x, r.value, r.quadrature_error, r.finite, comment_fn(r)])
        if r.finite and r.value > 0 and r.quadrature_error > 1e-8 * r.value:
            flags.append(f"quadrature error {r.quadrature_error:.2e} at x={x}")
    return rows, flags


def cmd_mfpt(args):
    m, meta = _model(args)
    _require(args, "xc")
    xc = _state(args, m, args.xc)
    xs = _x_sweep(args, m, 0.0)
    th = ThresholdSpec(xc)
    results = [mfpt(x, th, m) for x in xs]

    def comment(r):
        if r.finite:
            return ""
        return "origin unattainable in finite mean time for theta >= 1"

    rows, flags = _mean_rows(results, xs, comment)
    meta.update({"tool": f"fellerfpt {__version__}", "command": "mfpt", "x_c": xc,
                 "method": "quadrature of U(1,1+theta,.) / F(1,1+theta,.)"})
    return meta, ["x", "T", "quadrature_error", "finite", "comment"], rows, flags


def cmd_met(args):
    m, meta = _model(args)
    _require(args, "a", "b")
    iv = IntervalSpec(_state(args, m, args.a), _state(args, m, args.b))
    if args.x is None and args.xmin is None:
        args.xmin = args.a
    if args.x is None and args.xmax is None:
        args.xmax = args.b
    xs = _x_sweep(args, m, iv.a)
    results = [mean_escape_time(x, iv, m) for x in xs]
    rows, flags = _mean_rows(results, xs, lambda r: "")
    meta.update({"tool": f"fellerfpt {__version__}", "command": "met", "a": iv.a, "b": iv.b,
                 "method": "quadrature, ratio N/D"})
    return meta, ["x", "T", "quadrature_error", "finite", "comment"], rows, flags


def cmd_figure(args):
    meta, cols, rows = figure_table(args.fig)
    return meta, cols, rows, []


def cmd_validate(args) -> int:
    from .validation import run_validation

    only = args.only.split(",") if args.only else None

    def progress(res):
        print(res.line(), file=sys.stderr)

    try:
        results = run_validation(only, tighten=args.tighten, seed=args.seed,
                                 n_paths=args.paths or 100_000, progress=progress)
    except KeyError as exc:
        raise ConfigError("--only", str(exc.args[0])) from None
    report = {"tool": f"fellerfpt {__version__}", "seed": args.seed, "tighten": args.tighten,
              "all_passed": all(r.passed for r in results),
              "criteria": [r.to_dict(args.timings) for r in results]}
    _emit(json.dumps(report, indent=1, default=float) + "\n", args.out)
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


COMMANDS = {"pdf": cmd_pdf, "fpt": cmd_fpt, "escape": cmd_escape, "mfpt": cmd_mfpt,
            "met": cmd_met, "figure": cmd_figure}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--theta", type=float, help="dimensionless saturation level 2 beta / k^2")
    g.add_argument("--alpha", type=float, help="mean-reversion rate")
    g.add_argument("--beta", type=float, help="drift constant")
    g.add_argument("--k", type=float, help="noise amplitude")
    g.add_argument("--physical-units", action="store_true",
                   help="interpret state and time inputs in physical units")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--out", help="output file (default: stdout)")
    o.add_argument("--strict", action="store_true",
                   help="exit with code 3 when an accuracy flag is raised")
    o.add_argument("--seed", type=int, default=None)
    o.add_argument("--paths", type=int, default=None)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--x", type=float)
    grid.add_argument("--xmin", type=float)
    grid.add_argument("--xmax", type=float)
    grid.add_argument("--points", type=int)
    grid.add_argument("--tmin", type=float, default=0.01)
    grid.add_argument("--tmax", type=float, default=20.0)
    grid.add_argument("--n-terms", type=int, default=14, help="Stehfest N (even, 4..20)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--compare-mc", type=int, metavar="N", default=0,
                    help="append a Monte Carlo column from N paths")
    mc.add_argument("--dt", type=float, default=0.005, help="Monte Carlo time step")
    mc.add_argument("--crossing", choices=[c.value for c in CrossingDetection],
                    default=CrossingDetection.BRIDGE.value)

    p = argparse.ArgumentParser(prog="fellerfpt", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"fellerfpt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pdf", parents=[common, grid], help="transition density table")
    sp.add_argument("--x0", type=float)
    sp.add_argument("--t", default="1", help="comma-separated times")

    sp = sub.add_parser("fpt", parents=[common, grid, mc], help="first-passage probability curve")
    sp.add_argument("--xc", type=float)
    sp.add_argument("--method", default="auto",
                    choices=("auto", "stehfest", "closed_form", "large_threshold", "asymptotic"))

    sp = sub.add_parser("escape", parents=[common, grid, mc], help="escape probability curve")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--method", default="auto", choices=("auto", "stehfest", "asymptotic"))

    sp = sub.add_parser("mfpt", parents=[common, grid], help="mean first-passage time")
    sp.add_argument("--xc", type=float)

    sp = sub.add_parser("met", parents=[common, grid], help="mean escape time")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)

    sp = sub.add_parser("figure", parents=[common], help="data for the figure presets")
    sp.add_argument("--fig", type=int, choices=(1, 2, 3), required=True)

    sp = sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    sp.add_argument("--only", help="comma-separated criterion names or numbers")
    sp.add_argument("--tighten", type=float, default=1.0,
                    help="divide every tolerance by this factor")
    sp.add_argument("--timings", action="store_true", help="include runtimes in the report")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            from .validation import DEFAULT_SEED
            if args.seed is None:
                args.seed = DEFAULT_SEED
            if not args.tighten > 0:
                raise ConfigError("--tighten", "must be > 0")
            return cmd_validate(args)
        if args.seed is None:
            args.seed = 0
        if getattr(args, "compare_mc", 0) < 0:
            raise ConfigError("--compare-mc", "must be >= 0")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            meta, cols, rows, flags = COMMANDS[args.command](args)
        flags += [f"{w.category.__name__}: {w.message}" for w in caught
                  if issubclass(w.category, UserWarning)]
        meta["accuracy_flags"] = "; ".join(dict.fromkeys(flags)) or "none"
    except ConfigError as exc:
        print(f"fellerfpt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"fellerfpt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(render(meta, cols, rows, args.format), args.out)
    if flags and args.strict:
        print(f"fellerfpt: accuracy flags: {meta['accuracy_flags']}", file=sys.stderr)
        return EXIT_ACCURACY
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
