"""Command-line interface.

Subcommands: ``fit``, ``predict``, ``power-report``, ``decay-experiment``,
``verify``. Exit status is 0 on success, 1 on numerical failure and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError

from .diagnostics import verify_identities
from .experiments import DEFAULT_LAMBDAS, FIG1_NODES, ExperimentConfig, decay_experiment, powerfun_experiment
from .geometry import grid_interval, grid_unit_ball
from .greedy import GreedyConfig, fit, predict
from .kernels import FAMILIES, KernelSpec, as_points
from .linalg import NotPositiveDefinite
from .surrogate_io import (
    FormatError,
    _csv_text,
    _write_text,
    fmt,
    read_model_json,
    read_points_csv,
    read_query_csv,
    write_model_json,
    write_trace_csv,
)

logger = logging.getLogger("regreedy")

EXIT_NUMERICAL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _nonneg(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _positive(text):
    v = _nonneg(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _posint(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _add_kernel_flags(p, lam_many=False, eps=1.0, family="gaussian"):
    p.add_argument("--kernel", choices=FAMILIES, default=family)
    p.add_argument("--eps", type=_positive, default=eps, help="shape parameter")
    p.add_argument("--wendland-k", type=int, choices=(0, 1, 2, 3), default=2)
    if lam_many:
        p.add_argument("--lambda", dest="lam", type=_nonneg, nargs="+", default=list(DEFAULT_LAMBDAS))
    else:
        p.add_argument("--lambda", dest="lam", type=_nonneg, default=0.0)


def _add_grid_flags(p, ball=None):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid-ball", type=int, metavar="M", default=ball)
    g.add_argument("--grid-interval", type=float, nargs=3, metavar=("A", "B", "M"))


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--threads", type=_posint, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regreedy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="greedy fit of a data CSV")
    _add_kernel_flags(p)
    p.add_argument("--rule", choices=("p-greedy", "f-greedy"), default="p-greedy")
    p.add_argument("--max-points", type=_posint, default=100)
    p.add_argument("--power-tol", type=_nonneg, default=1e-16)
    p.add_argument("--residual-tol", type=_nonneg, default=None)
    p.add_argument("--data", required=True, help="CSV with header x1,...,xd,f")
    _add_common(p)

    p = sub.add_parser("predict", help="evaluate a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="query CSV with header x1,...,xd")
    _add_common(p)

    p = sub.add_parser("power-report", help="power functions of a fixed 1-d node set")
    _add_kernel_flags(p, eps=4.0)
    p.set_defaults(lam=0.1)
    p.add_argument("--nodes", type=float, nargs="+", default=list(FIG1_NODES))
    p.add_argument("--grid-interval", type=float, nargs=3, metavar=("A", "B", "M"), default=[0.0, 1.0, 1001])
    _add_common(p)

    p = sub.add_parser("decay-experiment", help="P-greedy power decay for a list of lambdas")
    _add_kernel_flags(p, lam_many=True, family="wendland")
    p.add_argument("--rule", choices=("p-greedy", "f-greedy"), default="p-greedy")
    p.add_argument("--max-points", type=_posint, default=1000)
    p.add_argument("--power-tol", type=_nonneg, default=1e-16)
    _add_grid_flags(p, ball=160)
    _add_common(p)

    p = sub.add_parser("verify", help="check the power-function identities")
    _add_kernel_flags(p, eps=4.0)
    p.set_defaults(lam=0.1)
    p.add_argument("--data", help="node CSV; defaults to the nodes 0.1, 0.4, 0.7, 0.8 in 1-d")
    p.add_argument("--samples", type=_posint, default=500)
    p.add_argument("--tol", type=_nonneg, default=1e-8)
    _add_grid_flags(p)
    _add_common(p)
    return parser


def _apply_config(args):
    if not getattr(args, "config", None):
        return args
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for key, value in doc.items():
        dest = key.replace("-", "_")
        if dest == "lambda":
            dest = "lam"
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, dest, value)
    return args


def _spec(args, dim, lam=None):
    return KernelSpec(args.kernel, float(args.eps), dim, float(args.lam if lam is None else lam), int(args.wendland_k))


def cmd_fit(args):
    data = read_points_csv(args.data)
    if data.values is None:
        raise UsageError(f"{args.data} has no f column")
    spec = _spec(args, data.dim)
    config = GreedyConfig(args.rule, int(args.max_points), args.power_tol, args.residual_tol)
    model, trace = fit(spec, config, data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_model_json(model, out / "model.json")
    write_trace_csv(trace, out / "trace.csv")
    last = trace.records[-1] if trace.records else None
    print(f"n={model.n} stop={trace.stop_reason}")
    if last:
        print(f"max_power={last.max_power:.6e} max_residual={last.max_residual:.6e}")
    return 0


def cmd_predict(args):
    model = read_model_json(args.model)
    pts = read_query_csv(args.data)
    pts = as_points(pts, model.spec.dim) if pts.size else np.zeros((0, model.spec.dim))
    t0 = time.perf_counter()
    y = predict(model, pts)
    dt = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = [f"x{i + 1}" for i in range(model.spec.dim)] + ["prediction"]
    rows = [[fmt(v) for v in p] + [fmt(v)] for p, v in zip(pts, y)]
    _write_text(out / "predictions.csv", _csv_text(header, rows))
    rate = len(y) / dt if dt > 0 and len(y) else float("nan")
    print(f"queries={len(y)} model_size={model.n} queries_per_sec={rate:.3e}")
    return 0


def cmd_power_report(args):
    a, b, m = args.grid_interval
    report, check = powerfun_experiment(
        args.kernel, float(args.eps), float(args.lam), args.nodes, (a, b, int(m)), int(args.wendland_k), args.out
    )
    for name, v in check.items():
        print(f"{name}: {v:.3e} {'PASS' if v <= check.tol else 'FAIL'}")
    return 0


def cmd_decay(args):
    if args.grid_interval is not None:
        a, b, m = args.grid_interval
        grid = dict(grid_ball=None, grid_interval=(a, b, int(m)))
    else:
        grid = dict(grid_ball=int(args.grid_ball))
    lams = args.lam if isinstance(args.lam, (list, tuple)) else [args.lam]
    config = ExperimentConfig(
        family=args.kernel,
        eps=float(args.eps),
        wendland_k=int(args.wendland_k),
        lambdas=tuple(lams),
        rule=args.rule,
        max_points=int(args.max_points),
        power_tol=float(args.power_tol),
        out=args.out,
        threads=int(args.threads),
        **grid,
    )
    result = decay_experiment(config)
    base = result["curves"][0.0]
    print(f"lambda=0: n={len(base.max_power) - 1} stop={base.stop_reason}")
    for lam, (c, n_common) in result["coefficients"].items():
        print(f"lambda={lam:g}: c_lambda={c:.4f} over n<={n_common}")
    return 0


def cmd_verify(args):
    if args.data:
        X = read_points_csv(args.data).points
    else:
        X = np.asarray(FIG1_NODES)[:, None]
    dim = X.shape[1]
    spec = _spec(args, dim)
    if args.grid_ball is not None:
        samples = grid_unit_ball(int(args.grid_ball)).points
    elif args.grid_interval is not None:
        a, b, m = args.grid_interval
        samples = grid_interval(a, b, int(m)).points
    else:
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 0.1 * np.maximum(hi - lo, 1.0)
        samples = np.random.default_rng(0).uniform(lo - pad, hi + pad, size=(int(args.samples), dim))
    report = verify_identities(spec, X, spec.lam, samples, tol=float(args.tol))
    for name, v in report.items():
        print(f"{name}: {v:.3e} {'PASS' if v <= report.tol else 'FAIL'}")
    return 0 if report.passed else EXIT_NUMERICAL


COMMANDS = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "power-report": cmd_power_report,
    "decay-experiment": cmd_decay,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _apply_config(args)
        return COMMANDS[args.command](args)
    except (NotPositiveDefinite, LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
