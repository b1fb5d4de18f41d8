"""Command-line entry point: ``wswag {prox,solve,bench,check}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (or a failed
invariant check).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .benchmark import BenchmarkConfig, run_benchmark
from .checks import run_checks
from .numerics import ConfigurationError, NumericalError
from .operators import BandConvolution, Identity, least_squares_objective
from .prox import ProxSpec, prox_approx
from .solver import SolverConfig, mm_solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("wswag")


def _load_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    return data


def _solver_config(data: dict, weights) -> SolverConfig:
    allowed = {f.name for f in dataclasses.fields(SolverConfig)} - {"weights"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        return SolverConfig(weights=weights, **data)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def cmd_prox(args) -> int:
    z = io.read_complex_csv(args.z)
    W = io.read_weights(args.weights, args.weights_kind) if args.weights else None
    spec = ProxSpec(z, args.beta, W, eta=args.eta, inner_iters=args.iters)
    if spec.outside_convex_regime:
        log.warning("beta * max_row_sum(W) = %.4g >= 1: outside the strictly convex regime", spec.sigma_bound - 1)
    start = np.abs(io.read_complex_csv(args.start)) if args.start else None
    io.write_complex_csv(args.out, prox_approx(spec, start))
    return EXIT_OK


def cmd_solve(args) -> int:
    y = io.read_complex_csv(args.y)
    W = io.read_weights(args.weights, args.weights_kind) if args.weights else None
    data = _load_json(args.config) if args.config else {}
    if args.lam is not None:
        data["lam"] = args.lam
    if "lam" not in data:
        raise ConfigurationError("lam must be given (--lam or in the config file)")
    if args.taps:
        if args.bands is None:
            raise ConfigurationError("--bands is required with --taps")
        if y.size % args.bands:
            raise ConfigurationError(f"observation length {y.size} is not a multiple of {args.bands} bands")
        H = BandConvolution(io.read_taps(args.taps), args.bands, y.size // args.bands)
    else:
        H = Identity(y.size)
    f = least_squares_objective(H, y)
    x0 = io.read_complex_csv(args.x0) if args.x0 else None
    report = mm_solve(f, _solver_config(data, W), x0)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_complex_csv(out / "x.csv", report.final_x)
    (out / "trace.csv").write_text("objective\n" + "".join(io.fmt(v) + "\n" for v in report.objective_trace))
    summary = {
        "termination": report.termination,
        "outer_iterations": report.outer_iterations,
        "final_objective": io.fmt(report.final_objective),
        "final_residual": io.fmt(report.final_residual),
        "alpha": io.fmt(report.alpha),
        "beta": io.fmt(report.beta),
        "eta": io.fmt(report.eta),
        "lipschitz": io.fmt(f.lipschitz),
        "wall_time": report.wall_time,
    }
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{report.termination} after {report.outer_iterations} iterations, C = {report.final_objective:.10g}")
    return EXIT_OK


def cmd_bench(args) -> int:
    data = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        data["rng_seed"] = args.seed
    config = BenchmarkConfig.from_dict(data)
    report = run_benchmark(config, args.out)
    sys.stdout.write(report.summary())
    print(f"wall time           {report.wall_time:.2f} s")
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks(args.seed)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wswag", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def weight_args(p):
        p.add_argument("--weights", help="weight matrix file (dense CSV, Toeplitz column or block groups)")
        p.add_argument("--weights-kind", choices=["dense", "toeplitz", "block"], help="override format detection")

    p = sub.add_parser("prox", help="approximate threshold of a signal")
    p.add_argument("--z", required=True, help="input signal CSV (re,im)")
    weight_args(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eta", type=float, default=None, help="step size (default 1.9 / (1 + beta * max row sum))")
    p.add_argument("--iters", type=int, default=10, help="projected gradient steps K")
    p.add_argument("--start", help="start point CSV; its magnitudes are used (default |z|)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prox)

    p = sub.add_parser("solve", help="minimize 0.5||y - Hx||^2 + lam P_W(x)")
    p.add_argument("--y", required=True, help="observation CSV (re,im)")
    p.add_argument("--taps", help="per-band filter taps CSV; H is the identity when omitted")
    p.add_argument("--bands", type=int, help="number of bands of the band-major grid (with --taps)")
    weight_args(p)
    p.add_argument("--lam", type=float)
    p.add_argument("--config", help="JSON solver configuration")
    p.add_argument("--x0", help="initial point CSV (default zeros)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="synthetic dereverberation benchmark")
    p.add_argument("--config", help="JSON benchmark configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory for report and grids")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="run the randomized invariant battery")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
