"""Benchmark command line: rotation, registration, convergence, noise-sweep, timing.

Exit status is 0 on completion and 2 on configuration errors.  Per-run solver
failures are recorded in the output CSV, not raised.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    SOLVERS,
    BenchRun,
    run_convergence,
    run_noise_sweep,
    run_registration_bench,
    run_rotation_bench,
    run_timing,
)
from .synthetic import BunnyFile, RandomCube


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _solver_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _add_common(parser: argparse.ArgumentParser, *, n_points: int, noise_bound: float) -> None:
    parser.add_argument("--n-points", type=int, default=n_points, help="points per scene")
    parser.add_argument("--runs", type=int, default=40, help="Monte-Carlo runs per grid point")
    parser.add_argument("--seed", type=int, default=0, help="base seed for the run grid")
    parser.add_argument("--noise-sigma", type=float, default=0.01, help="true noise std")
    parser.add_argument(
        "--noise-bound", type=float, default=noise_bound, help="assumed noise bound"
    )
    parser.add_argument("--c", type=float, default=1.0, help="robust threshold")
    parser.add_argument(
        "--solvers",
        type=_solver_list,
        default=SOLVERS,
        help=f"comma-separated subset of {','.join(SOLVERS)}",
    )
    parser.add_argument("--out", type=Path, default=None, help="output CSV path")
    parser.add_argument("--bunny", type=Path, default=None, help="ASCII PLY source cloud")
    parser.add_argument("--workers", type=int, default=1, help="thread pool size")
    parser.add_argument("--plot", action="store_true", help="emit PNG plots next to the CSV")
    parser.add_argument(
        "--max-iterations", type=int, default=100, help="solver iteration cap"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgm-bench",
        description="Synthetic robustness and timing benchmarks for the solvers in this package.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)

    rotation = sub.add_parser("rotation", help="rotation error vs outlier rate")
    _add_common(rotation, n_points=50, noise_bound=0.1)
    rotation.add_argument(
        "--outlier-rates", type=_floats, default=(0.2, 0.4, 0.6, 0.8)
    )

    registration = sub.add_parser("registration", help="registration error vs outlier rate")
    _add_common(registration, n_points=500, noise_bound=0.1)
    registration.add_argument(
        "--outlier-rates", type=_floats, default=(0.2, 0.5, 0.8)
    )

    convergence = sub.add_parser("convergence", help="per-iteration cost traces")
    _add_common(convergence, n_points=50, noise_bound=0.1)
    convergence.add_argument("--outlier-rate", type=float, default=0.5)

    sweep = sub.add_parser("noise-sweep", help="accuracy vs assumed noise bound")
    _add_common(sweep, n_points=500, noise_bound=0.1)
    sweep.add_argument("--outlier-rate", type=float, default=0.5)
    sweep.add_argument("--noise-bounds", type=_floats, default=(0.01, 0.1, 1.0))

    timing = sub.add_parser("timing", help="solve time vs problem size")
    _add_common(timing, n_points=500, noise_bound=0.1)
    timing.add_argument("--outlier-rate", type=float, default=0.5)
    timing.add_argument("--n-grid", type=_ints, default=(100, 500, 1000, 2000, 5000))

    return parser


def _bench_run(args: argparse.Namespace) -> BenchRun:
    source = BunnyFile(args.bunny) if args.bunny else RandomCube()
    rates = getattr(args, "outlier_rates", None)
    if rates is None:
        rates = (args.outlier_rate,)
    return BenchRun(
        scenario=args.scenario,
        solvers=tuple(args.solvers),
        runs=args.runs,
        seed=args.seed,
        n_points=args.n_points,
        outlier_rates=tuple(rates),
        noise_sigma=args.noise_sigma,
        noise_bound=args.noise_bound,
        noise_bounds=tuple(getattr(args, "noise_bounds", (0.01, 0.1, 1.0))),
        n_grid=tuple(getattr(args, "n_grid", (100, 500, 1000, 2000, 5000))),
        c=args.c,
        max_iterations=args.max_iterations,
        source=source,
        out=args.out,
        workers=args.workers,
        plot=args.plot,
    )


_RUNNERS = {
    "rotation": run_rotation_bench,
    "registration": run_registration_bench,
    "convergence": run_convergence,
    "noise-sweep": run_noise_sweep,
    "timing": run_timing,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = _bench_run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        output = _RUNNERS[args.scenario](run)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = sum(1 for row in output.rows if row.get("status", "ok") == "ok")
    print(f"{args.scenario}: {len(output.rows)} rows ({ok} ok)")
    for path in output.files:
        print(f"  wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
