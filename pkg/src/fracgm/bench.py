"""Benchmark harness: Monte-Carlo scenario runners with CSV output.

Scenarios mirror the synthetic experiments this library is built to
reproduce: rotation and registration error sweeps over outlier rates, a
per-iteration convergence comparison, a noise-bound sensitivity sweep, and a
timing sweep over problem sizes.  Every per-run row carries the scene seed so
any row can be regenerated in isolation; runs may execute on a thread pool
and are merged in deterministic order.
"""

from __future__ import annotations

import csv
import json
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .baselines import GncConfig, gnc_solve
from .core import SolverConfig, SolverResult, fracgm_solve, gm_cost
from .exceptions import FracgmError
from .geometry import (
    REGISTRATION_DIM,
    ROTATION_DIM,
    RigidTransform,
    build_registration_terms,
    build_rotation_terms,
    closed_form_alignment,
    devectorize,
    project_to_so3,
    rotation_error_deg,
    solve_registration,
    solve_rotation,
    translation_error,
    vectorize,
)
from .synthetic import BunnyFile, RandomCube, SceneConfig, SyntheticScene, generate_scene

__all__ = [
    "SOLVERS",
    "BenchRun",
    "BenchOutput",
    "run_rotation_bench",
    "run_registration_bench",
    "run_convergence",
    "run_noise_sweep",
    "run_timing",
]

SOLVERS = ("fracgm", "gnc-gm", "gnc-tls", "ls")

ERROR_THRESHOLDS_DEG = (0.1, 0.5, 1.0, 5.0, 10.0)


@dataclass(frozen=True)
class BenchRun:
    """One benchmark invocation: scenario, solver set, scene grid, output."""

    scenario: str
    solvers: tuple[str, ...] = SOLVERS
    runs: int = 40
    seed: int = 0
    n_points: int = 50
    outlier_rates: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    noise_sigma: float = 0.01
    noise_bound: float = 0.1
    noise_bounds: tuple[float, ...] = (0.01, 0.1, 1.0)
    n_grid: tuple[int, ...] = (100, 500, 1000, 2000, 5000)
    c: float = 1.0
    max_iterations: int = 100
    tolerance: float = 1e-7
    source: RandomCube | BunnyFile = RandomCube()
    out: Path | None = None
    workers: int = 1
    plot: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)} (choose from {SOLVERS})")


@dataclass
class BenchOutput:
    rows: list[dict]
    summary: list[dict]
    profile: list[dict]
    files: list[Path] = field(default_factory=list)


def scene_seed(base_seed: int, scenario: str, grid_index: int, run_index: int) -> int:
    """Stable per-run seed; hierarchical so parallel scheduling cannot matter."""
    entropy = [base_seed, zlib.crc32(scenario.encode()), grid_index, run_index]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _solve_named(
    name: str,
    scene: SyntheticScene,
    run: BenchRun,
    mode: str,
    record_trace: bool = False,
) -> tuple[RigidTransform, SolverResult]:
    """Dispatch one solver by bench name on one scene."""
    corr = scene.correspondences
    config = SolverConfig(
        c=run.c,
        max_iterations=run.max_iterations,
        tolerance=run.tolerance,
        record_trace=record_trace,
    )
    if name == "fracgm":
        if mode == "rotation":
            return solve_rotation(corr, config)
        return solve_registration(corr, config)

    with_translation = mode == "registration"
    d = REGISTRATION_DIM if with_translation else ROTATION_DIM
    if name == "ls":
        transform = closed_form_alignment(corr, with_translation)
        build = build_registration_terms if with_translation else build_rotation_terms
        problem = build(corr, c=run.c)
        x = vectorize(transform, d)
        result = SolverResult(
            x=x,
            iterations=1,
            converged=True,
            final_psi_norm=float("nan"),
            final_cost=gm_cost(problem, x),
        )
        return transform, result

    surrogate = name.removeprefix("gnc-")
    build = build_registration_terms if with_translation else build_rotation_terms
    problem = build(corr, c=run.c)
    initial = closed_form_alignment(corr, with_translation)
    gnc_config = GncConfig(
        c=run.c,
        surrogate=surrogate,
        max_iterations=run.max_iterations,
        record_trace=record_trace,
    )
    result = gnc_solve(problem, vectorize(initial, d), gnc_config)
    raw, translation = devectorize(result.x, d)
    rotation = project_to_so3(raw)
    if not with_translation:
        translation = np.zeros(3)
    return RigidTransform(rotation, translation), result


def _error_row(
    run: BenchRun,
    mode: str,
    solver: str,
    scene_config: SceneConfig,
    run_index: int,
) -> dict:
    scene = generate_scene(scene_config)
    row = {
        "scenario": run.scenario,
        "solver": solver,
        "n_points": scene_config.n_points,
        "outlier_rate": scene_config.outlier_rate,
        "noise_sigma": scene_config.noise_sigma,
        "noise_bound": scene_config.noise_bound,
        "c": run.c,
        "run": run_index,
        "seed": scene_config.seed,
        "rotation_error_deg": "",
        "translation_error_m": "",
        "iterations": "",
        "wall_time_s": "",
        "converged": "",
        "status": "ok",
        "message": "",
    }
    try:
        start = time.perf_counter()
        transform, result = _solve_named(solver, scene, run, mode)
        elapsed = time.perf_counter() - start
    except FracgmError as exc:  # recorded per-row, never fatal
        row["status"] = "error"
        row["message"] = f"{type(exc).__name__}: {exc}"
        return row
    gt = scene.ground_truth
    row["rotation_error_deg"] = rotation_error_deg(transform.rotation, gt.rotation)
    row["translation_error_m"] = translation_error(transform.translation, gt.translation)
    row["iterations"] = result.iterations
    row["wall_time_s"] = elapsed
    row["converged"] = result.converged
    return row


def _run_grid(
    run: BenchRun,
    jobs: Sequence[tuple[tuple, Callable[[], dict]]],
) -> list[dict]:
    """Execute jobs (key, thunk) on a pool; return rows sorted by key."""
    if run.workers == 1:
        keyed = [(key, thunk()) for key, thunk in jobs]
    else:
        with ThreadPoolExecutor(max_workers=run.workers) as pool:
            futures = [(key, pool.submit(thunk)) for key, thunk in jobs]
            keyed = [(key, future.result()) for key, future in futures]
    keyed.sort(key=lambda item: item[0])
    return [row for _, row in keyed]


def _quantile_summary(rows: list[dict], mode: str) -> tuple[list[dict], list[dict]]:
    summary: list[dict] = []
    profile: list[dict] = []
    solvers = sorted({row["solver"] for row in rows})
    rates = sorted({row["outlier_rate"] for row in rows})
    bounds = sorted({row["noise_bound"] for row in rows})
    for solver in solvers:
        for rate in rates:
            for bound in bounds:
                group = [
                    r
                    for r in rows
                    if r["solver"] == solver
                    and r["outlier_rate"] == rate
                    and r["noise_bound"] == bound
                    and r["status"] == "ok"
                ]
                if not group:
                    continue
                errors = np.array([r["rotation_error_deg"] for r in group])
                entry = {
                    "solver": solver,
                    "outlier_rate": rate,
                    "noise_bound": bound,
                    "n_runs": len(group),
                    "rotation_mean_deg": errors.mean(),
                    "rotation_median_deg": np.median(errors),
                    "rotation_p25_deg": np.percentile(errors, 25),
                    "rotation_p75_deg": np.percentile(errors, 75),
                    "rotation_p95_deg": np.percentile(errors, 95),
                    "mean_iterations": np.mean([r["iterations"] for r in group]),
                    "mean_wall_time_s": np.mean([r["wall_time_s"] for r in group]),
                }
                if mode == "registration":
                    terr = np.array([r["translation_error_m"] for r in group])
                    entry["translation_mean_m"] = terr.mean()
                    entry["translation_median_m"] = np.median(terr)
                    entry["translation_p95_m"] = np.percentile(terr, 95)
                summary.append(entry)
                for threshold in ERROR_THRESHOLDS_DEG:
                    profile.append(
                        {
                            "solver": solver,
                            "outlier_rate": rate,
                            "noise_bound": bound,
                            "threshold_deg": threshold,
                            "fraction_within": float(np.mean(errors <= threshold)),
                        }
                    )
    return summary, profile


def _write_csv(path: Path, rows: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return path


def _write_outputs(run: BenchRun, output: BenchOutput, meta: dict) -> None:
    if run.out is None:
        return
    out = Path(run.out)
    stem = out.with_suffix("")
    output.files.append(_write_csv(out, output.rows))
    if output.summary:
        output.files.append(_write_csv(Path(f"{stem}_summary.csv"), output.summary))
    if output.profile:
        output.files.append(_write_csv(Path(f"{stem}_profile.csv"), output.profile))
    meta_path = Path(f"{stem}_meta.json")
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    meta_path.write_text(json.dumps(meta, indent=2, default=str) + "\n")
    output.files.append(meta_path)


def _meta(run: BenchRun, mode: str) -> dict:
    return {
        "scenario": run.scenario,
        "mode": mode,
        "solvers": list(run.solvers),
        "runs": run.runs,
        "seed": run.seed,
        "n_points": run.n_points,
        "noise_sigma": run.noise_sigma,
        "c": run.c,
        "note": (
            "Only solvers implemented in this package are compared; "
            "external systems (TEASER/RANSAC/FGR) are not reproduced."
        ),
    }


def _scene_config(run: BenchRun, *, rate: float, bound: float, n: int, seed: int, with_translation: bool) -> SceneConfig:
    return SceneConfig(
        n_points=n,
        outlier_rate=rate,
        noise_sigma=run.noise_sigma,
        with_translation=with_translation,
        seed=seed,
        source=run.source,
        noise_bound=bound,
    )


def _error_bench(run: BenchRun, mode: str) -> BenchOutput:
    with_translation = mode == "registration"
    jobs = []
    for g, rate in enumerate(run.outlier_rates):
        for r in range(run.runs):
            seed = scene_seed(run.seed, run.scenario, g, r)
            config = _scene_config(
                run,
                rate=rate,
                bound=run.noise_bound,
                n=run.n_points,
                seed=seed,
                with_translation=with_translation,
            )
            for s, solver in enumerate(run.solvers):
                key = (g, r, s)
                jobs.append(
                    (key, lambda cfg=config, solver=solver, r=r: _error_row(run, mode, solver, cfg, r))
                )
    rows = _run_grid(run, jobs)
    summary, profile = _quantile_summary(rows, mode)
    output = BenchOutput(rows=rows, summary=summary, profile=profile)
    _write_outputs(run, output, _meta(run, mode))
    if run.plot and run.out is not None:
        from .plots import plot_error_bench

        output.files.extend(plot_error_bench(run, output))
    return output


def run_rotation_bench(run: BenchRun) -> BenchOutput:
    """Rotation error sweep over outlier rates; one row per (solver, rate, run)."""
    return _error_bench(run, "rotation")


def run_registration_bench(run: BenchRun) -> BenchOutput:
    """Registration sweep; rows carry both rotation and translation errors."""
    return _error_bench(run, "registration")


def run_noise_sweep(run: BenchRun) -> BenchOutput:
    """Registration accuracy as the assumed noise bound varies around the truth."""
    rate = run.outlier_rates[0] if len(run.outlier_rates) == 1 else 0.5
    jobs = []
    for g, bound in enumerate(run.noise_bounds):
        for r in range(run.runs):
            seed = scene_seed(run.seed, run.scenario, g, r)
            config = _scene_config(
                run, rate=rate, bound=bound, n=run.n_points, seed=seed, with_translation=True
            )
            for s, solver in enumerate(run.solvers):
                key = (g, r, s)
                jobs.append(
                    (key, lambda cfg=config, solver=solver, r=r: _error_row(run, "registration", solver, cfg, r))
                )
    rows = _run_grid(run, jobs)
    summary, profile = _quantile_summary(rows, "registration")
    output = BenchOutput(rows=rows, summary=summary, profile=profile)
    _write_outputs(run, output, _meta(run, "registration") | {"noise_bounds": list(run.noise_bounds)})
    if run.plot and run.out is not None:
        from .plots import plot_noise_sweep

        output.files.extend(plot_noise_sweep(run, output))
    return output


def run_convergence(run: BenchRun) -> BenchOutput:
    """Per-iteration Geman-McClure cost traces for the iterative solvers."""
    rate = run.outlier_rates[0] if len(run.outlier_rates) == 1 else 0.5
    solvers = [s for s in run.solvers if s != "ls"]
    jobs = []
    for r in range(run.runs):
        seed = scene_seed(run.seed, run.scenario, 0, r)
        config = _scene_config(
            run, rate=rate, bound=run.noise_bound, n=run.n_points, seed=seed, with_translation=False
        )

        def trace_rows(cfg=config, run_index=r) -> list[dict]:
            scene = generate_scene(cfg)
            problem = build_rotation_terms(scene.correspondences, c=run.c)
            out: list[dict] = []
            for solver in solvers:
                _, result = _solve_named(solver, scene, run, "rotation", record_trace=True)
                final_check = gm_cost(problem, result.x)
                for k, record in enumerate(result.aux_trace or [], start=1):
                    out.append(
                        {
                            "scenario": run.scenario,
                            "solver": solver,
                            "outlier_rate": cfg.outlier_rate,
                            "n_points": cfg.n_points,
                            "run": run_index,
                            "seed": cfg.seed,
                            "iteration": k,
                            "gm_cost": record.cost,
                            "final_cost_check": final_check,
                        }
                    )
            return out

        jobs.append(((0, r, 0), trace_rows))
    nested = _run_grid(run, jobs)
    rows = [row for chunk in nested for row in chunk]
    output = BenchOutput(rows=rows, summary=[], profile=[])
    _write_outputs(run, output, _meta(run, "rotation") | {"outlier_rate": rate})
    if run.plot and run.out is not None:
        from .plots import plot_convergence

        output.files.extend(plot_convergence(run, output))
    return output


def run_timing(run: BenchRun) -> BenchOutput:
    """Mean wall time of the coupled registration solve per problem size.

    Timing is measured around the solve call only (scene generation and
    problem building by other solvers excluded); always single-threaded.
    """
    rows: list[dict] = []
    for g, n in enumerate(run.n_grid):
        for r in range(run.runs):
            seed = scene_seed(run.seed, run.scenario, g, r)
            config = _scene_config(
                run,
                rate=run.outlier_rates[0] if len(run.outlier_rates) == 1 else 0.5,
                bound=run.noise_bound,
                n=n,
                seed=seed,
                with_translation=True,
            )
            scene = generate_scene(config)
            solver_config = SolverConfig(
                c=run.c, max_iterations=run.max_iterations, tolerance=run.tolerance
            )
            start = time.perf_counter()
            _, result = solve_registration(scene.correspondences, solver_config)
            elapsed = time.perf_counter() - start
            rows.append(
                {
                    "scenario": run.scenario,
                    "solver": "fracgm",
                    "n_points": n,
                    "outlier_rate": config.outlier_rate,
                    "run": r,
                    "seed": seed,
                    "wall_time_s": elapsed,
                    "iterations": result.iterations,
                    "converged": result.converged,
                }
            )
    summary = []
    sizes = np.array(run.n_grid, dtype=float)
    means = np.array(
        [np.mean([r["wall_time_s"] for r in rows if r["n_points"] == n]) for n in run.n_grid]
    )
    exponent = float(np.polyfit(np.log(sizes), np.log(means), 1)[0])
    for n, mean in zip(run.n_grid, means):
        summary.append(
            {
                "solver": "fracgm",
                "n_points": n,
                "mean_wall_time_s": mean,
                "scaling_exponent": exponent,
            }
        )
    output = BenchOutput(rows=rows, summary=summary, profile=[])
    _write_outputs(run, output, _meta(run, "registration") | {"n_grid": list(run.n_grid)})
    if run.plot and run.out is not None:
        from .plots import plot_timing

        output.files.extend(plot_timing(run, output))
    return output
