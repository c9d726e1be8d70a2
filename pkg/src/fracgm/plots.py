"""Optional matplotlib post-processing for benchmark outputs.

CSV files are the source of truth; these figures are a convenience for
eyeballing results.  matplotlib is imported lazily so the rest of the package
has no hard dependency on it.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .bench import BenchOutput, BenchRun


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _stem(run: "BenchRun") -> Path:
    return Path(run.out).with_suffix("")


def plot_error_bench(run: "BenchRun", output: "BenchOutput") -> list[Path]:
    plt = _pyplot()
    solvers = sorted({r["solver"] for r in output.rows})
    rates = sorted({r["outlier_rate"] for r in output.rows})
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))

    width = 0.8 / max(len(solvers), 1)
    for i, solver in enumerate(solvers):
        data = [
            [
                r["rotation_error_deg"]
                for r in output.rows
                if r["solver"] == solver and r["outlier_rate"] == rate and r["status"] == "ok"
            ]
            for rate in rates
        ]
        positions = [j + i * width for j in range(len(rates))]
        axes[0].boxplot(data, positions=positions, widths=width * 0.9, showfliers=False)
    axes[0].set_xticks([j + 0.4 for j in range(len(rates))])
    axes[0].set_xticklabels([f"{int(rate * 100)}%" for rate in rates])
    axes[0].set_xlabel("outlier rate")
    axes[0].set_ylabel("rotation error (deg)")
    axes[0].set_yscale("log")
    axes[0].set_title("error by outlier rate (solver order: " + ", ".join(solvers) + ")")

    for solver in solvers:
        entries = sorted(
            (p for p in output.profile if p["solver"] == solver),
            key=lambda p: p["threshold_deg"],
        )
        thresholds = sorted({p["threshold_deg"] for p in entries})
        fractions = [
            np.mean([p["fraction_within"] for p in entries if p["threshold_deg"] == t])
            for t in thresholds
        ]
        axes[1].plot(thresholds, fractions, marker="o", label=solver)
    axes[1].set_xscale("log")
    axes[1].set_xlabel("error threshold (deg)")
    axes[1].set_ylabel("fraction of runs within")
    axes[1].legend()
    axes[1].set_title("performance profile")

    fig.tight_layout()
    path = Path(f"{_stem(run)}_plot.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def plot_convergence(run: "BenchRun", output: "BenchOutput") -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    solvers = sorted({r["solver"] for r in output.rows})
    first_run = min(r["run"] for r in output.rows)
    for solver in solvers:
        rows = [r for r in output.rows if r["solver"] == solver and r["run"] == first_run]
        rows.sort(key=lambda r: r["iteration"])
        ax.plot([r["iteration"] for r in rows], [r["gm_cost"] for r in rows], label=solver)
    ax.set_xlabel("iteration")
    ax.set_ylabel("robust cost")
    ax.legend()
    ax.set_title(f"convergence (run {first_run})")
    fig.tight_layout()
    path = Path(f"{_stem(run)}_plot.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def plot_noise_sweep(run: "BenchRun", output: "BenchOutput") -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    solvers = sorted({s["solver"] for s in output.summary})
    for solver in solvers:
        entries = sorted(
            (s for s in output.summary if s["solver"] == solver),
            key=lambda s: s["noise_bound"],
        )
        ax.plot(
            [s["noise_bound"] for s in entries],
            [s["rotation_mean_deg"] for s in entries],
            marker="o",
            label=solver,
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("assumed noise bound")
    ax.set_ylabel("mean rotation error (deg)")
    ax.legend()
    fig.tight_layout()
    path = Path(f"{_stem(run)}_plot.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def plot_timing(run: "BenchRun", output: "BenchOutput") -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = [s["n_points"] for s in output.summary]
    means = [s["mean_wall_time_s"] for s in output.summary]
    ax.loglog(sizes, means, marker="o")
    ax.set_xlabel("correspondences")
    ax.set_ylabel("mean solve time (s)")
    exponent = output.summary[0]["scaling_exponent"] if output.summary else float("nan")
    ax.set_title(f"timing (fitted exponent {exponent:.2f})")
    fig.tight_layout()
    path = Path(f"{_stem(run)}_plot.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
