"""Baseline solvers for head-to-head comparison: weighted least squares and
graduated non-convexity with Geman-McClure or truncated-least-squares
surrogates.

Both baselines reuse the homogenized quadratic machinery of :mod:`.core`:
each outer iteration computes per-term weights in closed form and solves the
induced weighted least-squares problem on the homogenization hyperplane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GemanMcClureProblem,
    IterationRecord,
    SolverResult,
    _assemble_normal_matrix,
    _gm_cost_from,
    _solve_homogenized,
)
from .exceptions import DimensionMismatchError

__all__ = ["GncConfig", "weighted_ls_solve", "gnc_solve"]

# Control-parameter cap beyond which TLS weights are effectively binary.
_TLS_SCHEDULE_CAP = 1e6


@dataclass(frozen=True)
class GncConfig:
    """Graduated non-convexity knobs; ``surrogate`` is "gm" or "tls"."""

    c: float = 1.0
    surrogate: str = "gm"
    schedule_factor: float = 1.4
    max_iterations: int = 100
    weight_tolerance: float = 1e-6
    record_trace: bool = False

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.surrogate not in ("gm", "tls"):
            raise ValueError(f"surrogate must be 'gm' or 'tls', got {self.surrogate!r}")
        if not self.schedule_factor > 1:
            raise ValueError(f"schedule_factor must exceed 1, got {self.schedule_factor}")
        if not self.max_iterations > 0:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.weight_tolerance > 0:
            raise ValueError(
                f"weight_tolerance must be positive, got {self.weight_tolerance}"
            )


def weighted_ls_solve(problem: GemanMcClureProblem, weights: np.ndarray) -> np.ndarray:
    """Minimize sum_i w_i x^T M_i x on the homogenization hyperplane."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (problem.n,):
        raise DimensionMismatchError(
            f"weights must have length {problem.n}, got {weights.shape}"
        )
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(weights > 0):
        raise ValueError("weights must not all be zero")
    a = _assemble_normal_matrix(problem, weights)
    return _solve_homogenized(a, problem.homog_index)


def _gm_weights(s: np.ndarray, control: float, c2: float) -> np.ndarray:
    return (control * c2 / (s + control * c2)) ** 2


def _tls_weights(s: np.ndarray, control: float, c2: float) -> np.ndarray:
    lower = control / (control + 1.0) * c2
    upper = (control + 1.0) / control * c2
    w = np.ones_like(s)
    w[s >= upper] = 0.0
    mid = (s > lower) & (s < upper)
    w[mid] = np.sqrt(c2 * control * (control + 1.0) / s[mid]) - control
    return np.clip(w, 0.0, 1.0)


def gnc_solve(
    problem: GemanMcClureProblem,
    x0: np.ndarray,
    config: GncConfig | None = None,
) -> SolverResult:
    """Graduated non-convexity on the given problem's residuals.

    The surrogate starts near-convex (GM: large control parameter, TLS: small)
    and is annealed by ``schedule_factor`` every iteration; weights are
    recomputed in closed form and a weighted least-squares step follows.  The
    loop ends when the schedule has terminated and the weights change by less
    than ``weight_tolerance``.  ``final_cost`` is always the Geman-McClure
    objective of the last iterate so runs are comparable across solvers;
    ``final_psi_norm`` is NaN because the alternation residual does not apply.
    """
    if config is None:
        config = GncConfig(c=problem.c)
    x = problem.check_vector(x0).copy()
    if x[problem.homog_index] != 1.0:
        raise ValueError("initial guess must be homogenized (last coordinate 1)")

    c2 = config.c * config.c
    s = problem.squared_residuals(x)
    s_max = float(s.max())
    if config.surrogate == "gm":
        control = max(1.0, 2.0 * s_max / c2)
    else:
        control = c2 / (2.0 * s_max - c2) if 2.0 * s_max > c2 else _TLS_SCHEDULE_CAP

    trace: list[IterationRecord] | None = [] if config.record_trace else None
    weights_prev: np.ndarray | None = None
    converged = False
    iterations = 0

    for k in range(1, config.max_iterations + 1):
        if config.surrogate == "gm":
            weights = _gm_weights(s, control, c2)
        else:
            weights = _tls_weights(s, control, c2)
        x = weighted_ls_solve(problem, weights)
        s = problem.squared_residuals(x)
        iterations = k
        if trace is not None:
            trace.append(IterationRecord(cost=_gm_cost_from(s, config.c), psi_norm=np.nan))

        schedule_done = (
            control <= 1.0 if config.surrogate == "gm" else control >= _TLS_SCHEDULE_CAP
        )
        if weights_prev is not None and schedule_done:
            if float(np.abs(weights - weights_prev).max()) < config.weight_tolerance:
                converged = True
                break
        weights_prev = weights

        if config.surrogate == "gm":
            control = max(1.0, control / config.schedule_factor)
        else:
            control = min(_TLS_SCHEDULE_CAP, control * config.schedule_factor)

    return SolverResult(
        x=x,
        iterations=iterations,
        converged=converged,
        final_psi_norm=float("nan"),
        final_cost=_gm_cost_from(s, config.c),
        aux_trace=trace,
    )
