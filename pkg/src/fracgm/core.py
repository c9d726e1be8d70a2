"""Alternating solver for sums of Geman-McClure ratios with quadratic residuals.

The problem minimized here is

    sum_i  c^2 * s_i(x) / (s_i(x) + c^2),      s_i(x) = x^T M_i x,

over homogenized vectors x (last coordinate pinned to 1), where each M_i is a
positive-semidefinite matrix with any per-measurement weight already folded in.
Writing f_i = c^2 * s_i and h_i = s_i + c^2, each summand is the ratio f_i/h_i,
and the sum is bounded above by N*c^2.

The solver alternates two closed-form steps: auxiliary variables (beta, mu)
are refreshed from the current iterate, then the iterate is replaced by the
minimizer of the weighted quadratic sum_i mu_i*(f_i - beta_i*h_i) on the
homogenization hyperplane.  Both steps keep mu_i > 0 and beta_i < c^2, which
makes every weighted quadratic convex.  Iteration stops once the stacked
optimality residual (see :func:`psi_norm`) drops below the configured
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .exceptions import (
    DegenerateProblemError,
    DimensionMismatchError,
    InvariantViolationError,
)

__all__ = [
    "QuadraticTerm",
    "GemanMcClureProblem",
    "AuxiliaryVariables",
    "SolverConfig",
    "SolverResult",
    "IterationRecord",
    "gm_cost",
    "update_auxiliary",
    "solve_weighted_quadratic",
    "psi_norm",
    "fracgm_solve",
]

# Relative tolerances for the structural checks on quadratic terms and on the
# assembled normal matrix.
_SYMMETRY_RTOL = 1e-9
_PSD_RTOL = 1e-9
_RIDGE_RTOL = 1e-12
_DENOM_RTOL = 1e-12


@dataclass(frozen=True)
class QuadraticTerm:
    """One weighted squared residual, s(x) = x^T matrix x.

    The matrix is expected to be symmetric positive semidefinite; call
    :meth:`validate` to check both properties numerically.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"term matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def validate(self) -> None:
        """Raise if the matrix is not symmetric PSD within tolerance."""
        m = self.matrix
        scale = max(1.0, float(np.abs(m).max()))
        if float(np.abs(m - m.T).max()) > _SYMMETRY_RTOL * scale:
            raise InvariantViolationError("term matrix is not symmetric")
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -_PSD_RTOL * max(float(np.trace(m)), 0.0):
            raise InvariantViolationError(
                f"term matrix is not PSD (min eigenvalue {min_eig:g})"
            )


class GemanMcClureProblem:
    """A sum-of-ratio instance: N quadratic terms, threshold c, dimension d.

    The last coordinate of the variable is the homogenization coordinate and
    is pinned to 1 by the solver.  Terms may be passed as a sequence of
    :class:`QuadraticTerm` or as an ``(N, d, d)`` array; the stacked array is
    the internal representation.  Instances are immutable after construction
    and safe to share across threads.
    """

    def __init__(
        self,
        terms: Sequence[QuadraticTerm] | np.ndarray,
        c: float,
        *,
        validate: bool = True,
    ) -> None:
        if isinstance(terms, np.ndarray):
            # Copy so freezing the stack never touches caller-owned memory.
            stack = np.array(terms, dtype=np.float64)
        else:
            stack = np.stack([QuadraticTerm(t.matrix).matrix for t in terms])
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise DimensionMismatchError(
                f"terms must stack to (N, d, d), got {stack.shape}"
            )
        if stack.shape[0] < 1:
            raise DimensionMismatchError("need at least one term")
        if not c > 0:
            raise ValueError(f"threshold c must be positive, got {c}")
        stack.setflags(write=False)
        self.term_stack = stack
        self.c = float(c)
        self.n = int(stack.shape[0])
        self.d = int(stack.shape[1])
        self.homog_index = self.d - 1
        if validate:
            self.validate()

    @property
    def terms(self) -> list[QuadraticTerm]:
        return [QuadraticTerm(m) for m in self.term_stack]

    def validate(self) -> None:
        """Check symmetry and positive semidefiniteness of every term."""
        stack = self.term_stack
        scale = max(1.0, float(np.abs(stack).max()))
        sym_err = float(np.abs(stack - stack.transpose(0, 2, 1)).max())
        if sym_err > _SYMMETRY_RTOL * scale:
            raise InvariantViolationError("term matrices are not symmetric")
        min_eigs = np.linalg.eigvalsh(stack)[:, 0]
        traces = np.trace(stack, axis1=1, axis2=2)
        if np.any(min_eigs < -_PSD_RTOL * np.maximum(traces, 0.0)):
            raise InvariantViolationError("term matrices are not all PSD")

    def check_vector(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise DimensionMismatchError(
                f"expected vector of length {self.d}, got shape {x.shape}"
            )
        return x

    def squared_residuals(self, x: np.ndarray) -> np.ndarray:
        """All s_i(x) = x^T M_i x, clamped at zero (terms are PSD)."""
        x = self.check_vector(x)
        s = (self.term_stack @ x) @ x
        return np.maximum(s, 0.0)


@dataclass(frozen=True)
class AuxiliaryVariables:
    """Per-term ratio values beta_i and inverse denominators mu_i."""

    beta: np.ndarray
    mu: np.ndarray

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=np.float64)
        mu = np.asarray(self.mu, dtype=np.float64)
        if beta.shape != mu.shape or beta.ndim != 1:
            raise DimensionMismatchError("beta and mu must be 1-D of equal length")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs.

    ``c`` is consumed when building problems from point data; a problem that
    already exists carries its own threshold.  ``tolerance`` applies to the
    normalized optimality residual of :func:`psi_norm`.
    """

    c: float = 1.0
    max_iterations: int = 100
    tolerance: float = 1e-7
    record_trace: bool = False

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.max_iterations > 0:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class IterationRecord:
    """Convergence bookkeeping for one iteration (kept only when tracing)."""

    cost: float
    psi_norm: float


@dataclass
class SolverResult:
    """Outcome of a solve: homogenized iterate plus convergence metadata."""

    x: np.ndarray
    iterations: int
    converged: bool
    final_psi_norm: float
    final_cost: float
    aux_trace: list[IterationRecord] | None = None


def gm_cost(problem: GemanMcClureProblem, x: np.ndarray) -> float:
    """Robust objective sum_i c^2 s_i / (s_i + c^2); lies in [0, N*c^2)."""
    s = problem.squared_residuals(x)
    return _gm_cost_from(s, problem.c)


def _gm_cost_from(s: np.ndarray, c: float) -> float:
    c2 = c * c
    return float(np.sum(c2 * s / (s + c2)))


def update_auxiliary(problem: GemanMcClureProblem, x: np.ndarray) -> AuxiliaryVariables:
    """Closed-form refresh: beta_i = c^2 s_i/(s_i+c^2), mu_i = 1/(s_i+c^2).

    With PSD terms the output satisfies 0 <= beta_i < c^2 and mu_i > 0
    unconditionally.
    """
    s = problem.squared_residuals(x)
    return _aux_from(s, problem.c)


def _aux_from(s: np.ndarray, c: float) -> AuxiliaryVariables:
    c2 = c * c
    h = s + c2
    # For s/c^2 beyond 1/eps the ratio rounds to exactly c^2; keep beta
    # strictly below c^2 (one ulp) so the weighted quadratic stays convex.
    beta = np.minimum(c2 * s / h, np.nextafter(c2, 0.0))
    return AuxiliaryVariables(beta=beta, mu=1.0 / h)


def psi_norm(
    problem: GemanMcClureProblem, aux: AuxiliaryVariables, x: np.ndarray
) -> float:
    """Max-norm of the normalized optimality residual.

    The raw residual stacks ``-f_i(x) + beta_i h_i(x)`` (units of cost) over
    ``-1 + mu_i h_i(x)`` (dimensionless); the first block is divided by
    h_i(x) > c^2 so both blocks are O(1) and a single tolerance applies.
    """
    s = problem.squared_residuals(x)
    _check_aux_shape(problem, aux)
    return _psi_norm_from(s, aux, problem.c)


def _psi_norm_from(s: np.ndarray, aux: AuxiliaryVariables, c: float) -> float:
    c2 = c * c
    h = s + c2
    beta_rows = np.abs(-c2 * s + aux.beta * h) / h
    mu_rows = np.abs(-1.0 + aux.mu * h)
    return float(max(beta_rows.max(), mu_rows.max()))


def _check_aux_shape(problem: GemanMcClureProblem, aux: AuxiliaryVariables) -> None:
    if aux.beta.shape != (problem.n,):
        raise DimensionMismatchError(
            f"auxiliary vectors must have length {problem.n}, got {aux.beta.shape}"
        )


def _check_aux_constraints(aux: AuxiliaryVariables, c: float) -> None:
    # Every iteration must keep the weighted quadratic convex; a violation
    # indicates non-PSD terms or a bug.
    if not np.all(aux.mu > 0.0):
        raise InvariantViolationError("auxiliary mu must stay strictly positive")
    if not np.all(aux.beta < c * c):
        raise InvariantViolationError("auxiliary beta must stay below c^2")
    if not np.all(aux.beta >= 0.0):
        raise InvariantViolationError("auxiliary beta must stay non-negative")


def _assemble_normal_matrix(
    problem: GemanMcClureProblem, coefficients: np.ndarray
) -> np.ndarray:
    return np.tensordot(coefficients, problem.term_stack, axes=1)


def _assert_normal_matrix_psd(a: np.ndarray) -> None:
    min_eig = float(np.linalg.eigvalsh(a)[0])
    if min_eig < -_PSD_RTOL * max(float(np.trace(a)), 0.0):
        raise InvariantViolationError(
            f"normal matrix lost positive semidefiniteness (min eig {min_eig:g})"
        )


def _solve_homogenized(a: np.ndarray, homog_index: int) -> np.ndarray:
    """Minimize x^T A x subject to x[homog_index] = 1.

    The KKT solution is A^{-1} e scaled so the pinned coordinate equals one.
    A tiny ridge proportional to trace(A) guards rank-deficient A; if the
    system is still singular the data cannot determine a solution.
    """
    d = a.shape[0]
    _assert_normal_matrix_psd(a)
    ridge = _RIDGE_RTOL * float(np.trace(a)) / d
    a_reg = a + ridge * np.eye(d)
    e = np.zeros(d)
    e[homog_index] = 1.0
    try:
        y = scipy.linalg.solve(a_reg, e, assume_a="sym")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise DegenerateProblemError(
            "normal matrix is singular (too few or degenerate measurements)"
        ) from exc
    if not np.all(np.isfinite(y)):
        raise DegenerateProblemError("normal matrix solve produced non-finite values")
    denom = y[homog_index]
    if abs(denom) < _DENOM_RTOL * float(np.linalg.norm(y)):
        raise DegenerateProblemError(
            "homogenization coordinate is unreachable (degenerate problem)"
        )
    x = y / denom
    x[homog_index] = 1.0
    return x


def solve_weighted_quadratic(
    problem: GemanMcClureProblem, aux: AuxiliaryVariables
) -> np.ndarray:
    """Minimizer of sum_i mu_i (f_i(x) - beta_i h_i(x)) on the hyperplane.

    Dropping constants, the objective is x^T A x with
    A = sum_i mu_i (c^2 - beta_i) M_i, so the minimizer is the homogenized
    KKT solution.  Requires mu_i > 0 and beta_i < c^2 so that A is PSD.
    """
    _check_aux_shape(problem, aux)
    _check_aux_constraints(aux, problem.c)
    coefficients = aux.mu * (problem.c**2 - aux.beta)
    a = _assemble_normal_matrix(problem, coefficients)
    return _solve_homogenized(a, problem.homog_index)


def fracgm_solve(
    problem: GemanMcClureProblem,
    x0: np.ndarray,
    config: SolverConfig | None = None,
) -> SolverResult:
    """Run the alternating minimization from a homogenized initial guess.

    Each iteration refreshes (beta, mu) from the previous iterate and then
    solves the induced weighted quadratic; the loop stops when the normalized
    optimality residual falls below ``config.tolerance`` or the iteration cap
    is reached.  The returned iterate always has its last coordinate exactly 1.
    """
    if config is None:
        config = SolverConfig(c=problem.c)
    x = problem.check_vector(x0).copy()
    if x[problem.homog_index] != 1.0:
        raise ValueError("initial guess must be homogenized (last coordinate 1)")

    c = problem.c
    trace: list[IterationRecord] | None = [] if config.record_trace else None
    s = problem.squared_residuals(x)
    converged = False
    iterations = 0
    psi = np.inf

    for k in range(1, config.max_iterations + 1):
        aux = _aux_from(s, c)
        _check_aux_constraints(aux, c)
        coefficients = aux.mu * (c * c - aux.beta)
        a = _assemble_normal_matrix(problem, coefficients)
        x = _solve_homogenized(a, problem.homog_index)
        s = problem.squared_residuals(x)
        psi = _psi_norm_from(s, aux, c)
        iterations = k
        if trace is not None:
            trace.append(IterationRecord(cost=_gm_cost_from(s, c), psi_norm=psi))
        if psi <= config.tolerance:
            converged = True
            break

    return SolverResult(
        x=x,
        iterations=iterations,
        converged=converged,
        final_psi_norm=float(psi),
        final_cost=_gm_cost_from(s, c),
        aux_trace=trace,
    )
