"""Rotation and registration problems as homogenized quadratic terms.

A rotation-only correspondence residual ||b - R a|| / sigma becomes a
quadratic form x^T M x in the 10-vector x = [vec(R), 1] (column-major vec),
because (a^T kron I3) vec(R) = R a.  Registration appends the translation:
x = [vec(R), t, 1] in R^13.  The solvers relax R to a free 3x3 matrix, run
the alternating Geman-McClure minimization, and project the result back to
SO(3) by SVD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GemanMcClureProblem,
    SolverConfig,
    SolverResult,
    fracgm_solve,
)
from .exceptions import (
    DegenerateGeometryError,
    DimensionMismatchError,
    InsufficientDataError,
)

__all__ = [
    "ROTATION_DIM",
    "REGISTRATION_DIM",
    "PointCorrespondences",
    "RigidTransform",
    "ProjectionDiagnostics",
    "build_rotation_terms",
    "build_registration_terms",
    "vectorize",
    "devectorize",
    "project_to_so3",
    "closed_form_alignment",
    "solve_rotation",
    "solve_registration",
    "rotation_error_deg",
    "translation_error",
]

ROTATION_DIM = 10
REGISTRATION_DIM = 13

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class PointCorrespondences:
    """Matched 3-D point sets with one positive noise bound per pair.

    ``noise_bounds`` may be passed as a scalar, which is broadcast to all
    correspondences.  Residuals are weighted by 1/bound, so the bound sets
    the scale at which a residual starts counting as large.
    """

    source: np.ndarray
    target: np.ndarray
    noise_bounds: np.ndarray

    def __post_init__(self) -> None:
        source = np.asarray(self.source, dtype=np.float64)
        target = np.asarray(self.target, dtype=np.float64)
        if source.ndim != 2 or source.shape[1] != 3:
            raise DimensionMismatchError(f"source must be (N, 3), got {source.shape}")
        if target.shape != source.shape:
            raise DimensionMismatchError(
                f"target shape {target.shape} != source shape {source.shape}"
            )
        n = source.shape[0]
        if n < 3:
            raise InsufficientDataError(f"need at least 3 correspondences, got {n}")
        bounds = np.asarray(self.noise_bounds, dtype=np.float64)
        if bounds.ndim == 0:
            bounds = np.full(n, float(bounds))
        if bounds.shape != (n,):
            raise DimensionMismatchError(
                f"noise_bounds must be scalar or length {n}, got {bounds.shape}"
            )
        if not np.all(bounds > 0):
            raise ValueError("all noise bounds must be strictly positive")
        if not (
            np.all(np.isfinite(source))
            and np.all(np.isfinite(target))
            and np.all(np.isfinite(bounds))
        ):
            raise ValueError("correspondences must be finite")
        for name, value in (("source", source), ("target", target), ("noise_bounds", bounds)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.source.shape[0]


@dataclass(frozen=True)
class RigidTransform:
    """Rotation matrix plus translation vector; the rotation must be in SO(3)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3):
            raise DimensionMismatchError(f"rotation must be 3x3, got {r.shape}")
        if t.shape != (3,):
            raise DimensionMismatchError(f"translation must be length 3, got {t.shape}")
        ortho_err = float(np.abs(r.T @ r - np.eye(3)).max())
        det_err = abs(float(np.linalg.det(r)) - 1.0)
        if ortho_err > _ORTHO_TOL or det_err > _ORTHO_TOL:
            raise ValueError(
                f"rotation is not in SO(3): |R^T R - I|={ortho_err:g}, |det-1|={det_err:g}"
            )
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (N, 3) point array."""
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class ProjectionDiagnostics:
    """Extra facts about an SO(3) projection; ``unique`` is False when the
    input ties two reflected minimizers."""

    unique: bool
    singular_values: np.ndarray


def _row_blocks_rotation(corr: PointCorrespondences) -> np.ndarray:
    # B_i = [a_i^T kron I3, -b_i], stacked to (N, 3, 10); B_i x = R a_i - b_i.
    n = corr.n
    eye = np.eye(3)
    kron = corr.source[:, None, :, None] * eye[None, :, None, :]
    blocks = np.empty((n, 3, ROTATION_DIM))
    blocks[:, :, :9] = kron.reshape(n, 3, 9)
    blocks[:, :, 9] = -corr.target
    return blocks


def _row_blocks_registration(corr: PointCorrespondences) -> np.ndarray:
    # B_i = [a_i^T kron I3, I3, -b_i], stacked to (N, 3, 13).
    n = corr.n
    eye = np.eye(3)
    kron = corr.source[:, None, :, None] * eye[None, :, None, :]
    blocks = np.empty((n, 3, REGISTRATION_DIM))
    blocks[:, :, :9] = kron.reshape(n, 3, 9)
    blocks[:, :, 9:12] = eye[None, :, :]
    blocks[:, :, 12] = -corr.target
    return blocks


def _terms_from_blocks(
    blocks: np.ndarray, noise_bounds: np.ndarray, c: float
) -> GemanMcClureProblem:
    weighted = blocks / noise_bounds[:, None, None]
    stack = weighted.transpose(0, 2, 1) @ weighted
    stack = 0.5 * (stack + stack.transpose(0, 2, 1))
    return GemanMcClureProblem(stack, c, validate=False)


def build_rotation_terms(corr: PointCorrespondences, c: float = 1.0) -> GemanMcClureProblem:
    """Quadratic terms for rotation estimation; x^T M_i x = ||b_i - R a_i||^2 / sigma_i^2."""
    return _terms_from_blocks(_row_blocks_rotation(corr), corr.noise_bounds, c)


def build_registration_terms(
    corr: PointCorrespondences, c: float = 1.0
) -> GemanMcClureProblem:
    """Quadratic terms for registration; x^T M_i x = ||b_i - R a_i - t||^2 / sigma_i^2."""
    return _terms_from_blocks(_row_blocks_registration(corr), corr.noise_bounds, c)


def vectorize(transform: RigidTransform, d: int = ROTATION_DIM) -> np.ndarray:
    """Encode a transform as a homogenized vector (column-major rotation).

    The 10-dim layout carries only the rotation; the translation is encoded
    in coordinates 9..11 of the 13-dim layout.
    """
    rot = transform.rotation.reshape(9, order="F")
    if d == ROTATION_DIM:
        return np.concatenate([rot, [1.0]])
    if d == REGISTRATION_DIM:
        return np.concatenate([rot, transform.translation, [1.0]])
    raise ValueError(f"d must be {ROTATION_DIM} or {REGISTRATION_DIM}, got {d}")


def devectorize(x: np.ndarray, d: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Decode a homogenized vector into a raw 3x3 matrix and a translation.

    The matrix is returned as-is (it is generally not a rotation until
    projected); the translation is zero for rotation-only vectors.
    """
    x = np.asarray(x, dtype=np.float64)
    if d is None:
        d = x.shape[0]
    if x.shape != (d,) or d not in (ROTATION_DIM, REGISTRATION_DIM):
        raise DimensionMismatchError(f"expected length {ROTATION_DIM} or {REGISTRATION_DIM} vector, got {x.shape}")
    matrix = x[:9].reshape(3, 3, order="F").copy()
    translation = x[9:12].copy() if d == REGISTRATION_DIM else np.zeros(3)
    return matrix, translation


def project_to_so3(
    matrix: np.ndarray, with_diagnostics: bool = False
) -> np.ndarray | tuple[np.ndarray, ProjectionDiagnostics]:
    """Nearest rotation in Frobenius norm, with the usual determinant fix.

    For inputs with a negative-orientation optimum and a tie between the two
    smallest singular values, the minimizer is not unique; any minimizer is
    returned and the diagnostics (if requested) flag the tie.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (3, 3):
        raise DimensionMismatchError(f"expected 3x3 matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix must be finite")
    if not m.any():
        raise ValueError("cannot project the zero matrix")
    u, sing, vt = np.linalg.svd(m)
    sign = float(np.sign(np.linalg.det(u @ vt)))
    rotation = (u * np.array([1.0, 1.0, sign])) @ vt
    if not with_diagnostics:
        return rotation
    unique = sign > 0 or (sing[1] - sing[2]) > 1e-12 * max(sing[0], 1e-300)
    return rotation, ProjectionDiagnostics(unique=unique, singular_values=sing)


def closed_form_alignment(
    corr: PointCorrespondences, with_translation: bool
) -> RigidTransform:
    """Exact weighted least-squares alignment (no outlier handling).

    Weights are the inverse squared noise bounds.  With translation enabled
    the weighted centroids are subtracted first and the translation recovered
    afterwards; the rotation is the SO(3) projection of the transposed
    weighted cross-covariance.
    """
    weights = 1.0 / corr.noise_bounds**2
    if with_translation:
        total = weights.sum()
        source_bar = weights @ corr.source / total
        target_bar = weights @ corr.target / total
    else:
        source_bar = np.zeros(3)
        target_bar = np.zeros(3)
    src = corr.source - source_bar
    tgt = corr.target - target_bar
    cross = (weights[:, None] * src).T @ tgt
    if np.linalg.matrix_rank(cross) < 2:
        raise DegenerateGeometryError(
            "cross-covariance rank < 2 (collinear or coincident points)"
        )
    rotation = project_to_so3(cross.T)
    translation = target_bar - rotation @ source_bar
    return RigidTransform(rotation, translation)


def solve_rotation(
    corr: PointCorrespondences, config: SolverConfig | None = None
) -> tuple[RigidTransform, SolverResult]:
    """Robust rotation estimation: closed-form start, alternating GM solve,
    SVD projection back to SO(3).  The translation of the result is zero."""
    if config is None:
        config = SolverConfig()
    initial = closed_form_alignment(corr, with_translation=False)
    problem = build_rotation_terms(corr, c=config.c)
    result = fracgm_solve(problem, vectorize(initial, ROTATION_DIM), config)
    raw, _ = devectorize(result.x, ROTATION_DIM)
    rotation = project_to_so3(raw)
    return RigidTransform(rotation, np.zeros(3)), result


def solve_registration(
    corr: PointCorrespondences, config: SolverConfig | None = None
) -> tuple[RigidTransform, SolverResult]:
    """Robust rigid registration; the rotation block is projected to SO(3)
    and the translation is taken verbatim from the solved vector."""
    if config is None:
        config = SolverConfig()
    initial = closed_form_alignment(corr, with_translation=True)
    problem = build_registration_terms(corr, c=config.c)
    result = fracgm_solve(problem, vectorize(initial, REGISTRATION_DIM), config)
    raw, translation = devectorize(result.x, REGISTRATION_DIM)
    rotation = project_to_so3(raw)
    return RigidTransform(rotation, translation), result


def rotation_error_deg(r_est: np.ndarray, r_gt: np.ndarray) -> float:
    """Geodesic angle between two rotations, in degrees.

    Computed as atan2(sin, cos) of the relative rotation rather than
    arccos(cos): the arccos form cannot resolve angles below ~1e-8 rad in
    float64, which matters when checking near-exact recovery.
    """
    r_est = np.asarray(r_est, dtype=np.float64)
    r_gt = np.asarray(r_gt, dtype=np.float64)
    rel = r_gt.T @ r_est
    cos_angle = (float(np.trace(rel)) - 1.0) / 2.0
    sin_angle = float(np.linalg.norm(rel - rel.T)) / (2.0 * np.sqrt(2.0))
    return float(np.degrees(np.arctan2(sin_angle, np.clip(cos_angle, -1.0, 1.0))))


def translation_error(t_est: np.ndarray, t_gt: np.ndarray) -> float:
    """Euclidean distance between two translations, in the data's units."""
    return float(np.linalg.norm(np.asarray(t_est, float) - np.asarray(t_gt, float)))
