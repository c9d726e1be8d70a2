"""Robust estimation with Geman-McClure costs via fractional programming.

Public surface: the generic alternating solver (:mod:`fracgm.core`), rotation
and registration pipelines (:mod:`fracgm.geometry`), GNC and least-squares
baselines (:mod:`fracgm.baselines`), synthetic scene generation
(:mod:`fracgm.synthetic`), and the benchmark harness (:mod:`fracgm.bench`).
"""

from .baselines import GncConfig, gnc_solve, weighted_ls_solve
from .core import (
    AuxiliaryVariables,
    GemanMcClureProblem,
    IterationRecord,
    QuadraticTerm,
    SolverConfig,
    SolverResult,
    fracgm_solve,
    gm_cost,
    psi_norm,
    solve_weighted_quadratic,
    update_auxiliary,
)
from .exceptions import (
    DegenerateGeometryError,
    DegenerateProblemError,
    DimensionMismatchError,
    FracgmError,
    InsufficientDataError,
    InvariantViolationError,
)
from .geometry import (
    PointCorrespondences,
    ProjectionDiagnostics,
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
from .synthetic import (
    BunnyFile,
    RandomCube,
    SceneConfig,
    SyntheticScene,
    generate_scene,
    load_ply_vertices,
)

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryVariables",
    "BunnyFile",
    "DegenerateGeometryError",
    "DegenerateProblemError",
    "DimensionMismatchError",
    "FracgmError",
    "GemanMcClureProblem",
    "GncConfig",
    "InsufficientDataError",
    "InvariantViolationError",
    "IterationRecord",
    "PointCorrespondences",
    "ProjectionDiagnostics",
    "QuadraticTerm",
    "RandomCube",
    "RigidTransform",
    "SceneConfig",
    "SolverConfig",
    "SolverResult",
    "SyntheticScene",
    "build_registration_terms",
    "build_rotation_terms",
    "closed_form_alignment",
    "devectorize",
    "fracgm_solve",
    "generate_scene",
    "gm_cost",
    "gnc_solve",
    "load_ply_vertices",
    "project_to_so3",
    "psi_norm",
    "rotation_error_deg",
    "solve_registration",
    "solve_rotation",
    "solve_weighted_quadratic",
    "translation_error",
    "update_auxiliary",
    "vectorize",
    "weighted_ls_solve",
]
