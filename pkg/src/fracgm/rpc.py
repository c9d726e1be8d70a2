"""Line-oriented JSON bridge for foreign-language callers.

Reads one JSON request (or an array of requests) from stdin and writes the
response(s) to stdout.  Arrays are copied in and out as plain JSON numbers;
float64 values survive the round trip exactly because both sides print
shortest round-trip decimal representations.  Errors are returned in-band
with a stable ``code`` so callers can map them to typed exceptions.

Request shape: ``{"op": <name>, ...op-specific fields...}``.  Supported ops:

- ``solve_rotation`` / ``solve_registration``: ``source`` (Nx3), ``target``
  (Nx3), ``noise_bounds`` (scalar or length N), optional ``c``,
  ``max_iterations``, ``tolerance``.
- ``generate_scene``: SceneConfig fields (``n_points``, ``outlier_rate``,
  ``noise_sigma``, ``outlier_radius``, ``with_translation``,
  ``max_translation_norm``, ``seed``, ``noise_bound``, optional ``bunny``).
- ``solve_scene``: SceneConfig fields plus ``mode`` ("rotation" or
  "registration") and solver fields; generates and solves natively in one
  process (the parity reference for bindings).
- ``rotation_error_deg`` / ``translation_error``: error metrics.
"""

from __future__ import annotations

import json
import sys
from typing import Any

import numpy as np

from .core import SolverConfig, SolverResult
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
    RigidTransform,
    rotation_error_deg,
    solve_registration,
    solve_rotation,
    translation_error,
)
from .synthetic import BunnyFile, RandomCube, SceneConfig, SyntheticScene, generate_scene

__all__ = ["handle_request", "main"]


class BadRequestError(ValueError):
    """Request is structurally invalid (missing op or malformed fields)."""


_ERROR_CODES = [
    (BadRequestError, "bad-request"),
    (DimensionMismatchError, "invalid-argument"),
    (InsufficientDataError, "insufficient-data"),
    (DegenerateProblemError, "degenerate-problem"),
    (DegenerateGeometryError, "degenerate-geometry"),
    (InvariantViolationError, "invariant-violation"),
    (OSError, "io-error"),
    (ValueError, "invalid-argument"),
]


def _error_code(exc: Exception) -> str:
    for exc_type, code in _ERROR_CODES:
        if isinstance(exc, exc_type):
            return code
    return "internal-error"


def _solver_config(request: dict) -> SolverConfig:
    return SolverConfig(
        c=float(request.get("c", 1.0)),
        max_iterations=int(request.get("max_iterations", 100)),
        tolerance=float(request.get("tolerance", 1e-7)),
    )


def _correspondences(request: dict) -> PointCorrespondences:
    for key in ("source", "target", "noise_bounds"):
        if key not in request:
            raise BadRequestError(f"missing field {key!r}")
    return PointCorrespondences(
        np.asarray(request["source"], dtype=np.float64),
        np.asarray(request["target"], dtype=np.float64),
        np.asarray(request["noise_bounds"], dtype=np.float64),
    )


def _solve_result_payload(transform: RigidTransform, result: SolverResult) -> dict:
    return {
        "rotation": transform.rotation.tolist(),
        "translation": transform.translation.tolist(),
        "iterations": result.iterations,
        "converged": result.converged,
        "cost": result.final_cost,
    }


def _scene_config(request: dict) -> SceneConfig:
    if "n_points" not in request:
        raise BadRequestError("missing field 'n_points'")
    source = BunnyFile(request["bunny"]) if request.get("bunny") else RandomCube()
    return SceneConfig(
        n_points=int(request["n_points"]),
        outlier_rate=float(request.get("outlier_rate", 0.0)),
        noise_sigma=float(request.get("noise_sigma", 0.01)),
        outlier_radius=float(request.get("outlier_radius", 2.0)),
        with_translation=bool(request.get("with_translation", False)),
        max_translation_norm=float(request.get("max_translation_norm", 1.0)),
        seed=int(request.get("seed", 0)),
        source=source,
        noise_bound=float(request.get("noise_bound", 0.1)),
    )


def _scene_payload(scene: SyntheticScene) -> dict:
    return {
        "source": scene.correspondences.source.tolist(),
        "target": scene.correspondences.target.tolist(),
        "noise_bounds": scene.correspondences.noise_bounds.tolist(),
        "outlier_mask": scene.outlier_mask.tolist(),
        "ground_truth": {
            "rotation": scene.ground_truth.rotation.tolist(),
            "translation": scene.ground_truth.translation.tolist(),
        },
        "outlier_sphere_center": scene.outlier_sphere_center.tolist(),
    }


def _op_solve_rotation(request: dict) -> dict:
    transform, result = solve_rotation(_correspondences(request), _solver_config(request))
    return _solve_result_payload(transform, result)


def _op_solve_registration(request: dict) -> dict:
    transform, result = solve_registration(_correspondences(request), _solver_config(request))
    return _solve_result_payload(transform, result)


def _op_generate_scene(request: dict) -> dict:
    return _scene_payload(generate_scene(_scene_config(request)))


def _op_solve_scene(request: dict) -> dict:
    mode = request.get("mode", "rotation")
    if mode not in ("rotation", "registration"):
        raise BadRequestError(f"mode must be 'rotation' or 'registration', got {mode!r}")
    scene = generate_scene(_scene_config(request))
    solve = solve_rotation if mode == "rotation" else solve_registration
    transform, result = solve(scene.correspondences, _solver_config(request))
    gt = scene.ground_truth
    return {
        "scene": _scene_payload(scene),
        "result": _solve_result_payload(transform, result),
        "metrics": {
            "rotation_error_deg": rotation_error_deg(transform.rotation, gt.rotation),
            "translation_error_m": translation_error(transform.translation, gt.translation),
        },
    }


def _matrix3(request: dict, key: str) -> np.ndarray:
    if key not in request:
        raise BadRequestError(f"missing field {key!r}")
    value = np.asarray(request[key], dtype=np.float64)
    if value.shape != (3, 3):
        raise DimensionMismatchError(f"{key} must be 3x3, got {value.shape}")
    return value


def _op_rotation_error(request: dict) -> dict:
    return {
        "degrees": rotation_error_deg(_matrix3(request, "r_est"), _matrix3(request, "r_gt"))
    }


def _op_translation_error(request: dict) -> dict:
    for key in ("t_est", "t_gt"):
        if key not in request:
            raise BadRequestError(f"missing field {key!r}")
    return {
        "meters": translation_error(
            np.asarray(request["t_est"], dtype=np.float64),
            np.asarray(request["t_gt"], dtype=np.float64),
        )
    }


_OPS = {
    "solve_rotation": _op_solve_rotation,
    "solve_registration": _op_solve_registration,
    "generate_scene": _op_generate_scene,
    "solve_scene": _op_solve_scene,
    "rotation_error_deg": _op_rotation_error,
    "translation_error": _op_translation_error,
}


def handle_request(request: Any) -> dict:
    """Dispatch one request dict; exceptions become in-band error payloads."""
    try:
        if not isinstance(request, dict):
            raise BadRequestError("request must be a JSON object")
        op = request.get("op")
        if op not in _OPS:
            raise BadRequestError(f"unknown op {op!r}")
        return {"ok": True, "result": _OPS[op](request)}
    except Exception as exc:  # all errors cross the boundary in-band
        return {
            "ok": False,
            "error": {"code": _error_code(exc), "message": f"{type(exc).__name__}: {exc}"},
        }


def main() -> int:
    text = sys.stdin.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        json.dump(
            {"ok": False, "error": {"code": "bad-request", "message": f"invalid JSON: {exc}"}},
            sys.stdout,
        )
        sys.stdout.write("\n")
        return 1
    if isinstance(payload, list):
        response: Any = [handle_request(item) for item in payload]
    else:
        response = handle_request(payload)
    json.dump(response, sys.stdout)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
