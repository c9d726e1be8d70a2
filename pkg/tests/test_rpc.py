"""Tests for the JSON request bridge used by foreign-language bindings."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from fracgm.core import SolverConfig
from fracgm.geometry import rotation_error_deg, solve_rotation
from fracgm.rpc import handle_request
from fracgm.synthetic import SceneConfig, generate_scene


def run_cli(payload) -> dict | list:
    proc = subprocess.run(
        [sys.executable, "-m", "fracgm.rpc"],
        input=json.dumps(payload),
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_solve_rotation_matches_native_exactly():
    scene = generate_scene(SceneConfig(n_points=30, outlier_rate=0.3, seed=5))
    corr = scene.correspondences
    response = handle_request(
        {
            "op": "solve_rotation",
            "source": corr.source.tolist(),
            "target": corr.target.tolist(),
            "noise_bounds": corr.noise_bounds.tolist(),
        }
    )
    assert response["ok"]
    transform, result = solve_rotation(corr, SolverConfig())
    np.testing.assert_array_equal(
        np.asarray(response["result"]["rotation"]), transform.rotation
    )
    assert response["result"]["iterations"] == result.iterations
    assert response["result"]["cost"] == result.final_cost


def test_generate_scene_payload_shape():
    response = handle_request(
        {"op": "generate_scene", "n_points": 12, "outlier_rate": 0.25, "seed": 3}
    )
    assert response["ok"]
    scene = response["result"]
    assert len(scene["source"]) == 12
    assert len(scene["target"]) == 12
    assert sum(scene["outlier_mask"]) == 3
    native = generate_scene(SceneConfig(n_points=12, outlier_rate=0.25, seed=3))
    np.testing.assert_array_equal(np.asarray(scene["source"]), native.correspondences.source)
    np.testing.assert_array_equal(np.asarray(scene["target"]), native.correspondences.target)


def test_solve_scene_includes_metrics():
    response = handle_request(
        {"op": "solve_scene", "mode": "registration", "n_points": 40,
         "outlier_rate": 0.2, "with_translation": True, "seed": 9}
    )
    assert response["ok"]
    assert response["result"]["metrics"]["rotation_error_deg"] < 1.0
    assert response["result"]["metrics"]["translation_error_m"] < 0.1


def test_error_metric_ops():
    rot = handle_request(
        {"op": "rotation_error_deg", "r_est": np.eye(3).tolist(), "r_gt": np.eye(3).tolist()}
    )
    assert rot["ok"] and rot["result"]["degrees"] == pytest.approx(0.0, abs=1e-9)
    trans = handle_request(
        {"op": "translation_error", "t_est": [1.0, 2.0, 2.0], "t_gt": [0.0, 0.0, 0.0]}
    )
    assert trans["ok"] and trans["result"]["meters"] == pytest.approx(3.0)


def test_error_codes():
    assert handle_request({"op": "nope"})["error"]["code"] == "bad-request"
    assert handle_request({"op": "solve_rotation"})["error"]["code"] == "bad-request"
    mismatch = handle_request(
        {
            "op": "solve_rotation",
            "source": [[0, 0, 0]] * 4,
            "target": [[0, 0, 0]] * 5,
            "noise_bounds": 0.1,
        }
    )
    assert mismatch["error"]["code"] == "invalid-argument"
    too_few = handle_request(
        {
            "op": "solve_rotation",
            "source": [[0, 0, 0]] * 2,
            "target": [[0, 0, 0]] * 2,
            "noise_bounds": 0.1,
        }
    )
    assert too_few["error"]["code"] == "insufficient-data"
    bad_rate = handle_request({"op": "generate_scene", "n_points": 5, "outlier_rate": 1.5})
    assert bad_rate["error"]["code"] == "invalid-argument"
    missing_file = handle_request(
        {"op": "generate_scene", "n_points": 5, "bunny": "/does/not/exist.ply"}
    )
    assert missing_file["error"]["code"] == "io-error"


def test_cli_round_trip_single_and_batch():
    single = run_cli({"op": "translation_error", "t_est": [0, 3, 4], "t_gt": [0, 0, 0]})
    assert single["ok"] and single["result"]["meters"] == 5.0
    batch = run_cli(
        [
            {"op": "translation_error", "t_est": [1, 0, 0], "t_gt": [0, 0, 0]},
            {"op": "unknown"},
        ]
    )
    assert isinstance(batch, list) and len(batch) == 2
    assert batch[0]["ok"] and not batch[1]["ok"]


def test_cli_invalid_json_exit_code():
    proc = subprocess.run(
        [sys.executable, "-m", "fracgm.rpc"],
        input="this is not json",
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["error"]["code"] == "bad-request"


def test_float_round_trip_is_exact():
    rng = np.random.default_rng(0)
    values = rng.normal(size=50) * 10.0**rng.integers(-12, 12, size=50)
    decoded = np.asarray(json.loads(json.dumps(values.tolist())))
    np.testing.assert_array_equal(decoded, values)
