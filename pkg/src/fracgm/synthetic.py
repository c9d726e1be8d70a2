"""Reproducible synthetic scenes: rigid motion, Gaussian noise, sphere outliers.

A scene takes a source cloud (random cube or a PLY file), applies a uniform
random rotation (and optionally a random translation inside a ball), adds
isotropic Gaussian noise, then replaces a fixed fraction of target points
with draws uniform in the volume of an origin-centered sphere.  Everything is
driven by one seed; the same config always yields a bit-identical scene.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import PointCorrespondences, RigidTransform

__all__ = [
    "RandomCube",
    "BunnyFile",
    "SceneConfig",
    "SyntheticScene",
    "generate_scene",
    "load_ply_vertices",
]


@dataclass(frozen=True)
class RandomCube:
    """Source points drawn uniformly from the origin-centered unit cube."""


@dataclass(frozen=True)
class BunnyFile:
    """Source points downsampled from an ASCII PLY vertex cloud."""

    path: str | Path


@dataclass(frozen=True)
class SceneConfig:
    """Scene generation parameters.

    ``noise_sigma`` is the true noise standard deviation used to corrupt
    inlier targets; ``noise_bound`` is the per-correspondence scale handed to
    the solvers, which need not match the truth (the benchmarks default to a
    bound of 0.1 on data with sigma 0.01).
    """

    n_points: int
    outlier_rate: float = 0.0
    noise_sigma: float = 0.01
    outlier_radius: float = 2.0
    with_translation: bool = False
    max_translation_norm: float = 1.0
    seed: int = 0
    source: RandomCube | BunnyFile = RandomCube()
    noise_bound: float = 0.1

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError(f"n_points must be positive, got {self.n_points}")
        if not 0.0 <= self.outlier_rate < 1.0:
            raise ValueError(f"outlier_rate must be in [0, 1), got {self.outlier_rate}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be non-negative, got {self.noise_sigma}")
        if not self.outlier_radius > 0:
            raise ValueError(f"outlier_radius must be positive, got {self.outlier_radius}")
        if not self.max_translation_norm > 0:
            raise ValueError(
                f"max_translation_norm must be positive, got {self.max_translation_norm}"
            )
        if not self.noise_bound > 0:
            raise ValueError(f"noise_bound must be positive, got {self.noise_bound}")


@dataclass(frozen=True)
class SyntheticScene:
    """Generated correspondences plus the ground truth that produced them."""

    correspondences: PointCorrespondences
    ground_truth: RigidTransform
    outlier_mask: np.ndarray
    config: SceneConfig

    @property
    def outlier_sphere_center(self) -> np.ndarray:
        # Outlier replacements are drawn around the origin, not the cloud centroid.
        return np.zeros(3)


def _quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    # Normalized 4-D Gaussian quaternion: exactly uniform on SO(3).
    q = rng.normal(size=4)
    return _quaternion_to_matrix(q / np.linalg.norm(q))


def _uniform_ball(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    directions = rng.normal(size=(count, 3))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / 3.0)
    return directions / norms * radii[:, None]


def load_ply_vertices(path: str | Path) -> np.ndarray:
    """Read vertex x/y/z columns from an ASCII PLY file; other data ignored."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError(f"{path}: not a PLY file")
    elements: list[tuple[str, int]] = []
    properties: dict[str, list[str]] = {}
    fmt = None
    body_start = None
    for idx, raw in enumerate(lines[1:], start=1):
        fields = raw.strip().split()
        if not fields or fields[0] == "comment":
            continue
        if fields[0] == "format":
            fmt = fields[1]
        elif fields[0] == "element":
            elements.append((fields[1], int(fields[2])))
            properties[fields[1]] = []
        elif fields[0] == "property":
            if fields[1] == "list":
                properties[elements[-1][0]].append("list")
            else:
                properties[elements[-1][0]].append(fields[-1])
        elif fields[0] == "end_header":
            body_start = idx + 1
            break
    if fmt != "ascii":
        raise ValueError(f"{path}: only ASCII PLY is supported, got format {fmt!r}")
    if body_start is None or not any(name == "vertex" for name, _ in elements):
        raise ValueError(f"{path}: missing end_header or vertex element")

    cursor = body_start
    vertices = None
    for name, count in elements:
        if name == "vertex":
            cols = properties[name]
            try:
                xyz = [cols.index(axis) for axis in ("x", "y", "z")]
            except ValueError as exc:
                raise ValueError(f"{path}: vertex element lacks x/y/z") from exc
            rows = np.array(
                [
                    [float(parts[j]) for j in xyz]
                    for parts in (lines[i].split() for i in range(cursor, cursor + count))
                ]
            )
            vertices = rows
        cursor += count
    assert vertices is not None
    return vertices


def _sample_source(config: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    if isinstance(config.source, RandomCube):
        return rng.random((config.n_points, 3)) - 0.5
    cloud = load_ply_vertices(config.source.path)
    if cloud.shape[0] < config.n_points:
        raise ValueError(
            f"{config.source.path}: has {cloud.shape[0]} vertices, "
            f"need {config.n_points}"
        )
    keep = rng.choice(cloud.shape[0], size=config.n_points, replace=False)
    return cloud[keep]


def generate_scene(config: SceneConfig) -> SyntheticScene:
    """Build one scene; deterministic for a fixed config (including seed)."""
    rng = np.random.default_rng(config.seed)
    source = _sample_source(config, rng)
    rotation = _random_rotation(rng)
    if config.with_translation:
        translation = _uniform_ball(rng, 1, config.max_translation_norm)[0]
    else:
        translation = np.zeros(3)
    noise = rng.normal(size=source.shape) * config.noise_sigma
    target = source @ rotation.T + translation + noise

    n = config.n_points
    n_outliers = int(round(config.outlier_rate * n))
    mask = np.zeros(n, dtype=bool)
    if n_outliers > 0:
        chosen = rng.choice(n, size=n_outliers, replace=False)
        target[chosen] = _uniform_ball(rng, n_outliers, config.outlier_radius)
        mask[chosen] = True
    mask.setflags(write=False)

    corr = PointCorrespondences(source, target, np.full(n, config.noise_bound))
    return SyntheticScene(
        correspondences=corr,
        ground_truth=RigidTransform(rotation, translation),
        outlier_mask=mask,
        config=config,
    )
