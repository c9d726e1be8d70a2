"""Shared generators for randomized test instances."""

from __future__ import annotations

import numpy as np

from fracgm.core import GemanMcClureProblem


def random_problem(
    rng: np.random.Generator,
    d: int,
    n_terms: int,
    c: float = 1.0,
    scale: float = 1.0,
) -> GemanMcClureProblem:
    """Random instance with rank-<=3 PSD terms, mirroring the geometry builders."""
    blocks = rng.normal(size=(n_terms, 3, d)) * scale
    stack = blocks.transpose(0, 2, 1) @ blocks
    stack = 0.5 * (stack + stack.transpose(0, 2, 1))
    return GemanMcClureProblem(stack, c)


def random_homogenized(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=d) * scale
    x[d - 1] = 1.0
    return x
