"""Bundled demo systems and the planar grid field family."""

from __future__ import annotations

import numpy as np

from .emulation import SourceFamily
from .linearsystem import LinearSystemModel

# Drift / noise-intensity pairs covering the qualitative regimes: a stable
# spiral with a finite rate ceiling, a double integrator and an unstable
# spiral whose rates grow without bound, and scalar Brownian motion with a
# closed-form rate.
_DEMOS = {
    "stable": ([[-0.5, 1.0], [-1.0, -0.5]], [[0.01, 0.0], [0.0, 0.01]]),
    "marginal": ([[0.0, 1.0], [0.0, 0.0]], [[0.01, 0.0], [0.0, 0.01]]),
    "unstable": ([[0.5, 1.0], [-1.0, 0.5]], [[0.01, 0.0], [0.0, 0.01]]),
    "brownian": ([[0.0]], [[1.0]]),
}


def demo_names() -> tuple:
    return tuple(_DEMOS)


def demo_model(name: str) -> LinearSystemModel:
    try:
        a, noise = _DEMOS[name]
    except KeyError:
        raise ValueError(f"unknown demo system {name!r}; choose from {sorted(_DEMOS)}")
    return LinearSystemModel.constant(np.array(a, dtype=float), np.array(noise, dtype=float))


def planar_grid_family() -> SourceFamily:
    """24 constant planar fields: the integer grid {-2..2}^2 minus the origin."""
    vectors = [
        np.array([a, b], dtype=float)
        for a in range(-2, 3)
        for b in range(-2, 3)
        if not (a == 0 and b == 0)
    ]
    return SourceFamily.from_vectors(vectors)
