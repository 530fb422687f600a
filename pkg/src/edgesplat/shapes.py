"""Synthetic clouds and images used by the benchmarks, CLI demos and tests."""

from __future__ import annotations

import numpy as np

from .camera import normalize_cloud


def cube_surface(n, rng):
    """``n`` points uniform on the surface of the unit cube, normalized."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    face = rng.integers(0, 6, size=n)
    pts = rng.uniform(-0.5, 0.5, size=(n, 3))
    axis = face % 3
    side = np.where(face < 3, -0.5, 0.5)
    pts[np.arange(n), axis] = side
    return normalize_cloud(pts)


def ring(n, radius, z=0.0):
    """``n`` equally spaced points on a circle of ``radius`` in the plane ``z``."""
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.stack([radius * np.cos(theta), radius * np.sin(theta), np.full(n, float(z))], axis=1)


def jittered(cloud, sigma, rng):
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return cloud + rng.normal(0.0, sigma, size=cloud.shape)
