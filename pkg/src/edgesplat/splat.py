"""Differentiable point splatting onto a pixel grid.

Each point contributes the outer product of a row activation
``exp(-(r - v)^2 / (2 sigma2))`` and a column activation
``exp(-(c - u)^2 / (2 sigma2))``. Activations farther than the truncation
radius from the point (per axis) are exactly zero, in both the forward pass
and the pullback. Contributions are summed with no squashing, so pixel values
can exceed one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import PixelCoords
from .errors import DimensionError, ParameterError

TRUNCATION_SIGMAS = 4.0


@dataclass(frozen=True)
class SplatConfig:
    sigma2: float = 0.5  # px^2
    height: int = 64
    width: int = 64
    # None means TRUNCATION_SIGMAS standard deviations
    truncation_radius: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ParameterError(f"sigma2 must be positive, got {self.sigma2!r}")
        if int(self.height) < 1 or int(self.width) < 1:
            raise ParameterError("image size must be positive")
        if self.truncation_radius is not None:
            if self.truncation_radius < 3.0 * math.sqrt(self.sigma2):
                raise ParameterError(
                    f"truncation_radius {self.truncation_radius!r} is below 3 sigma "
                    f"({3.0 * math.sqrt(self.sigma2):.6g})"
                )

    @property
    def radius(self):
        if self.truncation_radius is None:
            return TRUNCATION_SIGMAS * math.sqrt(self.sigma2)
        return float(self.truncation_radius)

    @property
    def shape(self):
        return (int(self.height), int(self.width))


def _uv(coords):
    uv = coords.uv if isinstance(coords, PixelCoords) else coords
    uv = np.asarray(uv, dtype=np.float64)
    if uv.ndim != 2 or uv.shape[1] != 2:
        raise DimensionError(f"pixel coordinates must have shape (N, 2), got {uv.shape}")
    if uv.shape[0] < 1:
        raise ParameterError("need at least one point to splat")
    return uv


def _activations(offsets, cfg):
    """Gaussian activations of ``grid - position``, zeroed past the radius."""
    act = np.exp(-(offsets * offsets) / (2.0 * cfg.sigma2))
    act[np.abs(offsets) > cfg.radius] = 0.0
    return act


def _axis_activations(uv, cfg):
    h, w = cfg.shape
    row_off = np.arange(h, dtype=np.float64)[None, :] - uv[:, 1:2]
    col_off = np.arange(w, dtype=np.float64)[None, :] - uv[:, 0:1]
    return row_off, _activations(row_off, cfg), col_off, _activations(col_off, cfg)


def splat(coords, cfg=SplatConfig()):
    """Render projected points to an ``(height, width)`` image."""
    uv = _uv(coords)
    _, rows, _, cols = _axis_activations(uv, cfg)
    return rows.T @ cols


def splat_pullback(coords, cfg, upstream):
    """Gradient of ``<upstream, splat(coords)>`` w.r.t. each ``(u, v)``.

    Returns an ``(N, 2)`` array of ``(d/du, d/dv)``.
    """
    uv = _uv(coords)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cfg.shape:
        raise DimensionError(f"upstream shape {upstream.shape} != image shape {cfg.shape}")
    row_off, rows, col_off, cols = _axis_activations(uv, cfg)
    # d/du exp(-(c-u)^2 / 2s) = (c-u)/s * exp(...); masked entries stay zero
    d_cols = col_off / cfg.sigma2 * cols
    d_rows = row_off / cfg.sigma2 * rows
    col_proj = cols @ upstream.T  # (N, H): sum_c U[r, c] C[i, c]
    dcol_proj = d_cols @ upstream.T
    grad = np.empty_like(uv)
    grad[:, 0] = np.einsum("ir,ir->i", rows, dcol_proj)
    grad[:, 1] = np.einsum("ir,ir->i", d_rows, col_proj)
    return grad
