"""Edge and Harris-corner maps of rendered images, with reverse-mode pullback.

Pipeline for one image ``img``::

    ix, iy   = img * kx, img * ky              (derivative-of-Gaussian kernels)
    edge     = |ix| + |iy|
    m11, m22, m12 = window * ix^2, window * iy^2, window * (ix iy)
    corner   = (m11 m22 - m12^2) / (m11 + m22 + eps)
    each map -> divide by its own max -> suppress

The per-map max is a constant as far as gradients are concerned. The
suppression curve is the identity up to 0.1 and has slope 0.3 above it, so
normalized maps land in ``[0, 0.37]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError, ParameterError
from .raster import (
    as_image,
    convolve_same,
    convolve_same_pullback,
    gaussian_derivative_kernels3,
    gaussian_kernel3,
)

KNEE = 0.1
HIGH_SLOPE = 0.3
SUPPRESSED_MAX = KNEE + HIGH_SLOPE * (1.0 - KNEE)


@dataclass(frozen=True)
class VisualConfig:
    kernel_sigma: float = 1.0  # px, derivative kernels
    window_sigma: float = 1.0  # px, structure-tensor window
    eps: float = 1e-6

    def __post_init__(self):
        for name in ("kernel_sigma", "window_sigma", "eps"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class EdgeCornerMaps:
    edge: np.ndarray
    corner: np.ndarray
    # normalizers actually used; 0.0 means the raw map was identically zero
    edge_scale: float = 1.0
    corner_scale: float = 1.0


def suppress(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= KNEE, x, KNEE + HIGH_SLOPE * (x - KNEE))


def suppress_slope(x):
    # the knee itself takes the upper slope
    return np.where(np.asarray(x) < KNEE, 1.0, HIGH_SLOPE)


def edge_map(img, sigma=1.0):
    """Return ``(raw_edge, ix, iy)`` for an image at least 3x3."""
    kx, ky = gaussian_derivative_kernels3(sigma)
    ix = convolve_same(img, kx)
    iy = convolve_same(img, ky)
    return np.abs(ix) + np.abs(iy), ix, iy


def _structure_tensor(ix, iy, window):
    m11 = convolve_same(ix * ix, window)
    m22 = convolve_same(iy * iy, window)
    m12 = convolve_same(ix * iy, window)
    return m11, m22, m12


def corner_map(ix, iy, window=None, eps=1e-6):
    """Harris response ``det(M) / (trace(M) + eps)`` of windowed gradients."""
    ix = as_image(ix, "ix")
    iy = as_image(iy, "iy")
    if ix.shape != iy.shape:
        raise DimensionError(f"ix shape {ix.shape} != iy shape {iy.shape}")
    if window is None:
        window = gaussian_kernel3(1.0)
    m11, m22, m12 = _structure_tensor(ix, iy, window)
    # det >= 0 in exact arithmetic; clip rounding noise
    det = np.maximum(m11 * m22 - m12 * m12, 0.0)
    return det / (m11 + m22 + eps)


def map_scale(raw):
    return float(np.max(raw))


def normalize_and_suppress(raw, scale=None):
    """Divide by ``scale`` (default: the map's max) and apply suppression.

    A zero scale yields an all-zero map.
    """
    raw = as_image(raw, "raw")
    if np.any(raw < 0):
        raise ContractError("normalize_and_suppress expects a non-negative map")
    if scale is None:
        scale = map_scale(raw)
    if scale <= 0:
        return np.zeros_like(raw)
    return suppress(raw / scale)


@dataclass
class _Forward:
    img: np.ndarray
    ix: np.ndarray
    iy: np.ndarray
    m11: np.ndarray
    m22: np.ndarray
    m12: np.ndarray
    det_active: np.ndarray
    denom: np.ndarray
    raw_corner: np.ndarray
    edge_norm: np.ndarray
    corner_norm: np.ndarray
    maps: EdgeCornerMaps


def _forward(img, cfg, scales=None):
    img = as_image(img)
    raw_edge, ix, iy = edge_map(img, cfg.kernel_sigma)
    window = gaussian_kernel3(cfg.window_sigma)
    m11, m22, m12 = _structure_tensor(ix, iy, window)
    det = m11 * m22 - m12 * m12
    det_active = det > 0
    denom = m11 + m22 + cfg.eps
    raw_corner = np.where(det_active, det, 0.0) / denom

    if scales is None:
        scales = (map_scale(raw_edge), map_scale(raw_corner))
    edge_scale, corner_scale = (float(s) for s in scales)
    edge_norm = raw_edge / edge_scale if edge_scale > 0 else np.zeros_like(raw_edge)
    corner_norm = raw_corner / corner_scale if corner_scale > 0 else np.zeros_like(raw_corner)
    maps = EdgeCornerMaps(
        edge=suppress(edge_norm),
        corner=suppress(corner_norm),
        edge_scale=edge_scale,
        corner_scale=corner_scale,
    )
    return _Forward(img, ix, iy, m11, m22, m12, det_active, denom, raw_corner,
                    edge_norm, corner_norm, maps)


def _backward(fw, cfg, upstream_edge, upstream_corner):
    shape = fw.img.shape
    upstream_edge = np.asarray(upstream_edge, dtype=np.float64)
    upstream_corner = np.asarray(upstream_corner, dtype=np.float64)
    if upstream_edge.shape != shape or upstream_corner.shape != shape:
        raise DimensionError(
            f"upstream shapes {upstream_edge.shape}, {upstream_corner.shape} != image shape {shape}"
        )
    maps = fw.maps
    g_edge = np.zeros(shape)
    g_corner = np.zeros(shape)
    if maps.edge_scale > 0:
        g_edge = upstream_edge * suppress_slope(fw.edge_norm) / maps.edge_scale
    if maps.corner_scale > 0:
        g_corner = upstream_corner * suppress_slope(fw.corner_norm) / maps.corner_scale

    # |ix| + |iy|, sign(0) = 0
    g_ix = g_edge * np.sign(fw.ix)
    g_iy = g_edge * np.sign(fw.iy)

    # corner = det / denom, det = m11 m22 - m12^2, denom = m11 + m22 + eps
    g_c = np.where(fw.det_active, g_corner, 0.0) / fw.denom
    ratio = fw.raw_corner / fw.denom
    g_m11 = g_c * fw.m22 - g_corner * ratio
    g_m22 = g_c * fw.m11 - g_corner * ratio
    g_m12 = -2.0 * g_c * fw.m12

    window = gaussian_kernel3(cfg.window_sigma)
    g_xx = convolve_same_pullback(g_m11, window, g_m11)
    g_yy = convolve_same_pullback(g_m22, window, g_m22)
    g_xy = convolve_same_pullback(g_m12, window, g_m12)
    g_ix = g_ix + 2.0 * fw.ix * g_xx + fw.iy * g_xy
    g_iy = g_iy + 2.0 * fw.iy * g_yy + fw.ix * g_xy

    kx, ky = gaussian_derivative_kernels3(cfg.kernel_sigma)
    return convolve_same_pullback(fw.img, kx, g_ix) + convolve_same_pullback(fw.img, ky, g_iy)


def visual_maps(img, cfg=VisualConfig(), scales=None):
    """Suppressed edge and corner maps of ``img``.

    ``scales`` fixes the ``(edge, corner)`` normalizers instead of using the
    per-map max; the gradient checks use it to hold the normalizer constant.
    """
    return _forward(img, cfg, scales).maps


def visual_maps_pullback(img, cfg, upstream_edge, upstream_corner):
    """Gradient w.r.t. ``img`` of ``<upstream_edge, edge> + <upstream_corner, corner>``."""
    return _backward(_forward(img, cfg), cfg, upstream_edge, upstream_corner)


SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()


def sobel_edges(img, threshold=0.5):
    """Binarize at ``threshold`` and return ``|Sobel_x| + |Sobel_y|``.

    Borders replicate the nearest pixel so constant images give no edges.
    Preprocessing only; no gradient is defined.
    """
    img = as_image(img)
    binary = (img > threshold).astype(np.float64)
    h, w = binary.shape
    padded = np.pad(binary, 1, mode="edge")
    gx = np.zeros_like(binary)
    gy = np.zeros_like(binary)
    for i in range(3):
        for j in range(3):
            patch = padded[i : i + h, j : j + w]
            gx += SOBEL_X[i, j] * patch
            gy += SOBEL_Y[i, j] * patch
    return np.abs(gx) + np.abs(gy)
