"""Splat-variance sweep: how connected a sparse cloud's projection looks."""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy import ndimage

from .camera import CameraIntrinsics, project
from .splat import SplatConfig, splat

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def count_components(img, fraction=0.5):
    """Number of 8-connected blobs of pixels above ``fraction * max(img)``."""
    img = np.asarray(img, dtype=np.float64)
    peak = float(img.max())
    if peak <= 0:
        return 0
    _, n = ndimage.label(img > fraction * peak, structure=_EIGHT_CONNECTED)
    return int(n)


def sigma_sweep(cloud, view, values, intr=CameraIntrinsics(), base=SplatConfig()):
    """Render ``cloud`` once per variance; returns ``[(sigma2, image, components)]``.

    The truncation radius scales with each variance.
    """
    coords = project(cloud, view, intr)
    out = []
    for sigma2 in values:
        cfg = dataclasses.replace(base, sigma2=float(sigma2), truncation_radius=None)
        img = splat(coords, cfg)
        out.append((float(sigma2), img, count_components(img)))
    return out
