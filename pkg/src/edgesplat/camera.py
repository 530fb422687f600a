"""Virtual pinhole camera: extrinsics from azimuth/elevation, projection, pullback.

A point ``P`` is moved into the camera frame with ``X = R P + t`` where
``t = (0, 0, distance)``, then ``q = K X``. Pixel coordinates are
``u = -q_x / q_z`` (column) and ``v = -q_y / q_z`` (row). The negation puts a
centered unit cube inside a 64x64 image for the default ``K`` whose principal
point is ``(-32, -32)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCloudError, DimensionError, ParameterError, ProjectionError


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float = 120.0
    fy: float = 120.0
    cx: float = -32.0
    cy: float = -32.0

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.fx == 0 or self.fy == 0:
            raise ParameterError("focal lengths must be non-zero")

    @property
    def matrix(self):
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class ViewSpec:
    azimuth: float = 0.0  # degrees
    elevation: float = 0.0  # degrees
    distance: float = 2.5

    def __post_init__(self):
        if not (np.isfinite(self.azimuth) and np.isfinite(self.elevation)):
            raise ParameterError("view angles must be finite")
        if not (np.isfinite(self.distance) and self.distance > 0):
            raise ParameterError(f"view distance must be positive, got {self.distance!r}")

    @property
    def translation(self):
        return np.array([0.0, 0.0, float(self.distance)])


@dataclass(frozen=True)
class PixelCoords:
    """Continuous pixel positions ``uv[:, 0] = u`` (column), ``uv[:, 1] = v`` (row)."""

    uv: np.ndarray
    depth: np.ndarray

    def __len__(self):
        return len(self.depth)


DEFAULT_AZIMUTHS = tuple(float(a) for a in range(0, 360, 45))
DEFAULT_ELEVATIONS = (0.0, 20.0)


def default_pool(distance=2.5):
    """The 16-view default angle pool: 8 azimuths x 2 elevations."""
    return angle_pool(DEFAULT_AZIMUTHS, DEFAULT_ELEVATIONS, distance)


def angle_pool(azimuths, elevations, distance=2.5):
    return [
        ViewSpec(float(az), float(el), float(distance))
        for el, az in itertools.product(elevations, azimuths)
    ]


def as_cloud(cloud, name="cloud"):
    arr = np.asarray(cloud, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DimensionError(f"{name} must have shape (N, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise ParameterError(f"{name} must contain at least one point")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite coordinates")
    return arr


def rotation_from_view(view):
    """``R = Rx(elevation) @ Ry(azimuth)``, angles in degrees."""
    az = np.deg2rad(view.azimuth)
    el = np.deg2rad(view.elevation)
    ca, sa = np.cos(az), np.sin(az)
    ce, se = np.cos(el), np.sin(el)
    ry = np.array([[ca, 0.0, sa], [0.0, 1.0, 0.0], [-sa, 0.0, ca]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, ce, -se], [0.0, se, ce]])
    return rx @ ry


def _camera_frame(cloud, view):
    cloud = as_cloud(cloud)
    rot = rotation_from_view(view)
    return cloud, rot, cloud @ rot.T + view.translation


def project(cloud, view, intr=CameraIntrinsics()):
    """Project an (N, 3) cloud to continuous pixel coordinates."""
    _, _, cam = _camera_frame(cloud, view)
    depth = cam[:, 2]
    bad = np.flatnonzero(~(depth > 0))
    if bad.size:
        raise ProjectionError(bad[0], depth[bad[0]])
    qx = intr.fx * cam[:, 0] + intr.cx * depth
    qy = intr.fy * cam[:, 1] + intr.cy * depth
    uv = np.stack([-qx / depth, -qy / depth], axis=1)
    return PixelCoords(uv=uv, depth=depth.copy())


def project_pullback(cloud, view, intr, upstream):
    """Gradient w.r.t. the cloud given ``upstream[i] = (dL/du_i, dL/dv_i)``."""
    cloud, rot, cam = _camera_frame(cloud, view)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (cloud.shape[0], 2):
        raise DimensionError(f"upstream must have shape ({cloud.shape[0]}, 2), got {upstream.shape}")
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]
    bad = np.flatnonzero(~(z > 0))
    if bad.size:
        raise ProjectionError(bad[0], z[bad[0]])
    gu, gv = upstream[:, 0], upstream[:, 1]
    # u = -(fx x / z + cx), v = -(fy y / z + cy)
    g_cam = np.empty_like(cam)
    g_cam[:, 0] = -intr.fx * gu / z
    g_cam[:, 1] = -intr.fy * gv / z
    g_cam[:, 2] = (intr.fx * x * gu + intr.fy * y * gv) / (z * z)
    return g_cam @ rot


def normalize_cloud(cloud):
    """Center the bounding box at the origin and scale its longest edge to 1."""
    cloud = as_cloud(cloud)
    lo = cloud.min(axis=0)
    hi = cloud.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 0:
        raise DegenerateCloudError("cloud has zero extent on every axis")
    center = (lo + hi) / 2.0
    return (cloud - center) / extent


def sample_views(pool, k, seed):
    """Draw ``k`` distinct views uniformly from ``pool``.

    ``seed`` is an integer or a ``numpy.random.Generator``; passing the same
    generator across calls gives one reproducible stream.
    """
    pool = list(pool)
    k = int(k)
    if k < 1 or k > len(pool):
        raise ParameterError(f"cannot draw {k} views from a pool of {len(pool)}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = rng.choice(len(pool), size=k, replace=False)
    return [pool[i] for i in idx]
