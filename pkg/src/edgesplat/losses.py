"""Chamfer distance, edge/corner L1 losses and the combined training objective."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, as_cloud, project, project_pullback
from .errors import DimensionError, ParameterError
from .neighbors import nearest
from .splat import SplatConfig, splat, splat_pullback
from .visual import VisualConfig, _backward, _forward, visual_maps


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 20.0  # edge
    lambda2: float = 10.0  # corner

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be finite and non-negative, got {value!r}")


@dataclass(frozen=True)
class RenderConfig:
    """Everything needed to turn a cloud and a view into edge/corner maps."""

    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    splat: SplatConfig = field(default_factory=SplatConfig)
    visual: VisualConfig = field(default_factory=VisualConfig)


@dataclass(frozen=True)
class LossReport:
    cd: float
    edge: float
    corner: float
    total: float
    per_view: tuple = ()
    emd: float | None = None

    def as_record(self):
        return {"cd": self.cd, "edge": self.edge, "corner": self.corner, "total": self.total}


def chamfer(a, b):
    """Symmetric Chamfer distance (sum of squared NN distances) and its gradient in ``a``.

    Nearest-neighbor ties resolve to the lowest index, which then receives the
    full subgradient.
    """
    a = as_cloud(a, "a")
    b = as_cloud(b, "b")
    nn_ab, d_ab = nearest(a, b)
    nn_ba, d_ba = nearest(b, a)
    value = math.fsum(d_ab) + math.fsum(d_ba)

    grad = 2.0 * (a - b[nn_ab])
    # each b point pulls its nearest a point towards itself
    np.add.at(grad, nn_ba, 2.0 * (a[nn_ba] - b))
    return value, grad


def edge_corner_loss(pred_maps, gt_maps):
    """Mean absolute difference of edge and corner maps.

    Returns ``(edge, corner, upstream_edge, upstream_corner)`` where the
    upstreams are derivatives with respect to the *predicted* maps:
    ``sign(pred - gt) / pixel_count`` (zero where they are equal).
    """
    pe, pc = np.asarray(pred_maps.edge), np.asarray(pred_maps.corner)
    ge, gc = np.asarray(gt_maps.edge), np.asarray(gt_maps.corner)
    if pe.shape != ge.shape or pc.shape != gc.shape or pe.shape != pc.shape:
        raise DimensionError("predicted and ground-truth maps must share one shape")
    n = pe.size
    de = pe - ge
    dc = pc - gc
    edge = float(np.mean(np.abs(de)))
    corner = float(np.mean(np.abs(dc)))
    return edge, corner, np.sign(de) / n, np.sign(dc) / n


def render_maps(cloud, view, cfg=RenderConfig()):
    """Project, splat and extract edge/corner maps for one view."""
    coords = project(cloud, view, cfg.intrinsics)
    return visual_maps(splat(coords, cfg.splat), cfg.visual)


def target_maps(gt, views, cfg=RenderConfig()):
    """Ground-truth maps keyed by view, reusable across loss evaluations."""
    gt = as_cloud(gt, "gt")
    return {view: render_maps(gt, view, cfg) for view in views}


def _evaluate(pred, gt, views, weights, cfg, gt_maps=None, pred_scales=None, need_grad=True):
    pred = as_cloud(pred, "pred")
    gt = as_cloud(gt, "gt")
    views = list(views)
    if not views:
        raise ParameterError("need at least one view")
    cd, grad = chamfer(pred, gt)
    if not need_grad:
        grad = None

    n_views = len(views)
    per_view = []
    scales = []
    backprop = need_grad and (weights.lambda1 != 0 or weights.lambda2 != 0)
    for k, view in enumerate(views):
        coords = project(pred, view, cfg.intrinsics)
        img = splat(coords, cfg.splat)
        fw = _forward(img, cfg.visual, None if pred_scales is None else pred_scales[k])
        scales.append((fw.maps.edge_scale, fw.maps.corner_scale))
        ref = None if gt_maps is None else gt_maps.get(view)
        if ref is None:
            ref = render_maps(gt, view, cfg)
        edge, corner, up_edge, up_corner = edge_corner_loss(fw.maps, ref)
        per_view.append((edge, corner))
        if backprop:
            g_img = _backward(
                fw,
                cfg.visual,
                (weights.lambda1 / n_views) * up_edge,
                (weights.lambda2 / n_views) * up_corner,
            )
            g_uv = splat_pullback(coords, cfg.splat, g_img)
            grad = grad + project_pullback(pred, view, cfg.intrinsics, g_uv)

    edge = math.fsum(e for e, _ in per_view) / n_views
    corner = math.fsum(c for _, c in per_view) / n_views
    total = cd + weights.lambda1 * edge + weights.lambda2 * corner
    report = LossReport(cd=cd, edge=edge, corner=corner, total=total, per_view=tuple(per_view))
    return report, grad, scales


def total_loss(pred, gt, views, weights=LossWeights(), cfg=RenderConfig(), gt_maps=None):
    """``CD + lambda1 * edge + lambda2 * corner`` and its gradient in ``pred``.

    Edge and corner terms are averaged over ``views``. Only ``pred`` is
    differentiated; ``gt_maps`` (see :func:`target_maps`) avoids re-rendering
    the target for views seen before.
    """
    report, grad, _ = _evaluate(pred, gt, views, weights, cfg, gt_maps)
    return report, grad
