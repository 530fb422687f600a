"""Finite-difference audit of every hand-written pullback.

Each check draws random instances, picks random unit directions and compares
the analytic directional derivative against a central difference. When the
two disagree and the one-sided differences show a kink (an L1 or |.| sign
flip, a nearest-neighbor switch, a truncation edge) the instance is redrawn.
A disagreement without a detectable kink is a failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, ViewSpec, default_pool, project, project_pullback
from .losses import LossWeights, RenderConfig, _evaluate, chamfer
from .raster import convolve_same, convolve_same_pullback, gaussian_kernel3
from .shapes import cube_surface
from .splat import SplatConfig, splat, splat_pullback
from .visual import VisualConfig, _forward, visual_maps_pullback

STEP = 1e-6
DIRECTIONS = 2
MAX_RETRIES = 20
KINK_RTOL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    instances: int
    rtol: float
    max_rel_error: float
    retries: int
    passed: bool

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name:<24} instances={self.instances:<3d} retries={self.retries:<2d} "
            f"max_rel_err={self.max_rel_error:.3e} rtol={self.rtol:.0e} {status}"
        )


def _compare(f, x, grad, rng, rtol):
    """Return ``(relative_error, ok, kinked)`` over a few random directions."""
    f0 = f(x)
    atol = 1e-8 * (1.0 + abs(f0))
    worst = 0.0
    ok = True
    kinked = False
    for _ in range(DIRECTIONS):
        d = rng.normal(size=x.shape)
        d /= np.linalg.norm(d)
        f_plus = f(x + STEP * d)
        f_minus = f(x - STEP * d)
        fd = (f_plus - f_minus) / (2.0 * STEP)
        analytic = float(np.sum(grad * d))
        err = abs(fd - analytic)
        scale = max(abs(fd), abs(analytic))
        rel = err / scale if scale > 0 else 0.0
        worst = max(worst, rel)
        if err > rtol * scale + atol:
            ok = False
            forward = (f_plus - f0) / STEP
            backward = (f0 - f_minus) / STEP
            if abs(forward - backward) > KINK_RTOL * max(abs(forward), abs(backward), atol):
                kinked = True
    return worst, ok, kinked


def _run(name, make_instance, instances, rtol, rng):
    worst = 0.0
    retries = 0
    passed = True
    done = 0
    while done < instances:
        f, x, grad = make_instance(rng)
        rel, ok, kinked = _compare(f, x, grad, rng, rtol)
        if not ok and kinked and retries < MAX_RETRIES:
            retries += 1
            continue
        worst = max(worst, rel)
        passed = passed and ok
        done += 1
    return CheckResult(name, instances, rtol, worst, retries, passed)


def _random_view(rng, distance=2.5):
    return ViewSpec(float(rng.uniform(0, 360)), float(rng.uniform(-30, 30)), distance)


def _convolve_instance(rng):
    h, w = (int(s) for s in rng.integers(5, 11, size=2))
    kernel = rng.normal(size=(3, 3)) if rng.random() < 0.5 else gaussian_kernel3(1.0)
    img = rng.normal(size=(h, w))
    up = rng.normal(size=(h, w))
    return (lambda x: float(np.sum(up * convolve_same(x, kernel))),
            img, convolve_same_pullback(img, kernel, up))


def _project_instance(rng):
    cloud = rng.uniform(-0.5, 0.5, size=(16, 3))
    view = _random_view(rng)
    intr = CameraIntrinsics()
    up = rng.normal(size=(16, 2))
    return (lambda x: float(np.sum(up * project(x, view, intr).uv)),
            cloud, project_pullback(cloud, view, intr, up))


def _splat_instance(rng):
    cfg = SplatConfig(sigma2=0.5, height=32, width=32)
    uv = rng.uniform(8, 24, size=(8, 2))
    up = rng.normal(size=cfg.shape)
    return (lambda x: float(np.sum(up * splat(x, cfg))), uv, splat_pullback(uv, cfg, up))


def _visual_instance(rng):
    cfg = VisualConfig()
    pts = rng.uniform(2, 10, size=(6, 2))
    img = splat(pts, SplatConfig(sigma2=1.0, height=12, width=12)) + 0.1 * rng.random((12, 12))
    up_e = rng.normal(size=img.shape)
    up_c = rng.normal(size=img.shape)
    scales = (_forward(img, cfg).maps.edge_scale, _forward(img, cfg).maps.corner_scale)

    def f(x):
        maps = _forward(x, cfg, scales).maps
        return float(np.sum(up_e * maps.edge) + np.sum(up_c * maps.corner))

    return f, img, visual_maps_pullback(img, cfg, up_e, up_c)


def _chamfer_instance(rng):
    a = rng.uniform(-0.5, 0.5, size=(20, 3))
    b = rng.uniform(-0.5, 0.5, size=(20, 3))
    return (lambda x: chamfer(x, b)[0]), a, chamfer(a, b)[1]


def _total_loss_instance(rng):
    gt = cube_surface(24, rng)
    pred = gt + rng.normal(0.0, 0.05, size=gt.shape)
    pool = default_pool()
    views = [pool[i] for i in rng.choice(len(pool), size=2, replace=False)]
    weights = LossWeights()
    cfg = RenderConfig()
    report, grad, scales = _evaluate(pred, gt, views, weights, cfg)

    def f(x):
        return _evaluate(x, gt, views, weights, cfg, pred_scales=scales, need_grad=False)[0].total

    return f, pred, grad


CHECKS = (
    ("convolve_same_pullback", _convolve_instance, 1e-5),
    ("project_pullback", _project_instance, 1e-5),
    ("splat_pullback", _splat_instance, 1e-5),
    ("visual_maps_pullback", _visual_instance, 1e-4),
    ("chamfer_gradient", _chamfer_instance, 1e-6),
    ("total_loss_gradient", _total_loss_instance, 1e-4),
)


def run_gradcheck(seed=0, instances=20, names=None):
    """Run the selected checks (all by default) from one seeded stream."""
    results = []
    for index, (name, make, rtol) in enumerate(CHECKS):
        if names is not None and name not in names:
            continue
        rng = np.random.default_rng([seed, index])
        results.append(_run(name, make, instances, rtol, rng))
    return results


def format_report(results):
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"gradcheck {'PASSED' if ok else 'FAILED'}")
    return "\n".join(lines) + "\n"
