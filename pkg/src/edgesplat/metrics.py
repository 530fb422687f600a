"""Evaluation-only metrics: exact EMD, ICP alignment, and the x100 report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .camera import as_cloud
from .errors import ParameterError
from .neighbors import nearest, squared_distances


def emd(a, b):
    """Minimum total Euclidean distance over bijections between equal-size clouds."""
    a = as_cloud(a, "a")
    b = as_cloud(b, "b")
    if len(a) != len(b):
        raise ParameterError(f"EMD needs equal sizes, got {len(a)} and {len(b)}")
    cost = np.sqrt(squared_distances(a[:, None, :], b[None, :, :]))
    rows, cols = linear_sum_assignment(cost)
    return math.fsum(cost[rows, cols])


def kabsch(src, dst):
    """Least-squares rotation and translation mapping ``src`` onto ``dst``.

    Returns ``(rotation, translation, degenerate)``. When the cross-covariance
    has rank below two the rotation is ill-defined; identity is used and
    ``degenerate`` is True.
    """
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    h = (src - mu_s).T @ (dst - mu_d)
    u, s, vt = np.linalg.svd(h)
    if s[0] <= 0 or s[1] <= 1e-12 * s[0]:
        rot = np.eye(3)
        degenerate = True
    else:
        d = np.sign(np.linalg.det(vt.T @ u.T))
        rot = vt.T @ np.diag([1.0, 1.0, d if d != 0 else 1.0]) @ u.T
        degenerate = False
    return rot, mu_d - rot @ mu_s, degenerate


@dataclass
class ICPResult:
    aligned: np.ndarray
    rotation: np.ndarray
    translation: np.ndarray
    # correspondence MSE measured at the start of each iteration
    mse_history: list = field(default_factory=list)
    degenerate_iterations: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.mse_history)


def icp_align(src, dst, max_iters=50, tol=1e-7):
    """Rigidly align ``src`` to ``dst`` by iterated nearest-neighbor matching.

    Stops after ``max_iters`` iterations or when the correspondence MSE
    improves by less than ``tol``. ``aligned == src @ rotation.T + translation``.
    """
    src = as_cloud(src, "src")
    dst = as_cloud(dst, "dst")
    tree = cKDTree(dst) if len(dst) > 64 else None
    rot = np.eye(3)
    trans = np.zeros(3)
    current = src.copy()
    result = ICPResult(current, rot, trans)
    previous = None
    for it in range(max_iters):
        idx, d2 = nearest(current, dst, tree)
        mse = math.fsum(d2) / len(d2)
        if result.mse_history:
            if mse > result.mse_history[-1]:
                # rounding-level regression at convergence: keep the better pose
                rot, trans, current = previous
                break
            if result.mse_history[-1] - mse < tol:
                result.mse_history.append(mse)
                break
        result.mse_history.append(mse)
        previous = (rot, trans, current)
        step_rot, step_trans, degenerate = kabsch(current, dst[idx])
        if degenerate:
            result.degenerate_iterations.append(it)
        rot = step_rot @ rot
        trans = step_rot @ trans + step_trans
        current = src @ rot.T + trans
    result.aligned = current
    result.rotation = rot
    result.translation = trans
    return result


def chamfer_mean(a, b):
    """Per-point Chamfer distance: mean squared NN distance in each direction, summed."""
    _, d_ab = nearest(a, b)
    _, d_ba = nearest(b, a)
    return math.fsum(d_ab) / len(d_ab) + math.fsum(d_ba) / len(d_ba)


def eval_metrics(pred, gt, max_iters=50, tol=1e-7):
    """ICP-align ``pred`` to ``gt``; return ``(100 * CD, 100 * EMD)`` per point."""
    pred = as_cloud(pred, "pred")
    gt = as_cloud(gt, "gt")
    aligned = icp_align(pred, gt, max_iters, tol).aligned
    cd = chamfer_mean(aligned, gt)
    em = emd(aligned, gt) / len(gt)
    return 100.0 * cd, 100.0 * em
