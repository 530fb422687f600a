"""Direct optimization of point coordinates against multi-view edge/corner targets."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .camera import as_cloud, sample_views
from .errors import DimensionError, NonFiniteLossError, ParameterError
from .losses import LossWeights, RenderConfig, target_maps, total_loss

# rate used for network weights in the original training setup
NETWORK_LEARNING_RATE = 0.00005


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    views_per_step: int = 4
    phase1_steps: int = 2000
    phase2_steps: int = 500
    weights_phase1: LossWeights = field(default_factory=lambda: LossWeights(20.0, 10.0))
    weights_phase2: LossWeights = field(default_factory=lambda: LossWeights(2.0, 0.2))
    seed: int = 0
    snapshot_every: int = 0  # 0 disables snapshots

    def __post_init__(self):
        if not (np.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ParameterError(f"learning_rate must be positive, got {self.learning_rate!r}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")
        if not self.adam_eps > 0:
            raise ParameterError("adam_eps must be positive")
        if self.views_per_step < 1:
            raise ParameterError("views_per_step must be positive")
        if self.phase1_steps < 1 or self.phase2_steps < 0:
            raise ParameterError("phase1_steps must be positive and phase2_steps non-negative")
        if self.snapshot_every < 0:
            raise ParameterError("snapshot_every must be non-negative")

    @property
    def total_steps(self):
        return self.phase1_steps + self.phase2_steps

    def weights_at(self, step):
        return self.weights_phase1 if step < self.phase1_steps else self.weights_phase2


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(params, grad, state, cfg):
    """One bias-corrected Adam update. Returns ``(new_params, new_state)``."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not (params.shape == grad.shape == state.m.shape == state.v.shape):
        raise DimensionError(
            f"params {params.shape}, grad {grad.shape}, moments {state.m.shape}/{state.v.shape} differ"
        )
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grad * grad)
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    new_params = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return new_params, AdamState(m, v, t)


@dataclass
class FitTrace:
    history: list = field(default_factory=list)  # LossReport per step
    step_seconds: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # step -> cloud before that step's update
    bounds: list = field(default_factory=list)  # (min xyz, max xyz) per step

    def __len__(self):
        return len(self.history)

    def records(self):
        """Line-oriented records ``{step, cd, edge, corner, total}``."""
        return [{"step": i, **r.as_record()} for i, r in enumerate(self.history)]


def fit(initial, target, pool, cfg=FitConfig(), render=RenderConfig(), on_step=None):
    """Fit ``initial``'s coordinates to ``target`` with the two-phase weight schedule.

    Every step draws ``views_per_step`` distinct views from ``pool`` using one
    generator seeded by ``cfg.seed``. Returns ``(fitted_cloud, trace)``.
    """
    cloud = as_cloud(initial, "initial").copy()
    target = as_cloud(target, "target")
    pool = list(pool)
    if len(pool) < cfg.views_per_step:
        raise ParameterError(f"pool of {len(pool)} views is smaller than views_per_step")
    rng = np.random.default_rng(cfg.seed)
    gt_maps = target_maps(target, pool, render)
    state = AdamState.zeros(cloud.size)
    trace = FitTrace()

    for step in range(cfg.total_steps):
        started = time.perf_counter()
        views = sample_views(pool, cfg.views_per_step, rng)
        report, grad = total_loss(cloud, target, views, cfg.weights_at(step), render, gt_maps)
        for term in ("cd", "edge", "corner", "total"):
            value = getattr(report, term)
            if not math.isfinite(value):
                raise NonFiniteLossError(step, term, value)
        if cfg.snapshot_every and step % cfg.snapshot_every == 0:
            trace.snapshots[step] = cloud.copy()
        trace.history.append(report)
        trace.bounds.append((cloud.min(axis=0), cloud.max(axis=0)))
        flat, state = adam_step(cloud.ravel(), grad.ravel(), state, cfg)
        cloud = flat.reshape(cloud.shape)
        trace.step_seconds.append(time.perf_counter() - started)
        if on_step is not None:
            on_step(step, report)
    return cloud, trace
