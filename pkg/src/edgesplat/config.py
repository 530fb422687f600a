"""Run configuration: a flat ``key = value`` text file.

Keys carry their units (``splat.sigma2_px2``, ``camera.distance_units``).
Lists are comma separated. ``#`` starts a comment. Unknown or repeated keys
are rejected, and every value is re-validated by the component configs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .camera import DEFAULT_AZIMUTHS, DEFAULT_ELEVATIONS, CameraIntrinsics, ViewSpec, angle_pool
from .errors import ConfigError
from .fit import FitConfig
from .losses import LossWeights, RenderConfig
from .splat import SplatConfig
from .visual import VisualConfig


@dataclass(frozen=True)
class RunConfig:
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    distance: float = 2.5
    splat: SplatConfig = field(default_factory=SplatConfig)
    visual: VisualConfig = field(default_factory=VisualConfig)
    azimuths: tuple = DEFAULT_AZIMUTHS
    elevations: tuple = DEFAULT_ELEVATIONS
    fit: FitConfig = field(default_factory=FitConfig)
    initial_path: str = ""
    target_path: str = ""
    output_path: str = ""
    trace_path: str = ""
    seed: int = 0

    def __post_init__(self):
        if not self.distance > 0:
            raise ConfigError(f"camera distance must be positive, got {self.distance!r}")

    @property
    def render(self):
        return RenderConfig(self.intrinsics, self.splat, self.visual)

    def pool(self):
        return angle_pool(self.azimuths, self.elevations, self.distance)

    def view(self, azimuth=0.0, elevation=0.0):
        return ViewSpec(float(azimuth), float(elevation), self.distance)

    def fit_config(self):
        return dataclasses.replace(self.fit, seed=self.seed)


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _fmt_list(values):
    return ",".join(repr(float(v)) for v in values)


def _opt_float(text):
    return None if text.strip().lower() in ("auto", "none", "") else float(text)


# key -> (parser, formatter)
_KEYS = {
    "camera.fx_px": (float, repr),
    "camera.fy_px": (float, repr),
    "camera.cx_px": (float, repr),
    "camera.cy_px": (float, repr),
    "camera.distance_units": (float, repr),
    "image.height_px": (int, str),
    "image.width_px": (int, str),
    "splat.sigma2_px2": (float, repr),
    "splat.truncation_radius_px": (_opt_float, lambda v: "auto" if v is None else repr(v)),
    "visual.kernel_sigma_px": (float, repr),
    "visual.window_sigma_px": (float, repr),
    "visual.eps": (float, repr),
    "views.azimuths_deg": (_float_list, _fmt_list),
    "views.elevations_deg": (_float_list, _fmt_list),
    "loss.phase1.lambda1": (float, repr),
    "loss.phase1.lambda2": (float, repr),
    "loss.phase2.lambda1": (float, repr),
    "loss.phase2.lambda2": (float, repr),
    "fit.learning_rate": (float, repr),
    "fit.beta1": (float, repr),
    "fit.beta2": (float, repr),
    "fit.adam_eps": (float, repr),
    "fit.views_per_step": (int, str),
    "fit.phase1_steps": (int, str),
    "fit.phase2_steps": (int, str),
    "fit.snapshot_every": (int, str),
    "io.initial_path": (str, str),
    "io.target_path": (str, str),
    "io.output_path": (str, str),
    "io.trace_path": (str, str),
    "seed": (int, str),
}


def to_values(cfg):
    """Flatten a :class:`RunConfig` into ``{key: python value}``."""
    i, s, v, f = cfg.intrinsics, cfg.splat, cfg.visual, cfg.fit
    return {
        "camera.fx_px": i.fx,
        "camera.fy_px": i.fy,
        "camera.cx_px": i.cx,
        "camera.cy_px": i.cy,
        "camera.distance_units": cfg.distance,
        "image.height_px": s.height,
        "image.width_px": s.width,
        "splat.sigma2_px2": s.sigma2,
        "splat.truncation_radius_px": s.truncation_radius,
        "visual.kernel_sigma_px": v.kernel_sigma,
        "visual.window_sigma_px": v.window_sigma,
        "visual.eps": v.eps,
        "views.azimuths_deg": tuple(cfg.azimuths),
        "views.elevations_deg": tuple(cfg.elevations),
        "loss.phase1.lambda1": f.weights_phase1.lambda1,
        "loss.phase1.lambda2": f.weights_phase1.lambda2,
        "loss.phase2.lambda1": f.weights_phase2.lambda1,
        "loss.phase2.lambda2": f.weights_phase2.lambda2,
        "fit.learning_rate": f.learning_rate,
        "fit.beta1": f.beta1,
        "fit.beta2": f.beta2,
        "fit.adam_eps": f.adam_eps,
        "fit.views_per_step": f.views_per_step,
        "fit.phase1_steps": f.phase1_steps,
        "fit.phase2_steps": f.phase2_steps,
        "fit.snapshot_every": f.snapshot_every,
        "io.initial_path": cfg.initial_path,
        "io.target_path": cfg.target_path,
        "io.output_path": cfg.output_path,
        "io.trace_path": cfg.trace_path,
        "seed": cfg.seed,
    }


def from_values(values):
    """Build a validated :class:`RunConfig` from a (possibly partial) key map."""
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    merged = to_values(RunConfig())
    merged.update(values)
    g = merged.__getitem__
    try:
        if not g("views.azimuths_deg") or not g("views.elevations_deg"):
            raise ConfigError("angle pool needs at least one azimuth and one elevation")
        return RunConfig(
            intrinsics=CameraIntrinsics(g("camera.fx_px"), g("camera.fy_px"),
                                        g("camera.cx_px"), g("camera.cy_px")),
            distance=g("camera.distance_units"),
            splat=SplatConfig(g("splat.sigma2_px2"), g("image.height_px"),
                              g("image.width_px"), g("splat.truncation_radius_px")),
            visual=VisualConfig(g("visual.kernel_sigma_px"), g("visual.window_sigma_px"),
                                g("visual.eps")),
            azimuths=tuple(g("views.azimuths_deg")),
            elevations=tuple(g("views.elevations_deg")),
            fit=FitConfig(
                learning_rate=g("fit.learning_rate"),
                beta1=g("fit.beta1"),
                beta2=g("fit.beta2"),
                adam_eps=g("fit.adam_eps"),
                views_per_step=g("fit.views_per_step"),
                phase1_steps=g("fit.phase1_steps"),
                phase2_steps=g("fit.phase2_steps"),
                weights_phase1=LossWeights(g("loss.phase1.lambda1"), g("loss.phase1.lambda2")),
                weights_phase2=LossWeights(g("loss.phase2.lambda1"), g("loss.phase2.lambda2")),
                seed=g("seed"),
                snapshot_every=g("fit.snapshot_every"),
            ),
            initial_path=g("io.initial_path"),
            target_path=g("io.target_path"),
            output_path=g("io.output_path"),
            trace_path=g("io.trace_path"),
            seed=g("seed"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text, source="<config>"):
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key][0](raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return from_values(values)


def serialize_config(cfg):
    values = to_values(cfg)
    return "".join(f"{key} = {_KEYS[key][1](values[key])}\n" for key in _KEYS)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
