"""Differentiable point-cloud splatting with edge/corner-aware losses."""

from .camera import (
    CameraIntrinsics,
    PixelCoords,
    ViewSpec,
    default_pool,
    normalize_cloud,
    project,
    project_pullback,
    rotation_from_view,
    sample_views,
)
from .fit import AdamState, FitConfig, FitTrace, adam_step, fit
from .losses import (
    LossReport,
    LossWeights,
    RenderConfig,
    chamfer,
    edge_corner_loss,
    render_maps,
    target_maps,
    total_loss,
)
from .metrics import emd, eval_metrics, icp_align
from .raster import (
    convolve_same,
    convolve_same_pullback,
    gaussian_derivative_kernels3,
    gaussian_kernel3,
)
from .splat import SplatConfig, splat, splat_pullback
from .visual import (
    EdgeCornerMaps,
    VisualConfig,
    corner_map,
    edge_map,
    normalize_and_suppress,
    sobel_edges,
    suppress,
    visual_maps,
    visual_maps_pullback,
)

__version__ = "0.1.0"
