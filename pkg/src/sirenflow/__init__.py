"""Continuous space-time velocity fields from noisy voxel measurements.

Fits sinusoidal coordinate networks to time-resolved 3-directional velocity
grids, giving a smooth function of (x, y, z, t) usable for denoising,
arbitrary-resolution querying, and wall shear stress estimation. Ships a
synthetic measurement degradation pipeline, error metrics, and
interpolation baselines for evaluation.
"""

__version__ = "0.1.0"

from .baselines import GridInterpolator, Rbf4dInterpolator, litp_query
from .degrade import DegradationConfig, degrade, make_mask
from .errors import SirenflowError
from .estimators import SirenRegressor, fit_image, refined_grid_coords
from .grid import (
    NondimParams,
    SampleSet,
    VelocityImage,
    WallSurface,
    build_sample_set,
    nondimensionalize,
    sample_wall,
)
from .metrics import MetricsReport, compare, de, evaluate, mnrmse, vnrmse
from .optim import FitResult, fit, minimize
from .phantoms import GridSpec, SwirlPhantom, TubePhantom
from .siren import FitConfig, LossReport, SirenModel, forward, init_model, loss_and_grad
from .wss import WssConfig, WssField, wss_at, wss_field

__all__ = [
    "__version__",
    "DegradationConfig",
    "FitConfig",
    "FitResult",
    "GridInterpolator",
    "GridSpec",
    "LossReport",
    "MetricsReport",
    "NondimParams",
    "Rbf4dInterpolator",
    "SampleSet",
    "SirenModel",
    "SirenRegressor",
    "SirenflowError",
    "SwirlPhantom",
    "TubePhantom",
    "VelocityImage",
    "WallSurface",
    "WssConfig",
    "WssField",
    "build_sample_set",
    "compare",
    "de",
    "degrade",
    "evaluate",
    "fit",
    "fit_image",
    "forward",
    "init_model",
    "litp_query",
    "loss_and_grad",
    "make_mask",
    "minimize",
    "mnrmse",
    "nondimensionalize",
    "refined_grid_coords",
    "sample_wall",
    "vnrmse",
    "wss_at",
    "wss_field",
]
