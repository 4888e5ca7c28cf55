"""Estimator-style front end for training and querying the coordinate network.

``SirenRegressor`` follows the fit/predict/get_params convention so the
model composes with generic tooling: X is an (n, 4) array of physical
coordinates (mm, mm, mm, s), y an (n, 3) array of velocities (m/s). The
image-level helper :func:`fit_image` assembles the training set from a
measured grid plus a wall surface (balancing wall against fluid counts)
and returns a fitted regressor.
"""

import numpy as np

from .errors import ConfigError
from .grid import (
    FLUID,
    WALL,
    NondimParams,
    SampleSet,
    VelocityImage,
    WallSurface,
    build_sample_set,
    sample_wall,
)
from .optim import fit as _fit
from .siren import FitConfig, init_model
from .validation import as_coords4, as_vectors3


class SirenRegressor:
    """Continuous velocity-field regressor backed by a sinusoidal network."""

    def __init__(
        self,
        depth=4,
        width=64,
        omega0=30.0,
        seed=0,
        max_iterations=2000,
        tolerance=1e-8,
        history_size=10,
        mean_loss=False,
    ):
        self.depth = depth
        self.width = width
        self.omega0 = omega0
        self.seed = seed
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.history_size = history_size
        self.mean_loss = mean_loss

    def get_params(self, deep=True):
        return {
            "depth": self.depth,
            "width": self.width,
            "omega0": self.omega0,
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
            "history_size": self.history_size,
            "mean_loss": self.mean_loss,
        }

    def set_params(self, **params):
        for key, value in params.items():
            if key not in self.get_params():
                raise ConfigError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _config(self):
        return FitConfig(
            depth=self.depth,
            width=self.width,
            omega0=self.omega0,
            seed=self.seed,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            history_size=self.history_size,
            mean_loss=self.mean_loss,
        )

    def fit(self, X, y, kinds=None, nondim=None):
        """Train on scattered physical samples.

        ``kinds`` marks wall rows (zero velocity) as 1; default all fluid.
        ``nondim`` fixes the coordinate normalization; when omitted it is
        derived from the data extent (grid-derived parameters are better
        when available, see :func:`fit_image`).
        """
        X = as_coords4(X, "X")
        y = as_vectors3(y, len(X), "y")
        if kinds is None:
            kinds = np.full(len(X), FLUID, dtype=np.uint8)
        if nondim is None:
            nondim = _nondim_from_data(X)
        samples = SampleSet.from_rows(
            coords=nondim.normalize4(X),
            targets=y,
            kinds=kinds,
            n_times=len(np.unique(X[:, 3])),
        )
        return self.fit_samples(samples, nondim)

    def fit_samples(self, samples: SampleSet, nondim: NondimParams):
        """Train on an already-normalized sample set."""
        cfg = self._config()
        result = _fit(init_model(cfg, nondim), samples, cfg)
        self.model_ = result.model
        self.result_ = result
        self.history_ = result.history
        return self

    def predict(self, X):
        self._check_fitted()
        return self.model_.predict(as_coords4(X, "X"))

    def __call__(self, coords):
        return self.predict(coords)

    def velocity(self, points, t):
        self._check_fitted()
        return self.model_.velocity(points, t)

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ConfigError("SirenRegressor is not fitted")


def _nondim_from_data(X):
    """Fallback normalization from the data extent: one step per distinct value."""
    x_min = X[:, :3].min(axis=0)
    t_min = float(X[:, 3].min())
    dx = np.empty(3)
    for a in range(3):
        vals = np.unique(X[:, a])
        dx[a] = np.min(np.diff(vals)) if len(vals) > 1 else 1.0
    tvals = np.unique(X[:, 3])
    dt = float(np.min(np.diff(tvals))) if len(tvals) > 1 else 1.0
    return NondimParams(x_min=x_min, t_min=t_min, dx=dx, dt=dt)


def fit_image(
    img: VelocityImage,
    wall: WallSurface,
    regressor: SirenRegressor | None = None,
    fluid_fraction=1.0,
    wall_count=None,
    seed=0,
    **params,
) -> SirenRegressor:
    """Fit a regressor to a measured image with no-slip wall samples.

    Fluid voxels come from the image mask (optionally subsampled); wall
    points are drawn without replacement to roughly match the fluid count.
    Deterministic per ``seed`` (which also seeds the network unless the
    regressor sets its own).
    """
    if regressor is None:
        regressor = SirenRegressor(seed=seed, **params)
    elif params:
        regressor.set_params(**params)
    seeds = np.random.SeedSequence(seed).spawn(2)
    fluid_coords = img.fluid_voxel_centers(fraction=fluid_fraction, seed=seeds[0])
    if wall_count is None:
        wall_count = min(len(wall), len(fluid_coords))
    wall_sub = sample_wall(wall, wall_count, seed=seeds[1])
    samples = build_sample_set(img, fluid_coords, wall_sub, img.nondim_params())
    return regressor.fit_samples(samples, img.nondim_params())


def refined_grid_coords(img: VelocityImage, space_factor=20, time_factor=10, max_points=None):
    """Evaluation coordinates on a refined grid spanning the image hull.

    Spatial steps shrink by ``space_factor`` and temporal steps by
    ``time_factor`` relative to the image; the refined grid spans the same
    voxel-center hull. Returns (coords (n, 4), grid_shape).
    """
    if space_factor < 1 or time_factor < 1:
        raise ConfigError("refinement factors must be >= 1")
    dims = img.dims
    shape = tuple(int((n - 1) * space_factor + 1) for n in dims[:3]) + (
        int((dims[3] - 1) * time_factor + 1),
    )
    total = int(np.prod(shape))
    if max_points is not None and total > max_points:
        raise ConfigError(
            f"refined grid has {total} points, above the limit {max_points}; "
            "lower the refinement factors or raise --max-points"
        )
    axes = [
        img.origin[a] + np.arange(shape[a]) * img.spacing[a] / space_factor for a in range(3)
    ]
    taxis = img.t_min + np.arange(shape[3]) * img.dt / time_factor
    ii, jj, kk, tt = np.meshgrid(*axes, taxis, indexing="ij")
    coords = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel(), tt.ravel()])
    return coords, shape
