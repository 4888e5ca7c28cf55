"""Reference reconstruction methods: grid interpolation and local 4D RBFs.

Both baselines follow the estimator convention (fit / predict / get_params)
and the sampler protocol (callable on (n, 4) physical coordinates), so they
slot into the same evaluation harness as the trained networks. Neither uses
any randomness.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from .errors import ConfigError, TooFewSamples
from .grid import VelocityImage
from .validation import as_coords4, as_vectors3


def litp_query(img: VelocityImage, coords, return_flags=False):
    """Multilinear interpolation (trilinear in space, linear in time).

    Exact at voxel centers and frame times. Out-of-bounds coordinates are
    clamped to the grid hull and flagged.
    """
    coords = as_coords4(coords, "query coords")
    (lo, hi), (t_lo, t_hi) = img.bounds()
    lo4 = np.concatenate([lo, [t_lo]])
    hi4 = np.concatenate([hi, [t_hi]])
    clamped = np.clip(coords, lo4, hi4)
    flags = np.any(coords != clamped, axis=1)

    axes = [img.origin[a] + img.spacing[a] * np.arange(img.dims[a]) for a in range(3)]
    times = img.times
    if img.n_frames == 1:
        interp = RegularGridInterpolator(axes, img.data[:, :, :, 0, :], method="linear")
        values = interp(clamped[:, :3])
    else:
        interp = RegularGridInterpolator(axes + [times], img.data, method="linear")
        values = interp(clamped)
    if return_flags:
        return values, flags
    return values


class GridInterpolator:
    """Sampler wrapper around :func:`litp_query` for a fixed image."""

    def __init__(self, img: VelocityImage | None = None):
        self.img = img

    def fit(self, img: VelocityImage):
        self.img = img
        return self

    def predict(self, coords):
        self._check_fitted()
        return litp_query(self.img, coords)

    def __call__(self, coords):
        return self.predict(coords)

    def velocity(self, points, t):
        points = np.asarray(points, dtype=np.float64)
        return self.predict(np.column_stack([points, np.full(len(points), float(t))]))

    def contains(self, points, t=None):
        self._check_fitted()
        points = np.asarray(points, dtype=np.float64)
        (lo, hi), (t_lo, t_hi) = self.img.bounds()
        inside = np.all((points >= lo) & (points <= hi), axis=1)
        if t is not None:
            inside &= (t_lo <= t) & (t <= t_hi)
        return inside

    def get_params(self, deep=True):
        return {"img": self.img}

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def _check_fitted(self):
        if self.img is None:
            raise ConfigError("GridInterpolator is not fitted; call fit(image) first")


class Rbf4dInterpolator:
    """Local multiquadric interpolation over scattered 4D samples.

    Each query gathers its k nearest samples in a scaled 4D metric (time
    multiplied so one frame step is commensurate with one voxel step) and
    solves the small multiquadric system phi(r) = sqrt(r^2 + c^2) augmented
    with a constant term, which the conditionally positive definite kernel
    requires and which makes constant fields reproduce exactly. Queries at
    sample points return the stored target. Near-singular local systems
    fall back to inverse-distance weighting and are flagged.
    """

    def __init__(self, k_neighbors=10, c_mq=None, include_wall_zeros=True, time_scale=None):
        self.k_neighbors = k_neighbors
        self.c_mq = c_mq
        self.include_wall_zeros = include_wall_zeros
        self.time_scale = time_scale

    def get_params(self, deep=True):
        return {
            "k_neighbors": self.k_neighbors,
            "c_mq": self.c_mq,
            "include_wall_zeros": self.include_wall_zeros,
            "time_scale": self.time_scale,
        }

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def fit(self, X, y, kinds=None):
        """Index scattered samples: X (n, 4) physical coords, y (n, 3) m/s.

        ``kinds`` (0 fluid, 1 wall) lets ``include_wall_zeros=False`` drop
        the soft no-slip rows. Exact duplicate coordinates are merged with
        averaged targets and counted in ``n_duplicates_``.
        """
        if self.k_neighbors < 4:
            raise ConfigError("k_neighbors must be >= 4")
        X = as_coords4(X, "X")
        y = as_vectors3(y, len(X), "y")
        if kinds is not None and not self.include_wall_zeros:
            keep = np.asarray(kinds) == 0
            X, y = X[keep], y[keep]
        if len(X) < self.k_neighbors:
            raise TooFewSamples(f"{len(X)} samples < k_neighbors={self.k_neighbors}")

        scale = self.time_scale if self.time_scale is not None else _default_time_scale(X)
        self.time_scale_ = scale
        scaled = X.copy()
        scaled[:, 3] *= scale

        scaled, y, self.n_duplicates_ = _merge_duplicates(scaled, y)
        if len(scaled) < self.k_neighbors:
            raise TooFewSamples(
                f"{len(scaled)} unique samples < k_neighbors={self.k_neighbors}"
            )
        self.points_ = scaled
        self.values_ = y
        self.tree_ = cKDTree(scaled)
        if self.c_mq is not None:
            self.c_mq_ = float(self.c_mq)
        else:
            # Mean nearest-neighbor spacing of the (scaled) cloud.
            d, _ = self.tree_.query(scaled, k=2)
            self.c_mq_ = float(np.mean(d[:, 1]))
            if self.c_mq_ <= 0.0:
                self.c_mq_ = 1.0
        return self

    def predict(self, coords, return_flags=False):
        self._check_fitted()
        coords = as_coords4(coords, "query coords")
        q = coords.copy()
        q[:, 3] *= self.time_scale_
        k = min(self.k_neighbors, len(self.points_))
        dist, idx = self.tree_.query(q, k=k)
        out = np.empty((len(q), 3))
        flags = np.zeros(len(q), dtype=bool)
        c2 = self.c_mq_**2
        for row in range(len(q)):
            nb = idx[row]
            pts = self.points_[nb]
            vals = self.values_[nb]
            diff = pts[:, None, :] - pts[None, :, :]
            a = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff) + c2)
            # Constant polynomial augmentation: [A 1; 1' 0].
            sys = np.empty((k + 1, k + 1))
            sys[:k, :k] = a
            sys[:k, k] = 1.0
            sys[k, :k] = 1.0
            sys[k, k] = 0.0
            rhs = np.vstack([vals, np.zeros(3)])
            phi_q = np.append(np.sqrt(dist[row] ** 2 + c2), 1.0)
            try:
                weights = np.linalg.solve(sys, rhs)
                pred = phi_q @ weights
                if not np.all(np.isfinite(pred)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                pred = _idw(dist[row], vals)
                flags[row] = True
            out[row] = pred
        if return_flags:
            return out, flags
        return out

    def __call__(self, coords):
        return self.predict(coords)

    def velocity(self, points, t):
        points = np.asarray(points, dtype=np.float64)
        return self.predict(np.column_stack([points, np.full(len(points), float(t))]))

    def _check_fitted(self):
        if not hasattr(self, "tree_"):
            raise ConfigError("Rbf4dInterpolator is not fitted; call fit(X, y) first")


def _default_time_scale(X):
    """mm per second such that one frame step spans about one voxel step."""
    times = np.unique(X[:, 3])
    if len(times) < 2:
        return 1.0
    dt = float(np.min(np.diff(times)))
    first = X[X[:, 3] == times[0], :3]
    if len(first) > 1:
        sample = first[: min(len(first), 2000)]
        tree = cKDTree(sample)
        d, _ = tree.query(sample, k=2)
        dx = float(np.median(d[:, 1]))
    else:
        dx = 1.0
    if dx <= 0.0 or dt <= 0.0:
        return 1.0
    return dx / dt


def _merge_duplicates(points, values, decimals=9):
    """Average targets over coincident sample coordinates (1e-9 rounding)."""
    key = np.round(points, decimals)
    uniq, inverse, counts = np.unique(
        key, axis=0, return_inverse=True, return_counts=True
    )
    n_dup = int(len(points) - len(uniq))
    if n_dup == 0:
        return points, values, 0
    merged = np.zeros((len(uniq), 3))
    np.add.at(merged, inverse, values)
    merged /= counts[:, None]
    return uniq, merged, n_dup


def _idw(dist, vals, eps=1e-12):
    w = 1.0 / np.maximum(dist, eps)
    return (w[:, None] * vals).sum(axis=0) / w.sum()
