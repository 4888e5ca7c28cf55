"""Voxel-grid and point-set containers plus training-set construction.

Conventions used throughout the package:

* spatial coordinates are in millimetres, time in seconds, velocity in m/s;
* a voxel with index (i, j, k) is centred at ``origin + (i, j, k) * spacing``;
* frame ``j`` is at time ``t_min + j * dt``;
* grid data is stored row-major over (row, col, slice, frame, component).

All containers are immutable after construction and safe to share across
threads; the operations below are pure functions.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DegenerateGrid,
    EmptyInput,
    FluidCoordOutsideMask,
    NotEnoughPoints,
)
from .validation import as_points3, as_vectors3, check_positive, check_unit_normals

DEFAULT_COORD_SCALE = 0.01


@dataclass(frozen=True)
class NondimParams:
    """Affine map taking physical (mm, s) coordinates to dimensionless ones.

    A point maps to ``(x - x_min) / dx * scale`` componentwise, and a time
    to ``(t - t_min) / dt * scale``.
    """

    x_min: np.ndarray  # (3,) mm
    t_min: float  # s
    dx: np.ndarray  # (3,) mm
    dt: float  # s
    scale: float = DEFAULT_COORD_SCALE

    def __post_init__(self):
        object.__setattr__(self, "x_min", np.asarray(self.x_min, dtype=np.float64))
        object.__setattr__(self, "dx", np.asarray(self.dx, dtype=np.float64))
        check_positive(self.dx, "dx")
        check_positive(self.dt, "dt")
        check_positive(self.scale, "scale")

    def normalize(self, points, times):
        """Map physical points (n, 3) and times (n,) to dimensionless coords (n, 4)."""
        points = np.asarray(points, dtype=np.float64)
        times = np.asarray(times, dtype=np.float64)
        xhat = (points - self.x_min) / self.dx * self.scale
        that = (times - self.t_min) / self.dt * self.scale
        return np.column_stack([xhat, that])

    def normalize4(self, coords):
        """Map physical (n, 4) coordinates (x, y, z in mm, t in s)."""
        coords = np.asarray(coords, dtype=np.float64)
        return self.normalize(coords[:, :3], coords[:, 3])

    def denormalize(self, coords):
        """Invert :meth:`normalize4`."""
        coords = np.asarray(coords, dtype=np.float64)
        points = coords[:, :3] / self.scale * self.dx + self.x_min
        times = coords[:, 3] / self.scale * self.dt + self.t_min
        return np.column_stack([points, times])

    def to_dict(self):
        return {
            "x_min_mm": [float(v) for v in self.x_min],
            "t_min_s": float(self.t_min),
            "dx_mm": [float(v) for v in self.dx],
            "dt_s": float(self.dt),
            "scale": float(self.scale),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            x_min=np.asarray(d["x_min_mm"], dtype=np.float64),
            t_min=float(d["t_min_s"]),
            dx=np.asarray(d["dx_mm"], dtype=np.float64),
            dt=float(d["dt_s"]),
            scale=float(d.get("scale", DEFAULT_COORD_SCALE)),
        )


def nondimensionalize(params: NondimParams, x, t):
    """Map one physical point (mm) and time (s) to dimensionless coordinates.

    Returns ``(xhat, that)`` with ``xhat`` an array of 3 floats.
    """
    x = np.asarray(x, dtype=np.float64)
    xhat = (x - params.x_min) / params.dx * params.scale
    that = (float(t) - params.t_min) / params.dt * params.scale
    return xhat, that


@dataclass(frozen=True)
class VelocityImage:
    """Time-resolved voxel grid of 3-vector velocities.

    ``data`` has shape (N_r, N_c, N_s, N_t, 3) in m/s. ``mask`` (optional)
    has shape (N_r, N_c, N_s, N_t); True marks fluid voxels.
    """

    data: np.ndarray
    spacing: np.ndarray  # (3,) mm
    dt: float  # s
    origin: np.ndarray  # (3,) mm
    t_min: float = 0.0
    mask: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 5 or data.shape[-1] != 3:
            raise DegenerateGrid(f"data must be (N_r, N_c, N_s, N_t, 3), got {data.shape}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", np.asarray(self.spacing, dtype=np.float64))
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        if self.spacing.shape != (3,) or self.origin.shape != (3,):
            raise DegenerateGrid("spacing and origin must have 3 components")
        check_positive(self.spacing, "spacing")
        check_positive(self.dt, "dt")
        if self.mask is not None:
            mask = np.ascontiguousarray(self.mask, dtype=bool)
            if mask.shape != data.shape[:4]:
                raise DegenerateGrid(
                    f"mask shape {mask.shape} does not match grid {data.shape[:4]}"
                )
            object.__setattr__(self, "mask", mask)

    @property
    def dims(self):
        return self.data.shape[:4]

    @property
    def n_frames(self):
        return self.data.shape[3]

    @property
    def times(self):
        return self.t_min + self.dt * np.arange(self.n_frames)

    def nondim_params(self, scale=DEFAULT_COORD_SCALE):
        return NondimParams(
            x_min=self.origin, t_min=self.t_min, dx=self.spacing, dt=self.dt, scale=scale
        )

    def spatial_mask(self):
        """Static fluid mask: voxels flagged fluid in every frame."""
        if self.mask is None:
            return np.ones(self.dims[:3], dtype=bool)
        return self.mask.all(axis=3)

    def voxel_centers(self, indices=None):
        """Physical centers (mm) of the given (n, 3) voxel indices, or all voxels."""
        if indices is None:
            nr, nc, ns = self.dims[:3]
            ii, jj, kk = np.meshgrid(
                np.arange(nr), np.arange(nc), np.arange(ns), indexing="ij"
            )
            indices = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()])
        return self.origin + np.asarray(indices, dtype=np.float64) * self.spacing

    def fluid_voxel_centers(self, fraction=1.0, seed=None):
        """Centers of fluid voxels, optionally subsampled without replacement."""
        idx = np.argwhere(self.spatial_mask())
        if fraction < 1.0:
            n_keep = max(1, int(round(fraction * len(idx))))
            rng = np.random.default_rng(seed)
            keep = rng.choice(len(idx), size=n_keep, replace=False)
            idx = idx[np.sort(keep)]
        return self.voxel_centers(idx)

    def bounds(self):
        """((x_lo, x_hi) per axis, (t_lo, t_hi)) of the voxel-center hull."""
        hi = self.origin + self.spacing * (np.array(self.dims[:3]) - 1)
        return (self.origin.copy(), hi), (self.t_min, self.t_min + self.dt * (self.n_frames - 1))

    def max_abs_velocity(self):
        """Per-axis maximum |v| over fluid voxels (all voxels when unmasked)."""
        if self.mask is not None:
            vals = self.data[self.mask]
            if vals.size == 0:
                return np.zeros(3)
            return np.abs(vals).max(axis=0)
        return np.abs(self.data).max(axis=(0, 1, 2, 3))


@dataclass(frozen=True)
class WallSurface:
    """Wall points with inward unit normals."""

    points: np.ndarray  # (n, 3) mm
    normals: np.ndarray  # (n, 3) inward, unit
    provenance: str = "analytic"  # analytic | file

    def __post_init__(self):
        points = as_points3(self.points, "wall points")
        normals = as_points3(self.normals, "wall normals")
        if len(points) != len(normals):
            raise ConfigError("wall points and normals differ in length")
        check_unit_normals(normals, "wall normals")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "normals", normals)

    def __len__(self):
        return len(self.points)


def sample_wall(surface: WallSurface, n: int, seed=None) -> WallSurface:
    """Uniform subsample of wall points without replacement, deterministic per seed."""
    if n > len(surface):
        raise NotEnoughPoints(f"requested {n} wall points, surface has {len(surface)}")
    if n == len(surface):
        return surface
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(surface), size=n, replace=False))
    if n == 0:
        return WallSurface(
            points=np.empty((0, 3)), normals=np.empty((0, 3)), provenance=surface.provenance
        )
    return WallSurface(
        points=surface.points[keep], normals=surface.normals[keep], provenance=surface.provenance
    )


FLUID = 0
WALL = 1


@dataclass(frozen=True)
class SampleSet:
    """Scattered training rows: dimensionless coordinates, targets, and kinds.

    ``kinds`` is 0 for fluid rows and 1 for wall rows; wall targets are
    identically zero.
    """

    coords: np.ndarray  # (n, 4) dimensionless
    targets: np.ndarray  # (n, 3) m/s
    kinds: np.ndarray  # (n,) uint8
    n_fluid: int
    n_wall: int
    n_times: int

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        targets = as_vectors3(self.targets, len(coords), "targets")
        kinds = np.ascontiguousarray(self.kinds, dtype=np.uint8)
        if coords.ndim != 2 or coords.shape[1] != 4:
            raise ConfigError(f"coords must be (n, 4), got {coords.shape}")
        if kinds.shape != (len(coords),):
            raise ConfigError("kinds length mismatch")
        wall_rows = kinds == WALL
        if wall_rows.any() and np.any(targets[wall_rows] != 0.0):
            raise ConfigError("wall rows must have zero targets")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "kinds", kinds)

    def __len__(self):
        return len(self.coords)

    @classmethod
    def from_rows(cls, coords, targets, kinds, n_times):
        kinds = np.asarray(kinds, dtype=np.uint8)
        n_wall_rows = int((kinds == WALL).sum())
        n_fluid_rows = len(kinds) - n_wall_rows
        return cls(
            coords=coords,
            targets=targets,
            kinds=kinds,
            n_fluid=n_fluid_rows // max(n_times, 1),
            n_wall=n_wall_rows // max(n_times, 1),
            n_times=n_times,
        )


def _voxel_indices(img: VelocityImage, points):
    """Nearest voxel index of each physical point; None entries fall off-grid."""
    rel = (np.asarray(points, dtype=np.float64) - img.origin) / img.spacing
    idx = np.rint(rel).astype(np.int64)
    dims = np.asarray(img.dims[:3])
    inside = np.all((idx >= 0) & (idx < dims), axis=1)
    return idx, inside


def build_sample_set(
    img: VelocityImage,
    fluid_coords,
    wall: WallSurface,
    params: NondimParams | None = None,
) -> SampleSet:
    """Assemble the training set: fluid rows with measured targets over every
    frame plus wall rows with zero targets over every frame.

    ``fluid_coords`` must sit at voxel centers flagged fluid in the image
    mask. Output has ``(N_f + N_w) * N_t`` rows, coordinates already
    non-dimensionalized with ``params`` (defaults to the image's own grid
    parameters).
    """
    fluid_coords = as_points3(fluid_coords, "fluid coordinates")
    if len(fluid_coords) == 0 or len(wall) == 0:
        raise EmptyInput("need at least one fluid coordinate and one wall point")
    if params is None:
        params = img.nondim_params()

    idx, inside = _voxel_indices(img, fluid_coords)
    if not inside.all():
        bad = fluid_coords[~inside][0]
        raise FluidCoordOutsideMask(f"fluid coordinate {bad} falls outside the grid")
    smask = img.spatial_mask()
    flagged = smask[idx[:, 0], idx[:, 1], idx[:, 2]]
    if not flagged.all():
        bad = fluid_coords[~flagged][0]
        raise FluidCoordOutsideMask(f"fluid coordinate {bad} indexes a non-fluid voxel")

    times = img.times
    n_f, n_w, n_t = len(fluid_coords), len(wall), img.n_frames

    # Fluid block: each spatial point repeated over all frames.
    fluid_xyz = np.repeat(fluid_coords, n_t, axis=0)
    fluid_t = np.tile(times, n_f)
    fluid_targets = img.data[idx[:, 0], idx[:, 1], idx[:, 2], :, :].reshape(-1, 3)

    wall_xyz = np.repeat(wall.points, n_t, axis=0)
    wall_t = np.tile(times, n_w)
    wall_targets = np.zeros((n_w * n_t, 3))

    coords = params.normalize(
        np.vstack([fluid_xyz, wall_xyz]), np.concatenate([fluid_t, wall_t])
    )
    targets = np.vstack([fluid_targets, wall_targets])
    kinds = np.concatenate(
        [np.full(n_f * n_t, FLUID, dtype=np.uint8), np.full(n_w * n_t, WALL, dtype=np.uint8)]
    )
    return SampleSet(
        coords=coords, targets=targets, kinds=kinds, n_fluid=n_f, n_wall=n_w, n_times=n_t
    )


def scattered_from_image(img: VelocityImage, fluid_coords=None):
    """Physical 4D training tuples for scattered-data baselines.

    Returns ``(coords4, targets)`` with coords in (mm, mm, mm, s), one row
    per (fluid voxel, frame).
    """
    if fluid_coords is None:
        fluid_coords = img.fluid_voxel_centers()
    fluid_coords = as_points3(fluid_coords, "fluid coordinates")
    if len(fluid_coords) == 0:
        raise EmptyInput("no fluid coordinates")
    idx, inside = _voxel_indices(img, fluid_coords)
    if not inside.all():
        raise FluidCoordOutsideMask("a fluid coordinate falls outside the grid")
    times = img.times
    n_f, n_t = len(fluid_coords), img.n_frames
    xyz = np.repeat(fluid_coords, n_t, axis=0)
    tt = np.tile(times, n_f)
    targets = img.data[idx[:, 0], idx[:, 1], idx[:, 2], :, :].reshape(-1, 3)
    return np.column_stack([xyz, tt]), targets


def wall_rows_physical(wall: WallSurface, times):
    """Physical 4D zero-velocity rows for soft no-slip baselines."""
    times = np.asarray(times, dtype=np.float64)
    n_w, n_t = len(wall), len(times)
    xyz = np.repeat(wall.points, n_t, axis=0)
    tt = np.tile(times, n_w)
    return np.column_stack([xyz, tt]), np.zeros((n_w * n_t, 3))
