"""Analytic ground-truth flow fields.

Two phantoms stand in for high-resolution reference data: a pulsatile
rigid-tube field with a parabolic cross-section, and a divergence-free
swirling field (solid-body-style rotating core under a Gaussian envelope).
Both are exact, queryable at any (x, t), and expose the wall geometry and
peak speeds needed to configure downstream steps.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSpec
from .grid import VelocityImage, WallSurface
from .validation import as_points3


@dataclass(frozen=True)
class GridSpec:
    """Target Cartesian grid: dims (3,), spacing mm (3,), origin mm (3,)."""

    dims: tuple
    spacing: tuple
    origin: tuple

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise BadSpec(f"dims must be 3 positive ints, got {self.dims}")
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise BadSpec(f"spacing must be 3 positive floats, got {self.spacing}")
        if len(self.origin) != 3:
            raise BadSpec("origin must have 3 components")

    def centers(self):
        """All voxel centers, shape (prod(dims), 3), row-major."""
        axes = [
            self.origin[a] + self.spacing[a] * np.arange(self.dims[a]) for a in range(3)
        ]
        ii, jj, kk = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()])


class Phantom:
    """Common sampling machinery; subclasses define velocity() and contains()."""

    def velocity(self, points, t):
        raise NotImplementedError

    def contains(self, points, t=None):
        raise NotImplementedError

    def max_speed(self):
        raise NotImplementedError

    def __call__(self, coords4):
        """Evaluate at (n, 4) physical coordinates with per-row times."""
        coords4 = np.asarray(coords4, dtype=np.float64)
        out = np.empty((len(coords4), 3))
        for t in np.unique(coords4[:, 3]):
            rows = coords4[:, 3] == t
            out[rows] = self.velocity(coords4[rows, :3], float(t))
        return out

    def image(self, grid: GridSpec, times, mask_fluid=True) -> VelocityImage:
        """Sample the phantom onto a grid; exact at voxel centers."""
        times = np.asarray(times, dtype=np.float64)
        if times.size < 1:
            raise BadSpec("need at least one time frame")
        dt = float(times[1] - times[0]) if times.size > 1 else 1.0
        if times.size > 1 and not np.allclose(np.diff(times), dt):
            raise BadSpec("time frames must be uniformly spaced")
        centers = grid.centers()
        data = np.empty((*grid.dims, times.size, 3))
        for j, t in enumerate(times):
            data[..., j, :] = self.velocity(centers, float(t)).reshape(*grid.dims, 3)
        mask = None
        if mask_fluid:
            inside = self.contains(centers).reshape(grid.dims)
            mask = np.repeat(inside[..., None], times.size, axis=3)
            data[~mask] = 0.0
        return VelocityImage(
            data=data,
            spacing=np.asarray(grid.spacing, dtype=np.float64),
            dt=dt,
            origin=np.asarray(grid.origin, dtype=np.float64),
            t_min=float(times[0]),
            mask=mask,
        )


def pulse_waveform(t, period, offset):
    """Smooth pulsatile modulation in [offset, 1], peaking at period/2."""
    return offset + (1.0 - offset) * 0.5 * (1.0 - np.cos(2.0 * np.pi * np.asarray(t) / period))


@dataclass(frozen=True)
class TubePhantom(Phantom):
    """Pulsatile parabolic flow along z in a rigid tube of radius R.

    v_z(r, t) = V(t) (1 - r^2 / R^2) inside the tube, zero outside, with
    V(t) = v_max * pulse(t). ``axial_modulation`` (default off) multiplies
    the profile by 1 + m sin(2 pi z / length), giving the wall shear a
    spatial pattern while keeping the radial profile exactly quadratic.
    """

    radius: float = 8.0  # mm
    length: float = 32.0  # mm, z in [0, length)
    center: tuple = (0.0, 0.0)  # tube axis (x, y) mm
    v_max: float = 1.0  # m/s, peak centerline speed
    period: float = 0.2  # s
    offset: float = 0.2  # waveform floor as a fraction of v_max
    axial_modulation: float = 0.0

    def __post_init__(self):
        if self.radius <= 0 or self.length <= 0 or self.period <= 0:
            raise BadSpec("radius, length, and period must be positive")
        if not (0.0 <= self.offset < 1.0):
            raise BadSpec("offset must be in [0, 1)")
        if self.axial_modulation < 0 or self.axial_modulation >= 1.0:
            raise BadSpec("axial_modulation must be in [0, 1)")

    def peak_time(self):
        return self.period / 2.0

    def waveform(self, t):
        return self.v_max * pulse_waveform(t, self.period, self.offset)

    def _axial(self, z):
        if self.axial_modulation == 0.0:
            return np.ones_like(z)
        return 1.0 + self.axial_modulation * np.sin(2.0 * np.pi * z / self.length)

    def velocity(self, points, t):
        points = as_points3(points)
        dx = points[:, 0] - self.center[0]
        dy = points[:, 1] - self.center[1]
        r2 = dx * dx + dy * dy
        vz = self.waveform(t) * self._axial(points[:, 2]) * (1.0 - r2 / self.radius**2)
        vz = np.where(r2 <= self.radius**2, vz, 0.0)
        out = np.zeros((len(points), 3))
        out[:, 2] = vz
        return out

    def contains(self, points, t=None):
        points = as_points3(points)
        dx = points[:, 0] - self.center[0]
        dy = points[:, 1] - self.center[1]
        return dx * dx + dy * dy <= self.radius**2

    def max_speed(self):
        return self.v_max * (1.0 + self.axial_modulation)

    def wall_surface(self, n_circumference=64, n_axial=33) -> WallSurface:
        """Ring lattice on r = R with exact inward (radially inward) normals."""
        theta = 2.0 * np.pi * np.arange(n_circumference) / n_circumference
        zs = np.linspace(0.0, self.length, n_axial)
        tt, zz = np.meshgrid(theta, zs, indexing="ij")
        tt, zz = tt.ravel(), zz.ravel()
        points = np.column_stack(
            [
                self.center[0] + self.radius * np.cos(tt),
                self.center[1] + self.radius * np.sin(tt),
                zz,
            ]
        )
        normals = np.column_stack([-np.cos(tt), -np.sin(tt), np.zeros_like(tt)])
        return WallSurface(points=points, normals=normals, provenance="analytic")

    def wall_shear_magnitude(self, z, t, mu):
        """Exact wall shear magnitude mu * dv/dy at y=0: 2 mu V(t) a(z) / R."""
        return 2.0 * mu * self.waveform(t) * self._axial(np.asarray(z)) / (self.radius * 1e-3)

    def to_dict(self):
        return {
            "kind": "tube",
            "radius_mm": self.radius,
            "length_mm": self.length,
            "center_mm": list(self.center),
            "v_max": self.v_max,
            "period_s": self.period,
            "offset": self.offset,
            "axial_modulation": self.axial_modulation,
        }


@dataclass(frozen=True)
class SwirlPhantom(Phantom):
    """Divergence-free rotation about the z axis under a Gaussian envelope.

    u = W(t) g(r) (-y, x, 0) with g(r) = omega * exp(-r^2 / (2 sigma^2));
    any radial profile of this form has exactly zero divergence. Peak speed
    omega * sigma * exp(-1/2) at r = sigma.
    """

    omega: float = 0.12  # 1/s-style angular scale (per mm of radius)
    sigma: float = 6.0  # mm
    center: tuple = (0.0, 0.0)
    period: float = 0.2  # s
    offset: float = 0.2

    def __post_init__(self):
        if self.omega <= 0 or self.sigma <= 0 or self.period <= 0:
            raise BadSpec("omega, sigma, and period must be positive")

    def waveform(self, t):
        return pulse_waveform(t, self.period, self.offset)

    def velocity(self, points, t):
        points = as_points3(points)
        dx = points[:, 0] - self.center[0]
        dy = points[:, 1] - self.center[1]
        r2 = dx * dx + dy * dy
        g = self.omega * np.exp(-r2 / (2.0 * self.sigma**2)) * self.waveform(t)
        out = np.zeros((len(points), 3))
        out[:, 0] = -dy * g
        out[:, 1] = dx * g
        return out

    def contains(self, points, t=None):
        return np.ones(len(as_points3(points)), dtype=bool)

    def max_speed(self):
        return self.omega * self.sigma * math.exp(-0.5)

    def to_dict(self):
        return {
            "kind": "swirl",
            "omega": self.omega,
            "sigma_mm": self.sigma,
            "center_mm": list(self.center),
            "period_s": self.period,
            "offset": self.offset,
        }


def phantom_from_dict(d) -> Phantom:
    kind = d.get("kind")
    if kind == "tube":
        return TubePhantom(
            radius=float(d.get("radius_mm", 8.0)),
            length=float(d.get("length_mm", 32.0)),
            center=tuple(d.get("center_mm", (0.0, 0.0))),
            v_max=float(d.get("v_max", 1.0)),
            period=float(d.get("period_s", 0.2)),
            offset=float(d.get("offset", 0.2)),
            axial_modulation=float(d.get("axial_modulation", 0.0)),
        )
    if kind == "swirl":
        return SwirlPhantom(
            omega=float(d.get("omega", 0.12)),
            sigma=float(d.get("sigma_mm", 6.0)),
            center=tuple(d.get("center_mm", (0.0, 0.0))),
            period=float(d.get("period_s", 0.2)),
            offset=float(d.get("offset", 0.2)),
        )
    raise BadSpec(f"unknown phantom kind {kind!r}")


def default_grid_for(phantom: Phantom, spacing=1.0, padding=4.0) -> GridSpec:
    """A grid that covers the phantom's interesting region with even dims."""
    spacing3 = (float(spacing),) * 3
    if isinstance(phantom, TubePhantom):
        half = phantom.radius + padding
        nx = _even(2 * half / spacing)
        nz = _even(phantom.length / spacing)
        ox = phantom.center[0] - (nx - 1) * spacing / 2.0
        oy = phantom.center[1] - (nx - 1) * spacing / 2.0
        return GridSpec(dims=(nx, nx, nz), spacing=spacing3, origin=(ox, oy, 0.0))
    if isinstance(phantom, SwirlPhantom):
        half = 3.0 * phantom.sigma
        n = _even(2 * half / spacing)
        o = -(n - 1) * spacing / 2.0
        return GridSpec(
            dims=(n, n, n),
            spacing=spacing3,
            origin=(phantom.center[0] + o, phantom.center[1] + o, o),
        )
    raise BadSpec("no default grid for this phantom")


def _even(x):
    n = int(round(x))
    return n + (n % 2)
