"""Wall shear stress from any continuously queryable velocity field.

The estimator probes the field at two points along the inward wall normal,
spaced delta_n and 2 delta_n from the wall, keeps only the wall-tangential
velocity components, and differentiates the quadratic profile through
(0, 0), (delta_n, v1), (2 delta_n, v2) at the wall. The zero at the wall is
pinned by no-slip rather than sampled, so three constraints determine the
quadratic and the derivative reduces to (4 v1 - v2) / (2 delta_n). Fields
quadratic along the normal are therefore differentiated exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutsideDomain
from .grid import WallSurface
from .validation import as_points3, check_positive

MM_TO_M = 1e-3


@dataclass(frozen=True)
class WssConfig:
    mu: float = 0.004  # dynamic viscosity, Pa s
    delta_n: float = 0.5  # probe spacing along the inward normal, mm

    def __post_init__(self):
        check_positive(self.mu, "mu")
        check_positive(self.delta_n, "delta_n")

    def to_dict(self):
        return {"mu": self.mu, "delta_n_mm": self.delta_n}

    @classmethod
    def from_dict(cls, d):
        return cls(mu=float(d.get("mu", 0.004)), delta_n=float(d.get("delta_n_mm", 0.5)))


@dataclass(frozen=True)
class WssField:
    """WSS vectors (Pa) over (wall point, time), plus per-point flags."""

    points: np.ndarray  # (n, 3) mm
    normals: np.ndarray  # (n, 3)
    times: np.ndarray  # (m,) s
    values: np.ndarray  # (n, m, 3) Pa, NaN where flagged
    flags: np.ndarray  # (n, m) bool, True = probe outside domain

    def magnitude(self):
        return np.linalg.norm(self.values, axis=2)

    def tawss(self):
        """Time-averaged |WSS| per wall point (NaN where any time is flagged)."""
        return self.magnitude().mean(axis=1)

    def n_flagged(self):
        return int(self.flags.sum())


def _sampler_contains(sampler, points, t):
    contains = getattr(sampler, "contains", None)
    if contains is None:
        return np.ones(len(points), dtype=bool)
    return np.asarray(contains(points, t), dtype=bool)


def _sample(sampler, points, t):
    velocity = getattr(sampler, "velocity", None)
    if velocity is not None:
        return np.asarray(velocity(points, t), dtype=np.float64)
    coords = np.column_stack([points, np.full(len(points), t)])
    return np.asarray(sampler(coords), dtype=np.float64)


def _wss_vectors(sampler, points, normals, t, cfg):
    p1 = points + cfg.delta_n * normals
    p2 = points + 2.0 * cfg.delta_n * normals
    v1 = _sample(sampler, p1, t)
    v2 = _sample(sampler, p2, t)
    # Remove the normal component before fitting; the derivative of the
    # tangential profile is what shear stress measures.
    v1t = v1 - np.einsum("ij,ij->i", v1, normals)[:, None] * normals
    v2t = v2 - np.einsum("ij,ij->i", v2, normals)[:, None] * normals
    dvdy = (4.0 * v1t - v2t) / (2.0 * cfg.delta_n * MM_TO_M)
    return cfg.mu * dvdy


def wss_at(sampler, point, normal, t, cfg: WssConfig = WssConfig()):
    """WSS vector (Pa) at one wall point; raises if a probe leaves the domain."""
    point = as_points3(point, "wall point")
    normal = as_points3(normal, "wall normal")
    probe = point + 2.0 * cfg.delta_n * normal
    if not _sampler_contains(sampler, probe, t).all():
        raise OutsideDomain(f"probe {probe[0]} at t={t} outside the sampler domain")
    return _wss_vectors(sampler, point, normal, t, cfg)[0]


def wss_field(sampler, wall: WallSurface, times, cfg: WssConfig = WssConfig()) -> WssField:
    """WSS over every (wall point, time); out-of-domain probes are flagged NaN."""
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    n, m = len(wall), len(times)
    values = np.full((n, m, 3), np.nan)
    flags = np.zeros((n, m), dtype=bool)
    for j, t in enumerate(times):
        probe = wall.points + 2.0 * cfg.delta_n * wall.normals
        ok = _sampler_contains(sampler, probe, float(t))
        ok &= _sampler_contains(sampler, wall.points + cfg.delta_n * wall.normals, float(t))
        flags[:, j] = ~ok
        if ok.any():
            values[ok, j, :] = _wss_vectors(
                sampler, wall.points[ok], wall.normals[ok], float(t), cfg
            )
    return WssField(
        points=wall.points, normals=wall.normals, times=times, values=values, flags=flags
    )
