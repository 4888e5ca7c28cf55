"""Error metrics between a reference and a candidate vector field.

All three metrics are evaluated on the same shared points: magnitude and
vector normalized RMS errors (percent of the maximum reference speed) and
the direction error, the mean of 1 - |cos(angle)| in percent. Direction
error ignores points where either vector is slower than a small floor and
reports how many were excluded.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllPointsDegenerate, ConfigError, ZeroReference
from .validation import as_vectors3

SPEED_FLOOR = 1e-6  # m/s; below this a direction is meaningless


@dataclass(frozen=True)
class MetricsReport:
    mnrmse: float  # percent
    vnrmse: float  # percent
    de: float  # percent
    k: int  # evaluation points
    max_ref_speed: float  # m/s, global max over the evaluation points
    de_excluded: int = 0

    def to_dict(self):
        return {
            "mnrmse_percent": self.mnrmse,
            "vnrmse_percent": self.vnrmse,
            "de_percent": self.de,
            "k": self.k,
            "max_ref_speed": self.max_ref_speed,
            "de_excluded": self.de_excluded,
        }


def _speeds(u_ref, u):
    u_ref = as_vectors3(u_ref, name="u_ref")
    u = as_vectors3(u, len(u_ref), name="u")
    if len(u_ref) == 0:
        raise ConfigError("need at least one evaluation point")
    s_ref = np.linalg.norm(u_ref, axis=1)
    s = np.linalg.norm(u, axis=1)
    vmax = float(s_ref.max())
    if vmax <= 0.0:
        raise ZeroReference("reference field has zero maximum speed")
    return u_ref, u, s_ref, s, vmax


def mnrmse(u_ref, u):
    """Magnitude NRMSE in percent of the maximum reference speed."""
    _, _, s_ref, s, vmax = _speeds(u_ref, u)
    return 100.0 / vmax * float(np.sqrt(np.mean((s - s_ref) ** 2)))


def vnrmse(u_ref, u):
    """Vector NRMSE in percent: per-point squared Euclidean difference."""
    u_ref, u, _, _, vmax = _speeds(u_ref, u)
    diff = u - u_ref
    return 100.0 / vmax * float(np.sqrt(np.mean(np.einsum("ij,ij->i", diff, diff))))


def de(u_ref, u, return_excluded=False):
    """Direction error in percent: mean of 1 - |cos(angle)| over valid points.

    Antiparallel vectors count as exact. Points where either speed is below
    the floor are excluded from the mean.
    """
    u_ref, u, s_ref, s, _ = _speeds(u_ref, u)
    valid = (s_ref >= SPEED_FLOOR) & (s >= SPEED_FLOOR)
    n_excluded = int((~valid).sum())
    if not valid.any():
        raise AllPointsDegenerate("all points below the direction-error speed floor")
    dots = np.abs(np.einsum("ij,ij->i", u_ref[valid], u[valid]))
    cos = np.clip(dots / (s_ref[valid] * s[valid]), 0.0, 1.0)
    value = 100.0 * float(np.mean(1.0 - cos))
    if return_excluded:
        return value, n_excluded
    return value


def evaluate(u_ref, u) -> MetricsReport:
    """All three metrics on precomputed vectors at shared points."""
    u_ref, u, _, _, vmax = _speeds(u_ref, u)
    d, excluded = de(u_ref, u, return_excluded=True)
    return MetricsReport(
        mnrmse=mnrmse(u_ref, u),
        vnrmse=vnrmse(u_ref, u),
        de=d,
        k=len(u_ref),
        max_ref_speed=vmax,
        de_excluded=excluded,
    )


def compare(reference, candidate, coords) -> MetricsReport:
    """Evaluate two samplers at shared (n, 4) physical coordinates.

    A sampler is any callable mapping (n, 4) coordinates to (n, 3)
    velocities (models, baselines, or analytic phantoms all qualify).
    """
    coords = np.asarray(coords, dtype=np.float64)
    return evaluate(reference(coords), candidate(coords))
