"""Input validation helpers shared by the estimators and module functions.

All helpers convert to float64 C-contiguous arrays so downstream numerics
never silently run in float32.
"""

import numpy as np

from .errors import ConfigError


def as_array(x, name="array", dtype=np.float64):
    arr = np.ascontiguousarray(x, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite values")
    return arr


def as_points3(x, name="points"):
    """Validate an (n, 3) array of spatial points (mm)."""
    arr = as_array(x, name)
    if arr.ndim == 1 and arr.shape == (3,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError(f"{name} must have shape (n, 3), got {arr.shape}")
    return arr


def as_coords4(x, name="coords"):
    """Validate an (n, 4) array of space-time coordinates."""
    arr = as_array(x, name)
    if arr.ndim == 1 and arr.shape == (4,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ConfigError(f"{name} must have shape (n, 4), got {arr.shape}")
    return arr


def as_vectors3(y, n=None, name="vectors"):
    """Validate an (n, 3) array of velocity vectors (m/s)."""
    arr = as_array(y, name)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError(f"{name} must have shape (n, 3), got {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ConfigError(f"{name} has {arr.shape[0]} rows, expected {n}")
    return arr


def check_unit_normals(normals, name="normals", tol=1e-9):
    norms = np.linalg.norm(normals, axis=1)
    if not np.allclose(norms, 1.0, rtol=0.0, atol=tol):
        worst = float(np.abs(norms - 1.0).max())
        raise ConfigError(f"{name} must be unit vectors (max deviation {worst:.3e})")


def check_positive(value, name):
    if not np.all(np.asarray(value) > 0):
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def check_in_range(value, lo, hi, name):
    if not (lo < value <= hi):
        raise ConfigError(f"{name} must be in ({lo}, {hi}], got {value}")
    return value
