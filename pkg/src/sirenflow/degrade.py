"""Synthetic low-quality measurement generator.

Turns a clean high-resolution velocity sequence into a noisy, undersampled,
half-resolution acquisition through the phase-encoding route: per frame and
per velocity channel, encode the field into complex images, transform to the
spatial-frequency domain, truncate the high frequencies (factor 2 per axis),
add complex Gaussian noise calibrated to a target SNR, apply a
variable-density sampling mask with a fully sampled central calibration
block, transform back, and decode phases into velocities.

Conventions (also echoed into output metadata):

* forward FFT unnormalized, inverse scaled by 1/N (numpy default);
* SNR means (mean fluid signal magnitude in image space) / (per-component
  standard deviation of the image-space noise);
* one 3D sampling mask is drawn per acquisition and shared by all frames
  and channels; noise is drawn independently per (frame, channel) from
  streams spawned off the master seed, so results do not depend on
  processing order.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import Delaunay

from .errors import (
    ConfigError,
    DegenerateGrid,
    InfeasibleBudget,
    NotDivisible,
    OddDims,
    VencExceeded,
)
from .grid import VelocityImage
from .phantoms import GridSpec
from .validation import check_positive

ENCODING_CHANNELS = 4  # reference + one per velocity axis


@dataclass
class DegradationConfig:
    """Knobs of the degradation pipeline.

    ``venc`` is per-axis (m/s) and must strictly exceed the largest velocity
    component of the input so that encoding never wraps.
    """

    h: int = 1  # temporal pooling factor
    snr: float = math.inf
    s_percent: float = 100.0  # fraction of k-space retained
    venc: tuple = (1.0, 1.0, 1.0)
    calibration_extent: tuple = (5, 5, 5)
    seed: int = 0

    def __post_init__(self):
        if self.h < 1:
            raise ConfigError("h must be >= 1")
        if not self.snr > 0:
            raise ConfigError("snr must be positive")
        if not (0.0 < self.s_percent <= 100.0):
            raise ConfigError("s_percent must be in (0, 100]")
        self.venc = tuple(float(v) for v in np.broadcast_to(self.venc, (3,)))
        check_positive(np.asarray(self.venc), "venc")
        self.calibration_extent = tuple(int(c) for c in self.calibration_extent)
        if any(c < 0 for c in self.calibration_extent):
            raise ConfigError("calibration extent must be non-negative")

    def to_dict(self):
        return {
            "h": self.h,
            "snr": None if math.isinf(self.snr) else self.snr,
            "s_percent": self.s_percent,
            "venc": list(self.venc),
            "calibration_extent": list(self.calibration_extent),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        snr = d.get("snr")
        return cls(
            h=int(d.get("h", 1)),
            snr=math.inf if snr is None else float(snr),
            s_percent=float(d.get("s_percent", 100.0)),
            venc=tuple(d.get("venc", (1.0, 1.0, 1.0))),
            calibration_extent=tuple(d.get("calibration_extent", (5, 5, 5))),
            seed=int(d.get("seed", 0)),
        )


# Table of named degradation presets: (snr, s_percent).
NOISE_PRESETS = {
    "mild": (20.0, 99.0),
    "medium": (5.0, 95.0),
    "extreme": (2.0, 68.0),
}


def preset_config(name, venc, h=1, calibration_extent=(5, 5, 5), seed=0) -> DegradationConfig:
    if name not in NOISE_PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(NOISE_PRESETS)}")
    snr, s = NOISE_PRESETS[name]
    return DegradationConfig(
        h=h, snr=snr, s_percent=s, venc=venc, calibration_extent=calibration_extent, seed=seed
    )


def temporal_downsample(frames, h):
    """Block-average over h consecutive frames along the first axis.

    Output frame j is the mean of input frames [j*h, j*h + h). Frame count
    must be divisible by h.
    """
    frames = np.asarray(frames, dtype=np.float64)
    m = frames.shape[0]
    if h < 1:
        raise ConfigError("h must be >= 1")
    if m % h != 0:
        raise NotDivisible(f"{m} frames not divisible by h={h}")
    if h == 1:
        return frames.copy()
    return frames.reshape(m // h, h, *frames.shape[1:]).mean(axis=1)


def pool_times(times, h):
    """Block-center timestamps matching :func:`temporal_downsample`."""
    times = np.asarray(times, dtype=np.float64)
    if len(times) % h != 0:
        raise NotDivisible(f"{len(times)} times not divisible by h={h}")
    return times.reshape(-1, h).mean(axis=1)


def resample_to_grid(points, values, grid: GridSpec, times) -> VelocityImage:
    """Linearly interpolate a scattered time-resolved field onto a grid.

    ``points`` is (n, 3) mm; ``values`` is (n, n_times, 3) m/s. Voxels
    outside the scattered cloud's hull are zero-filled and masked non-fluid.
    """
    points = np.asarray(points, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) < 4:
        raise DegenerateGrid("need at least 4 scattered 3D points")
    if values.shape != (len(points), len(times), 3):
        raise DegenerateGrid(
            f"values shape {values.shape} != ({len(points)}, {len(times)}, 3)"
        )
    dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
    centers = grid.centers()
    tri = Delaunay(points)  # one triangulation shared by all frames
    data = np.zeros((*grid.dims, len(times), 3))
    inside = None
    for j in range(len(times)):
        interp = LinearNDInterpolator(tri, values[:, j, :])
        sampled = interp(centers)
        frame_inside = ~np.isnan(sampled[:, 0])
        inside = frame_inside if inside is None else inside
        sampled[~frame_inside] = 0.0
        data[..., j, :] = sampled.reshape(*grid.dims, 3)
    mask = np.repeat(inside.reshape(grid.dims)[..., None], len(times), axis=3)
    return VelocityImage(
        data=data,
        spacing=np.asarray(grid.spacing, dtype=np.float64),
        dt=dt,
        origin=np.asarray(grid.origin, dtype=np.float64),
        t_min=float(times[0]),
        mask=mask,
    )


def phase_encode(velocity, venc, fluid_mask=None):
    """Encode one velocity frame into 4 complex channels.

    Channel 0 is the velocity-compensated reference (zero phase); channels
    1..3 carry exp(j pi v_axis / venc_axis). Signal magnitude is 1 on fluid
    voxels, 0 elsewhere.
    """
    velocity = np.asarray(velocity, dtype=np.float64)
    if velocity.ndim != 4 or velocity.shape[-1] != 3:
        raise DegenerateGrid(f"velocity frame must be (nr, nc, ns, 3), got {velocity.shape}")
    venc = np.broadcast_to(np.asarray(venc, dtype=np.float64), (3,))
    if fluid_mask is None:
        fluid_mask = np.ones(velocity.shape[:3], dtype=bool)
    vmax = np.abs(velocity[fluid_mask]).max(axis=0) if fluid_mask.any() else np.zeros(3)
    if np.any(vmax >= venc):
        raise VencExceeded(f"velocity magnitude {vmax} reaches venc {tuple(venc)}")
    rho0 = fluid_mask.astype(np.float64)
    channels = np.empty((ENCODING_CHANNELS, *velocity.shape[:3]), dtype=np.complex128)
    channels[0] = rho0
    for axis in range(3):
        phase = np.pi * velocity[..., axis] / venc[axis]
        channels[axis + 1] = rho0 * np.exp(1j * phase)
    return channels


def phase_decode(channels, venc):
    """Invert :func:`phase_encode`: velocities plus the magnitude image.

    v_axis = venc * angle(rho_axis * conj(rho_0)) / pi. Total function;
    noisy phases beyond +-pi alias rather than fail.
    """
    channels = np.asarray(channels)
    if channels.shape[0] != ENCODING_CHANNELS:
        raise DegenerateGrid(f"expected {ENCODING_CHANNELS} channels, got {channels.shape[0]}")
    venc = np.broadcast_to(np.asarray(venc, dtype=np.float64), (3,))
    ref = channels[0]
    velocity = np.empty((*channels.shape[1:], 3))
    for axis in range(3):
        velocity[..., axis] = venc[axis] * np.angle(channels[axis + 1] * np.conj(ref)) / np.pi
    return velocity, np.abs(ref)


def kspace_truncate(k):
    """Keep the central half-band per axis of a centered-spectrum view.

    Input is an unshifted 3D spectrum with even dims; output has half the
    dims, rescaled by the voxel-count ratio so a constant image stays
    constant under the 1/N inverse transform.
    """
    k = np.asarray(k)
    if k.ndim != 3:
        raise DegenerateGrid("expected a 3D spectrum")
    if any(n % 2 for n in k.shape):
        raise OddDims(f"dims must be even, got {k.shape}")
    shifted = np.fft.fftshift(k)
    slices = tuple(slice(n // 2 - n // 4, n // 2 + n // 4) for n in k.shape)
    cropped = np.fft.ifftshift(shifted[slices])
    ratio = cropped.size / k.size
    return cropped * ratio


def noise_sigma_kspace(snr, signal_level, n_voxels):
    """Per-component k-space noise std hitting the image-space SNR target."""
    return signal_level / snr * math.sqrt(n_voxels)


def add_kspace_noise(k, snr, rng, signal_level=None):
    """Add i.i.d. complex Gaussian noise to every coefficient.

    ``signal_level`` is the mean fluid-voxel signal magnitude in image
    space; when omitted it is estimated from the bright voxels of the
    inverse transform. ``snr = inf`` returns the input unchanged.
    """
    k = np.asarray(k, dtype=np.complex128)
    if math.isinf(snr):
        return k.copy()
    if not snr > 0:
        raise ConfigError("snr must be positive")
    if signal_level is None:
        img = np.abs(np.fft.ifftn(k))
        bright = img >= 0.5 * img.max()
        signal_level = float(img[bright].mean()) if bright.any() else 1.0
    rng = np.random.default_rng(rng)
    sigma = noise_sigma_kspace(snr, signal_level, k.size)
    noise = rng.normal(scale=sigma, size=(2, *k.shape))
    return k + noise[0] + 1j * noise[1]


@dataclass(frozen=True)
class KspaceMask:
    """Boolean retention mask with a fully sampled central calibration block."""

    keep: np.ndarray  # bool, unshifted spectrum layout
    retained_fraction: float
    calibration_extent: tuple

    def apply(self, k):
        return np.where(self.keep, k, 0.0)


def _calibration_block(dims, extent):
    """Centered-block indices in the fftshift layout."""
    block = np.zeros(dims, dtype=bool)
    slices = []
    for n, e in zip(dims, extent):
        e = min(e, n)
        start = n // 2 - e // 2
        slices.append(slice(start, start + e))
    block[tuple(slices)] = True
    return block


def make_mask(dims, s_percent, calibration_extent=(5, 5, 5), seed=0) -> KspaceMask:
    """Variable-density retention mask covering exactly s_percent of k-space.

    Retention favors the spectrum center: weights follow an isotropic
    Gaussian of distance from the center (std = 1/4 of the grid half-width),
    and the budgeted coefficient count is drawn without replacement with
    those weights, so the realized fraction always matches the target to
    within one voxel of rounding. The calibration block is always kept.
    """
    dims = tuple(int(n) for n in dims)
    if any(n < 1 for n in dims):
        raise DegenerateGrid(f"bad mask dims {dims}")
    if not (0.0 < s_percent <= 100.0):
        raise ConfigError("s_percent must be in (0, 100]")
    n_total = int(np.prod(dims))
    n_keep = int(round(s_percent / 100.0 * n_total))
    calib = _calibration_block(dims, calibration_extent)
    n_calib = int(calib.sum())
    if n_keep < n_calib:
        raise InfeasibleBudget(
            f"s={s_percent}% keeps {n_keep} coefficients, calibration block needs {n_calib}"
        )
    keep_shifted = calib.copy()
    n_extra = n_keep - n_calib
    if n_extra > 0 and n_keep < n_total:
        axes = [np.arange(n) - n // 2 for n in dims]
        ii, jj, kk = np.meshgrid(*axes, indexing="ij")
        d2 = ii**2 + jj**2 + kk**2
        sigma = max(max(dims) / 8.0, 1.0)  # quarter of the half-width
        weights = np.exp(-d2 / (2.0 * sigma**2))
        free = ~calib
        w = weights[free].ravel()
        rng = np.random.default_rng(seed)
        # Weighted sampling without replacement via exponential race keys.
        keys = rng.exponential(size=w.size) / np.maximum(w, 1e-300)
        chosen = np.argpartition(keys, n_extra - 1)[:n_extra]
        flat = np.flatnonzero(free.ravel())[chosen]
        keep_flat = keep_shifted.ravel()
        keep_flat[flat] = True
        keep_shifted = keep_flat.reshape(dims)
    elif n_keep >= n_total:
        keep_shifted = np.ones(dims, dtype=bool)
    return KspaceMask(
        keep=np.fft.ifftshift(keep_shifted),
        retained_fraction=keep_shifted.sum() / n_total,
        calibration_extent=tuple(calibration_extent),
    )


def degrade(clean: VelocityImage, cfg: DegradationConfig) -> VelocityImage:
    """Run the full measurement pipeline on a clean high-resolution image.

    Output has half the spatial dims (doubled spacing, same origin: coarse
    voxel centers coincide with even fine centers) and 1/h of the frames at
    block-center timestamps. Deterministic given (clean, cfg).
    """
    vmax = clean.max_abs_velocity()
    if np.any(vmax >= np.asarray(cfg.venc)):
        raise VencExceeded(
            f"per-axis max |v| {vmax} must stay below venc {cfg.venc}"
        )
    if any(n % 2 for n in clean.dims[:3]):
        raise OddDims(f"spatial dims must be even, got {clean.dims[:3]}")

    frames = np.moveaxis(clean.data, 3, 0)  # (nt, nr, nc, ns, 3)
    pooled = temporal_downsample(frames, cfg.h)
    times = pool_times(clean.times, cfg.h)
    smask = clean.spatial_mask()

    coarse_dims = tuple(n // 2 for n in clean.dims[:3])
    coarse_voxels = int(np.prod(coarse_dims))
    if any(c > n for c, n in zip(cfg.calibration_extent, coarse_dims)):
        raise ConfigError(
            f"calibration extent {cfg.calibration_extent} exceeds coarse dims {coarse_dims}"
        )

    seeds = np.random.SeedSequence(cfg.seed)
    mask_seed, noise_root = seeds.spawn(2)
    mask = make_mask(coarse_dims, cfg.s_percent, cfg.calibration_extent, mask_seed)
    signal_level = 1.0  # encoded fluid magnitude is exactly 1
    sigma = (
        0.0 if math.isinf(cfg.snr) else noise_sigma_kspace(cfg.snr, signal_level, coarse_voxels)
    )

    noise_streams = noise_root.spawn(len(times) * ENCODING_CHANNELS)
    out = np.empty((len(times), *coarse_dims, 3))
    for j in range(len(times)):
        channels = phase_encode(pooled[j], cfg.venc, smask)
        degraded = np.empty((ENCODING_CHANNELS, *coarse_dims), dtype=np.complex128)
        for i in range(ENCODING_CHANNELS):
            k = np.fft.fftn(channels[i])
            k = kspace_truncate(k)
            if sigma > 0.0:
                rng = np.random.default_rng(noise_streams[j * ENCODING_CHANNELS + i])
                noise = rng.normal(scale=sigma, size=(2, *coarse_dims))
                k = k + noise[0] + 1j * noise[1]
            degraded[i] = np.fft.ifftn(mask.apply(k))
        velocity, _ = phase_decode(degraded, cfg.venc)
        out[j] = velocity

    coarse_mask = None
    if clean.mask is not None:
        coarse_mask = np.repeat(
            smask[::2, ::2, ::2][..., None], len(times), axis=3
        )
    meta = {
        "degradation": cfg.to_dict(),
        "mask_retained_fraction": mask.retained_fraction,
        "snr_definition": "mean fluid |signal| in image space / per-component noise std",
        "fft_convention": "forward unnormalized, inverse 1/N",
    }
    return VelocityImage(
        data=np.moveaxis(out, 0, 3),
        spacing=clean.spacing * 2.0,
        dt=clean.dt * cfg.h,
        origin=clean.origin.copy(),
        t_min=float(times[0]),
        mask=coarse_mask,
        meta=meta,
    )
