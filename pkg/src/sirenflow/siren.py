"""Sinusoidal coordinate network: initialization, forward pass, loss, gradients.

The network maps a dimensionless space-time coordinate (4,) to a velocity
vector (3,). Hidden layers apply ``sin(W x + b)``; the first layer scales its
pre-activation by ``omega0``; the output layer is linear so velocities are
unbounded. All arithmetic is float64: the full-batch quasi-Newton training
loop needs more headroom than float32 line searches allow.

Gradients are exact reverse-mode differentiation written out by hand; the
test suite checks them against central finite differences.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptySampleSet
from .grid import NondimParams, SampleSet, WALL

DEFAULT_OMEGA0 = 30.0


@dataclass
class FitConfig:
    """Architecture and optimizer knobs for one training run."""

    depth: int = 4  # hidden layers
    width: int = 64  # neurons per hidden layer
    omega0: float = DEFAULT_OMEGA0
    seed: int = 0
    max_iterations: int = 2000
    tolerance: float = 1e-8  # on ||grad||_inf, relative to 1 + |loss|
    history_size: int = 10
    mean_loss: bool = False  # divide both loss terms by the row count

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.width < 1:
            raise ConfigError("width must be >= 1")
        if self.omega0 <= 0:
            raise ConfigError("omega0 must be positive")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.history_size < 1:
            raise ConfigError("history_size must be >= 1")


@dataclass
class LossReport:
    """Decomposed objective value at one parameter vector."""

    total: float
    data_term: float
    wall_term: float
    gradient_norm: float  # infinity norm

    def to_dict(self):
        return {
            "total": self.total,
            "data_term": self.data_term,
            "wall_term": self.wall_term,
            "gradient_norm": self.gradient_norm,
        }


@dataclass
class SirenModel:
    """Layer weights and biases plus the coordinate normalization they expect.

    ``layers[l]`` is a pair (W, b) with W of shape (P_l, Q_l) acting on
    column features of size Q_l; shapes chain so Q_{l+1} = P_l. The last
    pair is the linear output layer (3 rows).
    """

    layers: list  # [(W, b), ...]
    omega0: float
    nondim: NondimParams
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.layers) < 2:
            raise ConfigError("need at least one hidden layer plus the output layer")
        if self.omega0 <= 0:
            raise ConfigError("omega0 must be positive")
        prev = None
        for w, b in self.layers:
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ConfigError("layer weight/bias shapes inconsistent")
            if prev is not None and w.shape[1] != prev:
                raise ConfigError("layer shapes do not chain")
            prev = w.shape[0]
        if self.layers[0][0].shape[1] != 4:
            raise ConfigError("input arity must be 4")
        if self.layers[-1][0].shape[0] != 3:
            raise ConfigError("output arity must be 3")

    @property
    def depth(self):
        return len(self.layers) - 1

    @property
    def width(self):
        return self.layers[0][0].shape[0]

    def n_params(self):
        return sum(w.size + b.size for w, b in self.layers)

    def to_vector(self):
        return pack_params(self.layers)

    def with_vector(self, theta):
        return SirenModel(
            layers=unpack_params(theta, [(w.shape, b.shape) for w, b in self.layers]),
            omega0=self.omega0,
            nondim=self.nondim,
            seed=self.seed,
            meta=dict(self.meta),
        )

    def forward(self, coords):
        return forward(self, coords)

    def predict(self, coords_physical, chunk=65536):
        """Evaluate at physical (n, 4) coordinates (mm, s), chunked for memory."""
        coords_physical = np.asarray(coords_physical, dtype=np.float64)
        out = np.empty((len(coords_physical), 3))
        for lo in range(0, len(coords_physical), chunk):
            hi = min(lo + chunk, len(coords_physical))
            out[lo:hi] = forward(self, self.nondim.normalize4(coords_physical[lo:hi]))
        return out

    def __call__(self, coords_physical):
        return self.predict(coords_physical)

    def velocity(self, points, t):
        """Sampler-protocol evaluation: (n, 3) points (mm) at one time (s)."""
        points = np.asarray(points, dtype=np.float64)
        coords = np.column_stack([points, np.full(len(points), float(t))])
        return self.predict(coords)


def init_model(cfg: FitConfig, nondim: NondimParams) -> SirenModel:
    """Initialize weights and biases uniformly in +-sqrt(6 / fan_in).

    Deterministic per ``cfg.seed``. The first layer's frequency scaling is
    applied in the forward pass, not folded into the weights.
    """
    rng = np.random.default_rng(cfg.seed)
    sizes = [4] + [cfg.width] * cfg.depth + [3]
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        layers.append((w, b))
    return SirenModel(layers=layers, omega0=cfg.omega0, nondim=nondim, seed=cfg.seed)


def forward(model: SirenModel, coords):
    """Evaluate the network at dimensionless (n, 4) coordinates; returns (n, 3)."""
    x = np.asarray(coords, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    h = x
    last = len(model.layers) - 1
    for l, (w, b) in enumerate(model.layers):
        # First layer: sin(omega0 * W x + b); omega0 scales the product only.
        z = model.omega0 * (h @ w.T) + b if l == 0 else h @ w.T + b
        h = z if l == last else np.sin(z)
    return h[0] if squeeze else h


def _forward_cached(model, coords):
    """Forward pass keeping pre-activations and activations for backprop."""
    acts = [coords]
    zs = []
    h = coords
    last = len(model.layers) - 1
    for l, (w, b) in enumerate(model.layers):
        z = model.omega0 * (h @ w.T) + b if l == 0 else h @ w.T + b
        zs.append(z)
        h = z if l == last else np.sin(z)
        acts.append(h)
    return zs, acts


def loss_and_grad(model: SirenModel, samples: SampleSet):
    """Objective value and exact gradient over a sample set.

    The loss is the plain sum of squared residuals: fluid rows against their
    measured targets plus wall rows against zero. With ``mean_loss`` handled
    by the caller (see :class:`FitConfig`), no averaging happens here.

    Returns ``(LossReport, grad)`` with ``grad`` flattened like
    :func:`pack_params`.
    """
    if len(samples) == 0:
        raise EmptySampleSet("sample set has no rows")
    zs, acts = _forward_cached(model, samples.coords)
    resid = acts[-1] - samples.targets  # (n, 3)
    sq = np.einsum("ij,ij->i", resid, resid)
    wall_rows = samples.kinds == WALL
    wall_term = float(sq[wall_rows].sum())
    data_term = float(sq[~wall_rows].sum())
    total = data_term + wall_term

    grads = [None] * len(model.layers)
    delta = 2.0 * resid  # d total / d output
    for l in range(len(model.layers) - 1, -1, -1):
        w, _ = model.layers[l]
        if l < len(model.layers) - 1:
            delta = delta * np.cos(zs[l])  # now d total / d z_l
        if l == 0:
            gw = model.omega0 * (delta.T @ acts[l])
        else:
            gw = delta.T @ acts[l]
        gb = delta.sum(axis=0)
        grads[l] = (gw, gb)
        if l > 0:
            delta = delta @ w

    grad = pack_params(grads)
    report = LossReport(
        total=total,
        data_term=data_term,
        wall_term=wall_term,
        gradient_norm=float(np.abs(grad).max()),
    )
    return report, grad


def pack_params(layers):
    """Flatten [(W, b), ...] into one vector, layer order, weights before bias."""
    return np.concatenate([np.concatenate([w.ravel(), b.ravel()]) for w, b in layers])


def unpack_params(theta, shapes):
    """Inverse of :func:`pack_params` given [(w_shape, b_shape), ...]."""
    theta = np.asarray(theta, dtype=np.float64)
    layers = []
    pos = 0
    for w_shape, b_shape in shapes:
        w_size = int(np.prod(w_shape))
        b_size = int(np.prod(b_shape))
        w = theta[pos : pos + w_size].reshape(w_shape).copy()
        pos += w_size
        b = theta[pos : pos + b_size].reshape(b_shape).copy()
        pos += b_size
        layers.append((w, b))
    if pos != theta.size:
        raise ConfigError(f"parameter vector length {theta.size}, expected {pos}")
    return layers
