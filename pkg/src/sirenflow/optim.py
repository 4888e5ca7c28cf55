"""Limited-memory BFGS with a strong-Wolfe line search, plus the fit driver.

The minimizer is full-batch and deterministic: the two-loop recursion with
initial inverse-Hessian scaling s'y / y'y, unit initial trial step, and
textbook Wolfe constants. Curvature pairs with s'y <= 1e-12 |s||y| are
skipped, which keeps the implicit inverse-Hessian approximation positive
definite; a non-descent direction resets the history to steepest descent.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteObjective, NumericError
from .grid import SampleSet
from .siren import FitConfig, SirenModel, init_model, loss_and_grad

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
CURVATURE_FLOOR = 1e-12


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    status: str  # converged | max_iterations | line_search_failed
    history: list = field(default_factory=list)  # one dict per accepted iterate


class _Objective:
    """Wraps a user objective; tracks calls and the extras of each evaluation.

    The callable may return (f, g) or (f, g, extras-dict).
    """

    def __init__(self, fun):
        self.fun = fun
        self.calls = 0

    def __call__(self, x):
        out = self.fun(x)
        self.calls += 1
        if len(out) == 2:
            f, g = out
            extras = {}
        else:
            f, g, extras = out
        f = float(f)
        g = np.asarray(g, dtype=np.float64)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise NonFiniteObjective(f"objective returned non-finite values at call {self.calls}")
        return f, g, extras


def _cubic_step(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi):
    """Minimizer of the cubic through two (value, derivative) samples.

    Falls back to bisection when the cubic is degenerate or steps outside
    the bracket interior.
    """
    h = a_hi - a_lo
    if h == 0.0:
        return a_lo
    d1 = d_lo + d_hi - 3.0 * (f_hi - f_lo) / h
    disc = d1 * d1 - d_lo * d_hi
    if disc < 0.0:
        return 0.5 * (a_lo + a_hi)
    d2 = np.sign(h) * np.sqrt(disc)
    denom = d_hi - d_lo + 2.0 * d2
    if denom == 0.0:
        return 0.5 * (a_lo + a_hi)
    a = a_hi - h * (d_hi + d2 - d1) / denom
    lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
    margin = 0.1 * (hi - lo)
    if not np.isfinite(a) or a < lo + margin or a > hi - margin:
        return 0.5 * (a_lo + a_hi)
    return a


def _wolfe_search(obj, x, d, f0, g0, max_evals=40):
    """Strong-Wolfe line search with unit initial trial step.

    Returns (alpha, f, g, extras, ok). The last objective evaluation is at
    the returned point. ``ok`` is False when no Wolfe point was found; the
    best point seen is returned in that case.
    """
    dphi0 = float(g0 @ d)
    if dphi0 >= 0.0:
        raise NumericError("line search called with a non-descent direction")

    def phi(alpha):
        f, g, extras = obj(x + alpha * d)
        return f, g, float(g @ d), extras

    best = (0.0, f0, g0, {})  # lowest f seen that we can safely fall back to

    a_prev, f_prev, d_prev = 0.0, f0, dphi0
    g_prev, e_prev = g0, {}
    alpha = 1.0
    a_max = 1e10

    lo = hi = None
    for i in range(max_evals):
        f_a, g_a, d_a, e_a = phi(alpha)
        if f_a < best[1]:
            best = (alpha, f_a, g_a, e_a)
        if f_a > f0 + WOLFE_C1 * alpha * dphi0 or (i > 0 and f_a >= f_prev):
            lo = (a_prev, f_prev, d_prev, g_prev, e_prev)
            hi = (alpha, f_a, d_a, g_a, e_a)
            break
        if abs(d_a) <= -WOLFE_C2 * dphi0:
            return alpha, f_a, g_a, e_a, True
        if d_a >= 0.0:
            lo = (alpha, f_a, d_a, g_a, e_a)
            hi = (a_prev, f_prev, d_prev, g_prev, e_prev)
            break
        a_prev, f_prev, d_prev, g_prev, e_prev = alpha, f_a, d_a, g_a, e_a
        alpha = min(2.0 * alpha, a_max)
    if lo is None:
        a, f_b, g_b, e_b = best
        if a > 0.0 and f_b < f0:
            f_b, g_b, e_b = _reevaluate(obj, x, d, a)
            return a, f_b, g_b, e_b, False
        return 0.0, f0, g0, {}, False

    # Zoom phase: shrink [lo, hi] keeping the Wolfe bracket invariants.
    for _ in range(max_evals):
        a_lo, f_lo, d_lo, g_lo, e_lo = lo
        a_hi, f_hi, d_hi, g_hi, e_hi = hi
        if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
            break
        a_j = _cubic_step(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
        f_j, g_j, d_j, e_j = phi(a_j)
        if f_j < best[1]:
            best = (a_j, f_j, g_j, e_j)
        if f_j > f0 + WOLFE_C1 * a_j * dphi0 or f_j >= f_lo:
            hi = (a_j, f_j, d_j, g_j, e_j)
        else:
            if abs(d_j) <= -WOLFE_C2 * dphi0:
                return a_j, f_j, g_j, e_j, True
            if d_j * (a_hi - a_lo) >= 0.0:
                hi = lo
            lo = (a_j, f_j, d_j, g_j, e_j)

    a, f_b, g_b, e_b = best
    if a > 0.0 and f_b < f0:
        f_b, g_b, e_b = _reevaluate(obj, x, d, a)
        return a, f_b, g_b, e_b, False
    return 0.0, f0, g0, {}, False


def _reevaluate(obj, x, d, alpha):
    f, g, extras = obj(x + alpha * d)
    return f, g, extras


def _two_loop(g, s_list, y_list, rho_list):
    """Two-loop recursion for the L-BFGS search direction -H g."""
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list), reversed(rho_list)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        gamma = (s @ y) / (y @ y)
        q *= gamma
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def minimize(
    objective,
    x0,
    max_iterations=2000,
    tolerance=1e-8,
    history_size=10,
    callback=None,
) -> MinimizeResult:
    """Minimize a smooth objective with L-BFGS.

    ``objective(x)`` returns ``(value, gradient)`` or
    ``(value, gradient, extras)``; extras of accepted iterates are merged
    into the history rows. Convergence: ``||g||_inf <= tolerance * (1 + |f|)``.
    The accepted-iterate loss sequence is non-increasing by the Armijo
    condition.
    """
    obj = _Objective(objective)
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g, extras = obj(x)
    gnorm = float(np.abs(g).max()) if g.size else 0.0

    history = [
        {"iteration": 0, "loss": f, "grad_norm": gnorm, "step_length": 0.0, **extras}
    ]
    if callback is not None:
        callback(0, x, f, gnorm, 0.0, extras)
    if gnorm <= tolerance * (1.0 + abs(f)):
        return MinimizeResult(x, f, gnorm, 0, "converged", history)

    s_list, y_list, rho_list = [], [], []
    status = "max_iterations"
    k = 0
    while k < max_iterations:
        d = _two_loop(g, s_list, y_list, rho_list)
        if g @ d >= 0.0:
            # Lost positive definiteness; restart from steepest descent.
            s_list, y_list, rho_list = [], [], []
            d = -g
        alpha, f_new, g_new, extras, ok = _wolfe_search(obj, x, d, f, g)
        if not ok and alpha == 0.0:
            status = "line_search_failed"
            break
        x_new = x + alpha * d
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > CURVATURE_FLOOR * np.linalg.norm(s) * np.linalg.norm(y):
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > history_size:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.abs(g).max())
        k += 1
        history.append(
            {"iteration": k, "loss": f, "grad_norm": gnorm, "step_length": alpha, **extras}
        )
        if callback is not None:
            callback(k, x, f, gnorm, alpha, extras)
        if gnorm <= tolerance * (1.0 + abs(f)):
            status = "converged"
            break
        if not ok:
            status = "line_search_failed"
            break
    return MinimizeResult(x, f, gnorm, k, status, history)


@dataclass
class FitResult:
    model: SirenModel
    loss: float
    grad_norm: float
    iterations: int
    status: str
    history: list
    seconds: float

    @property
    def converged(self):
        return self.status == "converged"


def fit(model: SirenModel, samples: SampleSet, cfg: FitConfig) -> FitResult:
    """Train a model on a sample set; deterministic given (model, samples, cfg)."""
    scale = 1.0 / len(samples) if cfg.mean_loss else 1.0

    def objective(theta):
        report, grad = loss_and_grad(model.with_vector(theta), samples)
        extras = {
            "data_term": report.data_term * scale,
            "wall_term": report.wall_term * scale,
        }
        return report.total * scale, grad * scale, extras

    t0 = time.perf_counter()
    res = minimize(
        objective,
        model.to_vector(),
        max_iterations=cfg.max_iterations,
        tolerance=cfg.tolerance,
        history_size=cfg.history_size,
    )
    seconds = time.perf_counter() - t0
    losses = [row["loss"] for row in res.history]
    if any(b > a + 1e-12 * max(1.0, abs(a)) for a, b in zip(losses, losses[1:])):
        raise NumericError("accepted-iterate loss sequence is not non-increasing")
    trained = model.with_vector(res.x)
    # No timings here: checkpoint bytes must be reproducible run-to-run.
    trained.meta["fit"] = {
        "iterations": res.iterations,
        "status": res.status,
        "final_loss": res.fun,
    }
    return FitResult(
        model=trained,
        loss=res.fun,
        grad_norm=res.grad_norm,
        iterations=res.iterations,
        status=res.status,
        history=res.history,
        seconds=seconds,
    )


def fit_fresh(samples: SampleSet, cfg: FitConfig, nondim) -> FitResult:
    """Initialize from ``cfg.seed`` and train."""
    return fit(init_model(cfg, nondim), samples, cfg)
