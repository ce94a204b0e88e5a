"""Differentiable Monte-Carlo estimate of the decisive-and-correct probability.

For a candidate intervention ``do(X=x)`` the quantity of interest is the
probability that, after observing one more outcome, the accumulated Bayes
factor crosses the decisive threshold in the direction of the true
hypothesis:

* under H0 (weight ``p_h0``): BF01 of the enlarged dataset exceeds ``k0``,
  with the new outcome drawn from the fitted marginal ``m0``;
* under H1 (weight ``p_h1``): BF01 falls below ``k1``, with the new outcome
  drawn from the fitted conditional ``m1(.|x)``.

Each hard indicator is replaced by the smooth surrogate
``exp(-relu(threshold_gap) / beta)``, which agrees with the indicator away
from the threshold and makes the Monte-Carlo average differentiable in ``x``.
Gradients flow through two channels: the conditional density of the
H0-samples depends on ``x``, and the H1-samples themselves are
reparameterized as ``link(x) + eps`` with frozen residual draws.

One frozen set of Monte-Carlo draws (common random numbers) is reused across
all candidate ``x`` during a single optimization, which makes the surrogate a
deterministic function and lets a dense grid search serve as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes import HypothesisPosterior, log_bf01
from .errors import ConfigError
from .fitting import FittedModels
from .scm import Dataset

#: log BF values are clamped to this magnitude before exponentiation.
LOG_BF_EXP_CLAMP = 700.0


@dataclass(frozen=True)
class PdcConfig:
    """Decisive thresholds, smoothing scale, and Monte-Carlo sample count."""

    k0: float = 10.0
    k1: float = 0.1
    beta: float = 0.2
    n_mc: int = 4096

    def __post_init__(self) -> None:
        if not (self.k0 > 1.0 > self.k1 > 0.0):
            raise ConfigError(f"thresholds must satisfy k0 > 1 > k1 > 0, got {self.k0}, {self.k1}")
        if not self.beta > 0.0:
            raise ConfigError("smoothing scale beta must be positive")
        if self.n_mc < 1:
            raise ConfigError("Monte-Carlo sample count must be >= 1")

    def to_dict(self) -> dict:
        return {"k0": self.k0, "k1": self.k1, "beta": self.beta, "n_mc": self.n_mc}

    @classmethod
    def from_dict(cls, record: dict) -> "PdcConfig":
        return cls(**record)


@dataclass(frozen=True, eq=False)
class McNoise:
    """Frozen Monte-Carlo draws shared by every candidate ``x`` of one solve.

    ``y0`` are outcomes drawn from the fitted marginal, ``eps`` residual draws
    used to reparameterize the conditional samples.  The log densities that do
    not depend on ``x`` are cached at draw time.
    """

    y0: np.ndarray
    eps: np.ndarray
    log_m0_y0: np.ndarray
    log_psi_eps: np.ndarray

    @property
    def n(self) -> int:
        return len(self.y0)


def draw_mc_noise(models: FittedModels, cfg: PdcConfig, rng: np.random.Generator) -> McNoise:
    """Draw one frozen noise set from the fitted models."""
    y0 = models.m0.sample(rng, cfg.n_mc)
    eps = models.residual.sample(rng, cfg.n_mc)
    return McNoise(
        y0=y0,
        eps=eps,
        log_m0_y0=models.m0.log_density(y0),
        log_psi_eps=models.residual.log_density(eps),
    )


def smoothed_step(t, beta: float):
    """Smooth indicator surrogate ``exp(-relu(t)/beta)``.

    Equals 1 exactly when ``t <= 0`` (constraint satisfied), decays
    exponentially for ``t > 0``, and is differentiable except at the kink,
    where the flat side is used.
    """
    if not beta > 0.0:
        raise ConfigError("beta must be positive")
    return np.exp(-np.maximum(t, 0.0) / beta)


def candidate_log_bayes_factors(
    models: FittedModels,
    base_log_bf: float,
    noise: McNoise,
    x: np.ndarray,
    need_grad: bool = False,
):
    """Log BF01 of the enlarged dataset for every (candidate x, MC sample) pair.

    Returns ``(lb0, lb1, dlb0, dlb1)`` with shape ``(len(x), noise.n)``:
    ``lb0`` uses the H0-samples ``y0``, ``lb1`` the reparameterized H1-samples
    ``link(x) + eps``.  The derivative arrays are None unless ``need_grad``.
    Only the fitted conditional density introduces x-dependence in ``lb0``;
    in ``lb1`` the residual term is constant in ``x`` by reparameterization
    and the x-dependence enters through the marginal density instead.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fx = models.link_mean(x)[:, None]
    resid0 = noise.y0[None, :] - fx
    y1 = fx + noise.eps[None, :]
    if need_grad:
        lp_resid0, score0 = models.residual.log_density_and_grad(resid0)
        lp_y1, score1 = models.m0.log_density_and_grad(y1)
        dfx = models.link_mean_dx(x)[:, None]
        dlb0 = score0
        dlb0 *= dfx
        dlb1 = score1
        dlb1 *= dfx
    else:
        lp_resid0 = models.residual.log_density(resid0)
        lp_y1 = models.m0.log_density(y1)
        dlb0 = dlb1 = None
    lb0 = np.subtract((base_log_bf + noise.log_m0_y0)[None, :], lp_resid0, out=lp_resid0)
    lb1 = np.subtract(lp_y1, (noise.log_psi_eps - base_log_bf)[None, :], out=lp_y1)
    return lb0, lb1, dlb0, dlb1


def _pdc_batch(
    models: FittedModels,
    base_log_bf: float,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
    x: np.ndarray,
    need_grad: bool,
    hard: bool = False,
):
    """Value (and optionally gradient) of the surrogate at a vector of x."""
    lb0, lb1, dlb0, dlb1 = candidate_log_bayes_factors(
        models, base_log_bf, noise, x, need_grad=need_grad
    )
    np.clip(lb0, -LOG_BF_EXP_CLAMP, LOG_BF_EXP_CLAMP, out=lb0)
    np.clip(lb1, -LOG_BF_EXP_CLAMP, LOG_BF_EXP_CLAMP, out=lb1)
    bf0 = np.exp(lb0, out=lb0)
    bf1 = np.exp(lb1, out=lb1)
    gap0 = cfg.k0 - bf0
    gap1 = bf1 - cfg.k1
    p0, p1 = posterior.p_h0, posterior.p_h1
    if hard:
        term0 = (gap0 < 0.0).mean(axis=1)
        term1 = (gap1 < 0.0).mean(axis=1)
        return p0 * term0 + p1 * term1, None
    h0 = smoothed_step(gap0, cfg.beta)
    h1 = smoothed_step(gap1, cfg.beta)
    value = p0 * h0.mean(axis=1) + p1 * h1.mean(axis=1)
    if not need_grad:
        return value, None
    # d/dx exp(-relu(gap)/beta): zero on the satisfied side; on the active
    # side the chain rule gives exp(-gap/beta)/beta * d(BF)/dx with
    # d(BF)/dx = BF * d(log BF)/dx.  The smooth factor is multiplied in
    # first: it vanishes wherever BF is huge, keeping intermediates finite.
    h0 *= gap0 > 0.0
    h0 *= bf0
    h0 *= dlb0
    h1 *= gap1 > 0.0
    h1 *= bf1
    h1 *= dlb1
    grad = (p0 / cfg.beta) * h0.mean(axis=1) - (p1 / cfg.beta) * h1.mean(axis=1)
    return value, grad


def _base_log_bf(models: FittedModels, d_int: Dataset) -> float:
    return log_bf01(models, d_int) if len(d_int) else 0.0


def estimate_pdc(
    x: float,
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
    hard: bool = False,
) -> float:
    """Monte-Carlo estimate of the decisive-and-correct probability at ``x``.

    ``hard=True`` replaces the smooth surrogate with the exact indicators
    (useful for convergence checks; not differentiable).
    The result is a posterior-weighted average of values in [0, 1].
    """
    value, _ = _pdc_batch(
        models, _base_log_bf(models, d_int), posterior, cfg, noise,
        np.asarray([x], dtype=float), need_grad=False, hard=hard,
    )
    return float(value[0])


def pdc_gradient(
    x: float,
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
) -> float:
    """Analytic derivative of :func:`estimate_pdc` with respect to ``x``."""
    _, grad = _pdc_batch(
        models, _base_log_bf(models, d_int), posterior, cfg, noise,
        np.asarray([x], dtype=float), need_grad=True,
    )
    return float(grad[0])


def multistart_ascent(
    value_and_grad,
    bounds: tuple[float, float],
    n_starts: int = 8,
    max_iter: int = 200,
    step_min_frac: float = 1e-5,
) -> tuple[float, float]:
    """Projected sign-based gradient ascent from a uniform grid of starts.

    ``value_and_grad`` maps a vector of x to (values, gradients); it must be
    deterministic (freeze any Monte-Carlo draws beforehand).  Steps grow on
    improvement and halve otherwise, proposals are clipped to the bounds, and
    a start retires once its step is below ``step_min_frac`` of the range.
    Ties on the final objective break toward the smallest |x|, then the
    smallest x.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ConfigError(f"invalid bounds ({lo}, {hi})")
    width = hi - lo
    x = np.linspace(lo, hi, n_starts)
    f, g = value_and_grad(x)
    f = np.asarray(f, dtype=float).copy()
    g = np.asarray(g, dtype=float).copy()
    x = x.copy()
    steps = np.full(n_starts, width / (2.0 * n_starts))
    active = np.ones(n_starts, dtype=bool)
    # per-start stall detection: retire a start whose objective stops moving
    stall_window = 10
    f_snapshot = f.copy()
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        proposal = np.clip(x[idx] + steps[idx] * np.sign(g[idx]), lo, hi)
        f_try, g_try = value_and_grad(proposal)
        improved = f_try > f[idx]
        acc = idx[improved]
        rej = idx[~improved]
        x[acc] = proposal[improved]
        f[acc] = f_try[improved]
        g[acc] = np.asarray(g_try)[improved]
        steps[acc] = np.minimum(steps[acc] * 1.3, width / 2.0)
        steps[rej] *= 0.5
        active &= steps >= step_min_frac * width
        if it % stall_window == 0:
            active &= (f - f_snapshot) > 1e-10 * np.maximum(1.0, np.abs(f))
            f_snapshot = f.copy()
    best = np.lexsort((x, np.abs(x), -f))[0]
    return float(x[best]), float(f[best])


def optimize_intervention(
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    bounds: tuple[float, float],
    rng: np.random.Generator,
    n_starts: int = 8,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Pick the intervention maximizing the decisive-and-correct surrogate.

    Freezes one Monte-Carlo noise set for the whole solve, so the objective
    seen by the optimizer is deterministic; the returned pair is the best
    iterate across all starts and its surrogate value, evaluated on that same
    frozen noise.  Deterministic for a given generator state.
    """
    noise = draw_mc_noise(models, cfg, rng)
    base = _base_log_bf(models, d_int)

    def value_and_grad(x_vec):
        return _pdc_batch(models, base, posterior, cfg, noise, x_vec, need_grad=True)

    return multistart_ascent(value_and_grad, bounds, n_starts=n_starts, max_iter=max_iter)
