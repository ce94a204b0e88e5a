"""Intervention-selection policies: decisive-evidence, information gain, random.

The information-gain baseline scores a candidate ``do(X=x)`` by the mutual
information between the hypothesis indicator and the enlarged interventional
dataset (the part that does not depend on ``x`` is a constant and is
dropped).  Writing ``r`` for the Bayes factor of the enlarged dataset and
``(p0, p1)`` for the current hypothesis posterior, the objective is

    E_{y ~ m0}[ p0 * log( r / (r*p0 + p1) ) ]
  + E_{y ~ m1(.|x)}[ p1 * log( 1 / (r*p0 + p1) ) ]

estimated with the same frozen Monte-Carlo draws and reparameterization as
the decisive-evidence objective, and maximized with the same multi-start
ascent.  All inner arithmetic stays in log space.
"""

from __future__ import annotations

import enum

import numpy as np

from .bayes import HypothesisPosterior
from .errors import ConfigError
from .fitting import FittedModels
from .pdc import (
    McNoise,
    PdcConfig,
    _base_log_bf,
    candidate_log_bayes_factors,
    draw_mc_noise,
    multistart_ascent,
    optimize_intervention,
)
from .scm import Dataset


class StrategyKind(enum.Enum):
    PDC_MAX = "pdc"
    INFO_GAIN = "infogain"
    RANDOM = "random"


def select_random(bounds: tuple[float, float], rng: np.random.Generator) -> float:
    """Uniform draw over the intervention range."""
    lo, hi = bounds
    if not lo < hi:
        raise ConfigError(f"invalid bounds ({lo}, {hi})")
    return float(rng.uniform(lo, hi))


def _log_mix(u: np.ndarray, p0: float, log_p0: float) -> np.ndarray:
    """Stable ``log(p0 * exp(u) + (1 - p0))``.

    The log1p/expm1 form returns exactly 0.0 when ``u == 0``; the direct form
    takes over where expm1 would overflow.
    """
    big = u > 690.0
    safe = np.where(big, 0.0, u)
    out = np.log1p(p0 * np.expm1(safe))
    if np.any(big):
        out = np.where(big, u + log_p0, out)
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _info_gain_batch(
    models: FittedModels,
    base_log_bf: float,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
    x: np.ndarray,
    need_grad: bool,
):
    p0, p1 = posterior.p_h0, posterior.p_h1
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if p0 == 0.0 or p1 == 0.0:
        # Degenerate posterior: the integrands are identically zero
        # (log(r/r) under H0 certainty, a zero weight on the other term).
        zeros = np.zeros(len(x))
        return zeros, (np.zeros(len(x)) if need_grad else None)
    lb0, lb1, dlb0, dlb1 = candidate_log_bayes_factors(
        models, base_log_bf, noise, x, need_grad=need_grad
    )
    log_p0 = np.log(p0)
    value = p0 * (lb0 - _log_mix(lb0, p0, log_p0)).mean(axis=1)
    value -= p1 * _log_mix(lb1, p0, log_p0).mean(axis=1)
    if not need_grad:
        return value, None
    lam = posterior.log_odds_h0
    # d/du log(p0 e^u + p1) = sigmoid(u + log(p0/p1))
    g0 = p0 * ((1.0 - _sigmoid(lb0 + lam)) * dlb0).mean(axis=1)
    g1 = -p1 * (_sigmoid(lb1 + lam) * dlb1).mean(axis=1)
    return value, g0 + g1


def estimate_info_gain(
    x: float,
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
) -> float:
    """Monte-Carlo estimate of the information-gain objective at ``x``.

    Exactly zero when the two fitted densities coincide pointwise (every
    Bayes factor is 1) or when the posterior is degenerate.
    """
    value, _ = _info_gain_batch(
        models, _base_log_bf(models, d_int), posterior, cfg, noise,
        np.asarray([x], dtype=float), need_grad=False,
    )
    return float(value[0])


def info_gain_gradient(
    x: float,
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    noise: McNoise,
) -> float:
    """Analytic derivative of :func:`estimate_info_gain` with respect to ``x``."""
    _, grad = _info_gain_batch(
        models, _base_log_bf(models, d_int), posterior, cfg, noise,
        np.asarray([x], dtype=float), need_grad=True,
    )
    return float(grad[0])


def optimize_info_gain(
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    bounds: tuple[float, float],
    rng: np.random.Generator,
    n_starts: int = 8,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Maximize information gain with frozen noise and multi-start ascent."""
    noise = draw_mc_noise(models, cfg, rng)
    base = _base_log_bf(models, d_int)

    def value_and_grad(x_vec):
        return _info_gain_batch(models, base, posterior, cfg, noise, x_vec, need_grad=True)

    return multistart_ascent(value_and_grad, bounds, n_starts=n_starts, max_iter=max_iter)


def select_intervention(
    kind: StrategyKind,
    models: FittedModels,
    d_int: Dataset,
    posterior: HypothesisPosterior,
    cfg: PdcConfig,
    bounds: tuple[float, float],
    rng: np.random.Generator,
) -> float:
    """Dispatch to the selection policy; the random policy ignores the models."""
    if kind is StrategyKind.RANDOM:
        return select_random(bounds, rng)
    if kind is StrategyKind.PDC_MAX:
        return optimize_intervention(models, d_int, posterior, cfg, bounds, rng)[0]
    if kind is StrategyKind.INFO_GAIN:
        return optimize_info_gain(models, d_int, posterior, cfg, bounds, rng)[0]
    raise ConfigError(f"unknown strategy kind: {kind!r}")
