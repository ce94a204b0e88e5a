"""Shared test oracles, deliberately independent of the library's code paths.

Densities are evaluated through scipy/mpmath formulas rather than the
package's own mixture arithmetic, so agreement between an oracle and the
implementation is meaningful evidence rather than a tautology.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.stats import norm

from decint.fitting import FitDiagnostics, FittedModels
from decint.mixtures import MixtureOfNormals

_DUMMY_DIAG = FitDiagnostics(log_likelihood=0.0, iterations=0, converged=True, objective_trace=(0.0,))


def make_models(
    m0: MixtureOfNormals | None = None,
    residual: MixtureOfNormals | None = None,
    link_a: float = 2.0,
    link_b: float = 1.0,
) -> FittedModels:
    """FittedModels with hand-picked parameters (no fitting involved)."""
    return FittedModels(
        m0=m0 if m0 is not None else MixtureOfNormals.single(),
        link_a=link_a,
        link_b=link_b,
        residual=residual if residual is not None else MixtureOfNormals.single(),
        m0_diagnostics=_DUMMY_DIAG,
        m1_diagnostics=_DUMMY_DIAG,
    )


def identical_models(mixture: MixtureOfNormals | None = None) -> FittedModels:
    """Models whose two densities coincide pointwise: zero link, shared residual."""
    m = mixture if mixture is not None else MixtureOfNormals.single()
    return make_models(m0=m, residual=m, link_a=0.0, link_b=1.0)


def mixture_logpdf_highprec(weights, means, variances, y, dps: int = 60) -> float:
    """Arbitrary-precision mixture log density via mpmath."""
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for w, mu, var in zip(weights, means, variances):
            z = (mpmath.mpf(y) - mpmath.mpf(mu)) ** 2 / (2 * mpmath.mpf(var))
            total += mpmath.mpf(w) * mpmath.exp(-z) / mpmath.sqrt(2 * mpmath.pi * mpmath.mpf(var))
        return float(mpmath.log(total))


def mixture_pdf(m: MixtureOfNormals, y: np.ndarray) -> np.ndarray:
    """Mixture density through scipy, independent of the library implementation."""
    out = np.zeros_like(np.asarray(y, dtype=float))
    for w, mu, var in zip(m.weights, m.means, m.variances):
        out += w * norm.pdf(y, loc=mu, scale=math.sqrt(var))
    return out


def mixture_cdf(m: MixtureOfNormals, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(y, dtype=float))
    for w, mu, var in zip(m.weights, m.means, m.variances):
        out += w * norm.cdf(y, loc=mu, scale=math.sqrt(var))
    return out


def oracle_log_bf_point(models: FittedModels, x: float, y: np.ndarray) -> np.ndarray:
    """log m0(y) - log m1(y|x) from scipy densities."""
    with np.errstate(divide="ignore"):
        log_m0 = np.log(mixture_pdf(models.m0, y))
        shift = models.link_a * np.tanh(models.link_b * x)
        log_m1 = np.log(mixture_pdf(models.residual, np.asarray(y) - shift))
    return log_m0 - log_m1


def quadrature_pdc(
    models: FittedModels,
    x: float,
    k0: float,
    k1: float,
    p_h0: float,
    base_log_bf: float = 0.0,
    beta: float | None = None,
    lo: float = -20.0,
    hi: float = 20.0,
    n: int = 80001,
) -> float:
    """Trapezoid quadrature of the decisive-and-correct probability at one x.

    ``beta=None`` integrates the exact hard-indicator events; otherwise the
    smooth surrogate with that scale is integrated.
    """
    y = np.linspace(lo, hi, n)
    log_bf = base_log_bf + oracle_log_bf_point(models, x, y)
    bf = np.exp(np.clip(log_bf, -700, 700))
    f0 = mixture_pdf(models.m0, y)
    shift = models.link_a * np.tanh(models.link_b * x)
    f1 = mixture_pdf(models.residual, y - shift)
    if beta is None:
        i0 = (bf > k0).astype(float)
        i1 = (bf < k1).astype(float)
    else:
        i0 = np.exp(-np.maximum(k0 - bf, 0.0) / beta)
        i1 = np.exp(-np.maximum(bf - k1, 0.0) / beta)
    p0_term = np.trapezoid(f0 * i0, y)
    p1_term = np.trapezoid(f1 * i1, y)
    return p_h0 * p0_term + (1.0 - p_h0) * p1_term


def quadrature_info_gain(
    models: FittedModels,
    x: float,
    p_h0: float,
    base_log_bf: float = 0.0,
    lo: float = -20.0,
    hi: float = 20.0,
    n: int = 80001,
) -> float:
    """Trapezoid quadrature of the information-gain objective at one x."""
    y = np.linspace(lo, hi, n)
    p1 = 1.0 - p_h0
    log_bf = base_log_bf + oracle_log_bf_point(models, x, y)
    bf = np.exp(np.clip(log_bf, -700, 700))
    f0 = mixture_pdf(models.m0, y)
    shift = models.link_a * np.tanh(models.link_b * x)
    f1 = mixture_pdf(models.residual, y - shift)
    denom = bf * p_h0 + p1
    term0 = np.trapezoid(f0 * (log_bf - np.log(denom)), y) * p_h0
    term1 = np.trapezoid(f1 * (-np.log(denom)), y) * p1
    return term0 + term1


def central_difference(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def kink_free(models, base_log_bf, noise, cfg, x: float, h: float) -> bool:
    """True when no Monte-Carlo sample changes threshold side on [x-h, x+h].

    The decisive-evidence surrogate is piecewise smooth; a central difference
    is a valid derivative check only on stencils where every sample stays on
    one side of its ReLU kink.
    """
    from decint.pdc import candidate_log_bayes_factors

    sides = []
    for xx in (x - h, x + h):
        lb0, lb1, _, _ = candidate_log_bayes_factors(models, base_log_bf, noise, np.array([xx]))
        bf0 = np.exp(np.clip(lb0, -700, 700))
        bf1 = np.exp(np.clip(lb1, -700, 700))
        sides.append((bf0 > cfg.k0, bf1 > cfg.k1))
    return bool(
        np.array_equal(sides[0][0], sides[1][0]) and np.array_equal(sides[0][1], sides[1][1])
    )


def random_mixture(rng: np.random.Generator, k: int | None = None) -> MixtureOfNormals:
    """A valid random mixture for property probes."""
    k = k if k is not None else int(rng.integers(1, 4))
    raw = rng.uniform(0.2, 1.0, size=k)
    return MixtureOfNormals(
        weights=raw / raw.sum(),
        means=rng.uniform(-3.0, 3.0, size=k),
        variances=rng.uniform(0.3, 2.0, size=k),
    )
