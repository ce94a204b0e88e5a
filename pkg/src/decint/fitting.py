"""Maximum-likelihood estimation of the hypothesis-conditional outcome densities.

Two models are fitted from observational pairs and then frozen for the rest
of an episode:

* ``m0(y)`` - a Gaussian mixture for the marginal outcome density.  Under the
  no-edge hypothesis this is also the interventional density of Y.
* ``m1(y | x)`` - a tanh-link regression with mixture residuals,
  ``m1(y | x) = psi(y - a * tanh(b * x))``.  Under the causal hypothesis the
  same expression is the interventional density of Y at ``do(X=x)``.

Both fits maximize the data log likelihood with a full-batch sign-based
ascent (Rprop-style per-parameter step sizes) over unconstrained parameters:
softmax logits for the weights and a shifted log transform for the variances
so the variance floor can never be crossed.  A step that would lower the
objective is rejected and the steps shrink, which makes the recorded
objective trace non-decreasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, NonFiniteError
from .mixtures import VARIANCE_FLOOR, MixtureOfNormals
from .scm import Dataset, tanh_link, tanh_link_du

_LOG_2PI = math.log(2.0 * math.pi)

# Rprop constants: growth/shrink factors and step-size bounds.
_GROW = 1.2
_SHRINK = 0.5
_STEP_INIT = 0.02
_STEP_MIN = 1e-12
_STEP_MAX = 1.0


@dataclass(frozen=True)
class FitConfig:
    """Knobs of the maximum-likelihood fits."""

    n_components: int = 3
    restarts: int = 4
    max_iter: int = 2000
    #: stop once the objective improves by less than ``tol * n`` over ``window`` iterations
    tol: float = 1e-7
    window: int = 20

    def to_dict(self) -> dict:
        return {
            "n_components": self.n_components,
            "restarts": self.restarts,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "window": self.window,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "FitConfig":
        return cls(**record)


@dataclass(frozen=True)
class FitDiagnostics:
    """Outcome of one fit: final objective, effort spent, and the full trace."""

    log_likelihood: float
    iterations: int
    converged: bool
    objective_trace: tuple[float, ...]


@dataclass(frozen=True)
class FittedModels:
    """Frozen pair of hypothesis-conditional densities plus fit diagnostics."""

    m0: MixtureOfNormals
    link_a: float
    link_b: float
    residual: MixtureOfNormals
    m0_diagnostics: FitDiagnostics
    m1_diagnostics: FitDiagnostics

    def log_m0(self, y):
        """Log marginal outcome density (H0 interventional density)."""
        return self.m0.log_density(y)

    def log_m1(self, y, x):
        """Log conditional density ``psi(y - a*tanh(b*x))`` (H1 interventional density)."""
        return self.residual.log_density(np.asarray(y) - self.link_mean(x))

    def link_mean(self, x):
        return tanh_link(x, self.link_a, self.link_b)

    def link_mean_dx(self, x):
        return tanh_link_du(x, self.link_a, self.link_b)

    def to_dict(self) -> dict:
        return {
            "m0": self.m0.to_dict(),
            "link_a": self.link_a,
            "link_b": self.link_b,
            "residual": self.residual.to_dict(),
            "m0_log_likelihood": self.m0_diagnostics.log_likelihood,
            "m1_log_likelihood": self.m1_diagnostics.log_likelihood,
        }


# ---------------------------------------------------------------------------
# unconstrained mixture parameterization
# ---------------------------------------------------------------------------

def _softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - logits.max())
    return e / e.sum()


def _pack_mixture(weights, means, variances) -> np.ndarray:
    logits = np.log(np.maximum(weights, 1e-300))
    u = np.log(np.maximum(np.asarray(variances) - VARIANCE_FLOOR, 1e-12))
    return np.concatenate([logits, np.asarray(means, dtype=float), u])


def _unpack_mixture(theta: np.ndarray, k: int):
    weights = _softmax(theta[:k])
    means = theta[k : 2 * k]
    variances = VARIANCE_FLOOR + np.exp(theta[2 * k : 3 * k])
    return weights, means, variances


def _mixture_loglik_grad(e: np.ndarray, theta: np.ndarray, k: int):
    """Total log likelihood of points ``e`` under the packed mixture, with
    gradient in the unconstrained parameterization.  Also returns the
    per-point score d/de log p(e) needed by the joint link fit."""
    weights, means, variances = _unpack_mixture(theta, k)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    # component axis first: reductions over axis 0 keep the long axis contiguous
    diff = e[None, :] - means[:, None]
    dov = diff / variances[:, None]
    logcomp = (logw - 0.5 * (_LOG_2PI + np.log(variances)))[:, None] - 0.5 * diff * dov
    m = logcomp.max(axis=0)
    p = np.exp(logcomp - m)
    s = p.sum(axis=0)
    loglik = float((m + np.log(s)).sum())
    resp = p
    resp /= s

    rd = resp * dov
    r0 = resp.sum(axis=1)
    d_means = rd.sum(axis=1)
    score = -rd.sum(axis=0)
    d_var = ((rd * diff).sum(axis=1) - r0) / (2.0 * variances)
    d_u = d_var * (variances - VARIANCE_FLOOR)
    d_logits = r0 - len(e) * weights
    grad = np.concatenate([d_logits, d_means, d_u])
    return loglik, grad, score


# ---------------------------------------------------------------------------
# monotone sign-based ascent
# ---------------------------------------------------------------------------

def _rprop_maximize(fun, theta0: np.ndarray, cfg: FitConfig, scale: float):
    """Maximize ``fun`` (returning (value, grad)) from ``theta0``.

    A proposal that does not improve the objective is discarded and all step
    sizes shrink, so the returned trace is non-decreasing.  ``scale`` sets the
    absolute convergence tolerance (``cfg.tol * scale`` over ``cfg.window``).
    """
    theta = np.asarray(theta0, dtype=float).copy()
    f, g = fun(theta)
    if not np.isfinite(f):
        raise NonFiniteError("objective is non-finite at the initial point")
    steps = np.full_like(theta, _STEP_INIT)
    trace = [f]
    tol_abs = cfg.tol * scale
    converged = False
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        for _ in range(cfg.max_iter):
            proposal = theta + steps * np.sign(g)
            f_try, g_try = fun(proposal)
            if np.isfinite(f_try) and f_try >= f:
                agree = g_try * g
                steps = np.where(agree > 0, steps * _GROW, steps)
                steps = np.where(agree < 0, steps * _SHRINK, steps)
                np.clip(steps, _STEP_MIN, _STEP_MAX, out=steps)
                theta, f, g = proposal, f_try, g_try
            else:
                steps *= _SHRINK
                np.clip(steps, _STEP_MIN, _STEP_MAX, out=steps)
            trace.append(f)
            if len(trace) > cfg.window and trace[-1] - trace[-1 - cfg.window] < tol_abs:
                converged = True
                break
    return theta, f, tuple(trace), converged


# ---------------------------------------------------------------------------
# public fits
# ---------------------------------------------------------------------------

def _check_sample_size(n: int, k: int) -> None:
    if n < 10 * k:
        raise DegenerateDataError(
            f"need at least {10 * k} points to fit {k} components, got {n}"
        )


def _m0_init(ys: np.ndarray, k: int, restart: int, rng: np.random.Generator) -> np.ndarray:
    var = max(float(np.var(ys)), 10 * VARIANCE_FLOOR)
    if restart == 0:
        means = np.quantile(ys, (np.arange(k) + 0.5) / k)
        variances = np.full(k, var)
    else:
        means = rng.choice(ys, size=k, replace=False)
        variances = var * np.exp(rng.uniform(-1.0, 1.0, size=k))
    return _pack_mixture(np.full(k, 1.0 / k), means, variances)


def _fit_m0_full(
    obs: Dataset, k: int, cfg: FitConfig, rng: np.random.Generator
) -> tuple[MixtureOfNormals, FitDiagnostics]:
    ys = obs.ys
    _check_sample_size(len(ys), k)
    if np.ptp(ys) == 0.0:
        raise DegenerateDataError("all outcome values identical; marginal fit is degenerate")

    def objective(theta):
        loglik, grad, _ = _mixture_loglik_grad(ys, theta, k)
        return loglik, grad

    best = None
    for restart in range(max(1, cfg.restarts)):
        theta0 = _m0_init(ys, k, restart, rng)
        theta, f, trace, converged = _rprop_maximize(objective, theta0, cfg, scale=len(ys))
        if best is None or f > best[1]:
            best = (theta, f, trace, converged)
    theta, f, trace, converged = best
    if not np.isfinite(f):
        raise NonFiniteError("marginal fit objective is non-finite")
    weights, means, variances = _unpack_mixture(theta, k)
    mixture = MixtureOfNormals(weights, means, variances)
    diag = FitDiagnostics(f, len(trace) - 1, converged, trace)
    return mixture, diag


def fit_m0(
    obs: Dataset, k: int, cfg: FitConfig, rng: np.random.Generator
) -> MixtureOfNormals:
    """Fit the marginal outcome mixture by maximum likelihood (best of restarts)."""
    return _fit_m0_full(obs, k, cfg, rng)[0]


def _coarse_link_init(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Least-squares amplitude over a coarse slope grid; slope 1 wins ties."""
    best = None
    for b in (1.0, 0.5, 2.0, 0.25, 4.0):
        t = np.tanh(b * xs)
        denom = float(t @ t)
        a = float(ys @ t) / denom if denom > 1e-12 else 0.0
        sse = float(((ys - a * t) ** 2).sum())
        if best is None or sse < best[0]:
            best = (sse, a, b)
    return best[1], best[2]


def _fit_m1_full(
    obs: Dataset, k: int, cfg: FitConfig, rng: np.random.Generator
) -> tuple[tuple[float, float], MixtureOfNormals, FitDiagnostics]:
    xs, ys = obs.xs, obs.ys
    _check_sample_size(len(ys), k)
    if np.ptp(xs) == 0.0:
        raise DegenerateDataError("all x values identical; link fit is degenerate")

    a0, b0 = _coarse_link_init(xs, ys)

    def objective(theta):
        a, b = theta[0], theta[1]
        t = np.tanh(b * xs)
        e = ys - a * t
        loglik, mix_grad, score = _mixture_loglik_grad(e, theta[2:], k)
        d_a = float(-(score @ t))
        d_b = float(-a * (score @ (xs * (1.0 - t * t))))
        return loglik, np.concatenate([[d_a, d_b], mix_grad])

    best = None
    for restart in range(max(1, cfg.restarts)):
        if restart == 0:
            a_init, b_init = a0, b0
        else:
            a_init = a0 * math.exp(rng.normal(0.0, 0.15)) + rng.normal(0.0, 0.05)
            b_init = b0 * math.exp(rng.normal(0.0, 0.15))
        resid = ys - tanh_link(xs, a_init, b_init)
        theta0 = np.concatenate([[a_init, b_init], _m0_init(resid, k, restart, rng)])
        theta, f, trace, converged = _rprop_maximize(objective, theta0, cfg, scale=len(ys))
        if best is None or f > best[1]:
            best = (theta, f, trace, converged)
    theta, f, trace, converged = best
    if not np.isfinite(f):
        raise NonFiniteError("link fit objective is non-finite")
    a_hat, b_hat = float(theta[0]), float(theta[1])
    if b_hat < 0:  # (a, b) and (-a, -b) define the same link; report b >= 0
        a_hat, b_hat = -a_hat, -b_hat
    weights, means, variances = _unpack_mixture(theta[2:], k)
    residual = MixtureOfNormals(weights, means, variances)
    diag = FitDiagnostics(f, len(trace) - 1, converged, trace)
    return (a_hat, b_hat), residual, diag


def fit_m1(
    obs: Dataset, k: int, cfg: FitConfig, rng: np.random.Generator
) -> tuple[tuple[float, float], MixtureOfNormals]:
    """Jointly fit the tanh link and the residual mixture by maximum likelihood."""
    link, residual, _ = _fit_m1_full(obs, k, cfg, rng)
    return link, residual


def fit_models(obs: Dataset, cfg: FitConfig, rng: np.random.Generator) -> FittedModels:
    """Fit both hypothesis-conditional models from one observational dataset.

    The two fits consume the supplied generator in a fixed order (marginal
    first), so the result is deterministic for a given generator state.
    """
    m0, m0_diag = _fit_m0_full(obs, cfg.n_components, cfg, rng)
    (a_hat, b_hat), residual, m1_diag = _fit_m1_full(obs, cfg.n_components, cfg, rng)
    return FittedModels(
        m0=m0,
        link_a=a_hat,
        link_b=b_hat,
        residual=residual,
        m0_diagnostics=m0_diag,
        m1_diagnostics=m1_diag,
    )
