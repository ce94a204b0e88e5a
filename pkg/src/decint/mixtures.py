"""Weighted univariate Gaussian mixtures.

This is the density workhorse for the whole package: the noise models of the
synthetic environments, the fitted marginal density of the outcome, and the
fitted residual density are all instances of :class:`MixtureOfNormals`.  All
likelihood arithmetic is done in log space with max-subtraction so that
products of many densities never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMixtureError

#: Smallest admissible component variance.  Imposed at construction and kept
#: during fitting so that a component can never collapse onto a single point.
VARIANCE_FLOOR = 1e-4

_LOG_2PI = math.log(2.0 * math.pi)
_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MixtureOfNormals:
    """Mixture ``sum_i w_i * N(mu_i, var_i)`` over the real line.

    Invariants enforced at construction:

    * at least one component,
    * weights nonnegative and summing to one (within ``1e-12``),
    * every variance at least :data:`VARIANCE_FLOOR` (smaller values are
      clamped up to the floor).

    Instances are immutable and safe to share between threads or processes.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self) -> None:
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.atleast_1d(np.asarray(self.means, dtype=float))
        var = np.atleast_1d(np.asarray(self.variances, dtype=float))
        if not (w.ndim == mu.ndim == var.ndim == 1):
            raise InvalidMixtureError("weights, means and variances must be 1-D")
        if not (len(w) == len(mu) == len(var)) or len(w) == 0:
            raise InvalidMixtureError(
                f"component count mismatch: {len(w)}, {len(mu)}, {len(var)}"
            )
        if not (np.isfinite(w).all() and np.isfinite(mu).all() and np.isfinite(var).all()):
            raise InvalidMixtureError("mixture parameters must be finite")
        if (w < 0).any():
            raise InvalidMixtureError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidMixtureError(f"weights sum to {w.sum()!r}, expected 1")
        var = np.maximum(var, VARIANCE_FLOOR)
        for name, arr in (("weights", w), ("means", mu), ("variances", var)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        """Number of components."""
        return len(self.weights)

    # cached per-component constants: log w_i - 0.5*(log 2pi + log var_i)
    _log_norm: np.ndarray = field(init=False, repr=False, default=None)

    def _component_constants(self) -> np.ndarray:
        cached = self._log_norm
        if cached is None:
            with np.errstate(divide="ignore"):
                logw = np.log(self.weights)
            cached = logw - 0.5 * (_LOG_2PI + np.log(self.variances))
            object.__setattr__(self, "_log_norm", cached)
        return cached

    def log_density(self, y) -> np.ndarray | float:
        """Log of the mixture density at ``y`` (scalar or any-shape array).

        Finite for every finite input: components with zero weight are skipped
        in the log-sum-exp, and the variance floor keeps each component proper.
        """
        scalar = np.isscalar(y) or np.ndim(y) == 0
        y = np.asarray(y, dtype=float)
        logcomp = self._component_logpdf(y)
        m = logcomp.max(axis=0)
        logcomp -= m
        np.exp(logcomp, out=logcomp)
        out = m + np.log(logcomp.sum(axis=0))
        return float(out) if scalar else out

    def log_density_grad(self, y) -> np.ndarray | float:
        """Derivative of :meth:`log_density` with respect to ``y``.

        Equals the responsibility-weighted sum of the per-component score
        functions ``-(y - mu_i) / var_i``.
        """
        return self.log_density_and_grad(y)[1]

    def log_density_and_grad(self, y) -> tuple[np.ndarray | float, np.ndarray | float]:
        """Fused evaluation of the log density and its ``y``-derivative.

        One shared responsibility computation; preferred in inner loops where
        both quantities are needed for the same points.
        """
        scalar = np.isscalar(y) or np.ndim(y) == 0
        y = np.asarray(y, dtype=float)
        shape = (self.k,) + (1,) * y.ndim
        diff = y[None, ...] - self.means.reshape(shape)
        dov = diff / self.variances.reshape(shape)
        logcomp = diff  # reuse the buffer: diff is not needed past this point
        logcomp *= dov
        logcomp *= -0.5
        logcomp += self._component_constants().reshape(shape)
        m = logcomp.max(axis=0)
        logcomp -= m
        p = np.exp(logcomp, out=logcomp)
        s = p.sum(axis=0)
        logpdf = m + np.log(s)
        dov *= p
        score = dov.sum(axis=0)
        score /= -s
        if scalar:
            return float(logpdf), float(score)
        return logpdf, score

    def _component_logpdf(self, y: np.ndarray) -> np.ndarray:
        """Per-component log densities, component axis first: shape (k, *y.shape)."""
        shape = (self.k,) + (1,) * y.ndim
        diff = y[None, ...] - self.means.reshape(shape)
        out = diff  # reuse
        out *= diff
        out *= -0.5 / self.variances.reshape(shape)
        out += self._component_constants().reshape(shape)
        return out

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. values: categorical component pick, then a normal draw.

        Deterministic for a given generator state.
        """
        if n < 0:
            raise ValueError("sample size must be nonnegative")
        idx = rng.choice(self.k, size=n, p=self.weights)
        return rng.normal(self.means[idx], np.sqrt(self.variances)[idx])

    def mean(self) -> float:
        return float(self.weights @ self.means)

    def to_dict(self) -> dict:
        """Flat record used by the experiment config/result formats."""
        return {
            "k": self.k,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "MixtureOfNormals":
        m = cls(
            weights=np.asarray(record["weights"], dtype=float),
            means=np.asarray(record["means"], dtype=float),
            variances=np.asarray(record["variances"], dtype=float),
        )
        if "k" in record and int(record["k"]) != m.k:
            raise InvalidMixtureError(
                f"declared k={record['k']} but found {m.k} components"
            )
        return m

    @classmethod
    def single(cls, mean: float = 0.0, variance: float = 1.0) -> "MixtureOfNormals":
        """Convenience constructor for a one-component mixture."""
        return cls(np.array([1.0]), np.array([float(mean)]), np.array([float(variance)]))
