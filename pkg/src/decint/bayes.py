"""Bayes-factor accumulation, evidence categories, and posterior updates.

The Bayes factor compared here is BF01 = P(data | H0) / P(data | H1) with the
two hypothesis-conditional densities supplied by fitted models: the marginal
outcome density under "no edge" (H0) and the shifted residual density under
"X causes Y" (H1).  Values above 1 favour H0.  Everything is tracked in log
space; the raw factor is materialized only for classification and reporting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import NonPositiveBayesFactorError
from .scm import Dataset, DatasetKind

#: exp() clamp used when a raw Bayes factor has to be materialized.
LOG_BF_CLAMP = 700.0


class EvidenceLevel(enum.Enum):
    """Jeffreys-style qualitative strength categories for BF01."""

    EXTREME_H0 = "extreme_h0"
    VERY_STRONG_H0 = "very_strong_h0"
    STRONG_H0 = "strong_h0"
    MODERATE_H0 = "moderate_h0"
    ANECDOTAL_H0 = "anecdotal_h0"
    NO_EVIDENCE = "no_evidence"
    ANECDOTAL_H1 = "anecdotal_h1"
    MODERATE_H1 = "moderate_h1"
    STRONG_H1 = "strong_h1"
    VERY_STRONG_H1 = "very_strong_h1"
    EXTREME_H1 = "extreme_h1"

    @property
    def mirror(self) -> "EvidenceLevel":
        """The category obtained by swapping the roles of H0 and H1."""
        order = list(EvidenceLevel)
        return order[len(order) - 1 - order.index(self)]


#: Category boundaries on the H0 side; the H1 side uses their reciprocals.
EVIDENCE_BOUNDARIES = (100.0, 30.0, 10.0, 3.0)

_H0_LEVELS = (
    EvidenceLevel.EXTREME_H0,
    EvidenceLevel.VERY_STRONG_H0,
    EvidenceLevel.STRONG_H0,
    EvidenceLevel.MODERATE_H0,
)


def classify_evidence(bf01: float) -> EvidenceLevel:
    """Map a Bayes factor onto its evidence category.

    A value lying exactly on a boundary is assigned to the stronger of the
    two adjacent categories (30 counts as very strong, 1/30 as very strong
    for H1); exactly 1 is "no evidence".
    """
    if not bf01 > 0.0 or math.isnan(bf01):
        raise NonPositiveBayesFactorError(f"Bayes factor must be > 0, got {bf01!r}")
    if bf01 > 1.0:
        for bound, level in zip(EVIDENCE_BOUNDARIES, _H0_LEVELS):
            if bf01 >= bound:
                return level
        return EvidenceLevel.ANECDOTAL_H0
    if bf01 == 1.0:
        return EvidenceLevel.NO_EVIDENCE
    for bound, level in zip(EVIDENCE_BOUNDARIES, _H0_LEVELS):
        if bf01 <= 1.0 / bound:
            return level.mirror
    return EvidenceLevel.ANECDOTAL_H1


# thresholds in log space; the reciprocal side is logged separately because
# log(1/b) and -log(b) differ in the last ulp and boundary ties must match
# the linear classifier exactly
_LOG_BOUNDS_H0 = tuple(math.log(b) for b in EVIDENCE_BOUNDARIES)
_LOG_BOUNDS_H1 = tuple(math.log(1.0 / b) for b in EVIDENCE_BOUNDARIES)


def classify_evidence_log(log_bf01: float) -> EvidenceLevel:
    """Classify directly from log BF01, avoiding overflow for extreme values."""
    if math.isnan(log_bf01):
        raise NonPositiveBayesFactorError("log Bayes factor is NaN")
    if log_bf01 == 0.0:
        return EvidenceLevel.NO_EVIDENCE
    if log_bf01 > 0.0:
        for bound, level in zip(_LOG_BOUNDS_H0, _H0_LEVELS):
            if log_bf01 >= bound:
                return level
        return EvidenceLevel.ANECDOTAL_H0
    for bound, level in zip(_LOG_BOUNDS_H1, _H0_LEVELS):
        if log_bf01 <= bound:
            return level.mirror
    return EvidenceLevel.ANECDOTAL_H1


def bf01_from_log(log_bf01: float) -> tuple[float, bool]:
    """Materialize a raw Bayes factor from its log, clamping to a representable range.

    Returns ``(bf, clamped)`` where ``clamped`` flags that the log value was
    outside ``[-LOG_BF_CLAMP, LOG_BF_CLAMP]`` and the result saturated.
    """
    clamped = abs(log_bf01) > LOG_BF_CLAMP
    return math.exp(max(-LOG_BF_CLAMP, min(LOG_BF_CLAMP, log_bf01))), clamped


@dataclass(frozen=True)
class HypothesisPosterior:
    """Two-hypothesis posterior stored as log odds in favour of H0.

    The implied probabilities always satisfy ``p_h0 + p_h1 == 1`` exactly
    because ``p_h1`` is defined as ``1 - p_h0``.
    """

    log_odds_h0: float = 0.0

    def __post_init__(self) -> None:
        if math.isnan(self.log_odds_h0):
            raise ValueError("log odds must not be NaN")

    @property
    def p_h0(self) -> float:
        return _sigmoid(self.log_odds_h0)

    @property
    def p_h1(self) -> float:
        return 1.0 - self.p_h0

    @classmethod
    def uniform(cls) -> "HypothesisPosterior":
        return cls(0.0)


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def point_log_bf(models, x: float, y: float) -> float:
    """Log likelihood ratio of a single interventional pair under the fitted models."""
    return models.log_m0(y) - models.log_m1(y, x)


def log_bf01(models, data: Dataset) -> float:
    """Log Bayes factor of an interventional dataset under the fitted models.

    Sums the per-point log ratios left to right, which makes a running
    accumulation over a growing dataset reproduce prefix values exactly.
    """
    if data.kind is not DatasetKind.INTERVENTIONAL:
        raise ValueError("Bayes factors are computed over interventional data only")
    total = 0.0
    for x, y in zip(data.xs, data.ys):
        total += point_log_bf(models, float(x), float(y))
    return total


def update_posterior(prior: HypothesisPosterior, log_bf_total: float) -> HypothesisPosterior:
    """Bayes update of the hypothesis posterior by a (log) Bayes factor.

    In log-odds form the update is a plain addition, so applying factors one
    at a time or all at once gives the same posterior.
    """
    if math.isnan(log_bf_total):
        raise ValueError("log Bayes factor must not be NaN")
    return HypothesisPosterior(prior.log_odds_h0 + log_bf_total)
