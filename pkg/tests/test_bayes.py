"""Bayes factor arithmetic, evidence categories, posterior updates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decint.bayes import (
    EvidenceLevel,
    HypothesisPosterior,
    bf01_from_log,
    classify_evidence,
    classify_evidence_log,
    log_bf01,
    point_log_bf,
    update_posterior,
)
from decint.errors import NonPositiveBayesFactorError
from decint.mixtures import MixtureOfNormals
from decint.scm import Dataset, DatasetKind

from helpers import identical_models, make_models

# interior probe -> category, plus every boundary assigned to the stronger side
EVIDENCE_TABLE = [
    (150.0, EvidenceLevel.EXTREME_H0),
    (100.0, EvidenceLevel.EXTREME_H0),
    (50.0, EvidenceLevel.VERY_STRONG_H0),
    (30.0, EvidenceLevel.VERY_STRONG_H0),
    (20.0, EvidenceLevel.STRONG_H0),
    (10.0, EvidenceLevel.STRONG_H0),
    (5.0, EvidenceLevel.MODERATE_H0),
    (3.0, EvidenceLevel.MODERATE_H0),
    (2.0, EvidenceLevel.ANECDOTAL_H0),
    (1.0, EvidenceLevel.NO_EVIDENCE),
    (0.5, EvidenceLevel.ANECDOTAL_H1),
    (1 / 3, EvidenceLevel.MODERATE_H1),
    (0.2, EvidenceLevel.MODERATE_H1),
    (1 / 10, EvidenceLevel.STRONG_H1),
    (0.05, EvidenceLevel.STRONG_H1),
    (1 / 30, EvidenceLevel.VERY_STRONG_H1),
    (0.02, EvidenceLevel.VERY_STRONG_H1),
    (1 / 100, EvidenceLevel.EXTREME_H1),
    (0.005, EvidenceLevel.EXTREME_H1),
]


class TestClassification:
    @pytest.mark.parametrize("bf,expected", EVIDENCE_TABLE)
    def test_table(self, bf, expected):
        assert classify_evidence(bf) is expected

    @pytest.mark.parametrize("bf,expected", EVIDENCE_TABLE)
    def test_log_variant_agrees(self, bf, expected):
        assert classify_evidence_log(math.log(bf)) is expected

    def test_log_variant_handles_extreme_magnitudes(self):
        assert classify_evidence_log(5000.0) is EvidenceLevel.EXTREME_H0
        assert classify_evidence_log(-5000.0) is EvidenceLevel.EXTREME_H1

    def test_non_positive_rejected(self):
        for bad in (0.0, -1.0, float("nan")):
            with pytest.raises(NonPositiveBayesFactorError):
                classify_evidence(bad)

    @given(st.floats(min_value=1e-280, max_value=1e280, allow_nan=False))
    @settings(max_examples=300, deadline=None)
    def test_mirror_property(self, bf):
        assert classify_evidence(bf).mirror is classify_evidence(1.0 / bf)

    def test_all_eleven_categories_reachable(self):
        seen = {classify_evidence(bf) for bf, _ in EVIDENCE_TABLE}
        assert seen == set(EvidenceLevel)


class TestBayesFactorAccumulation:
    def test_empty_dataset_is_zero(self):
        models = make_models()
        empty = Dataset.empty(DatasetKind.INTERVENTIONAL)
        assert log_bf01(models, empty) == 0.0

    def test_single_point_closed_form(self):
        # m0 = N(0,1), m1(y|x) = N(2 tanh x, 1): at (x=1, y=0) the log ratio
        # reduces to (2 tanh 1)^2 / 2
        models = make_models()
        ds = Dataset(np.array([1.0]), np.array([0.0]), DatasetKind.INTERVENTIONAL)
        expected = (2 * math.tanh(1.0)) ** 2 / 2
        assert log_bf01(models, ds) == pytest.approx(expected, rel=1e-12)

    def test_identical_densities_give_zero(self):
        models = identical_models()
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=40), rng.normal(size=40), DatasetKind.INTERVENTIONAL)
        assert log_bf01(models, ds) == 0.0

    def test_requires_interventional_kind(self):
        models = make_models()
        ds = Dataset(np.array([1.0]), np.array([0.0]), DatasetKind.OBSERVATIONAL)
        with pytest.raises(ValueError):
            log_bf01(models, ds)

    def test_additive_over_disjoint_datasets(self):
        models = make_models(
            m0=MixtureOfNormals(np.array([0.6, 0.4]), np.array([0.0, 1.0]), np.array([1.0, 0.5]))
        )
        rng = np.random.default_rng(1)
        xs, ys = rng.normal(size=30), rng.normal(size=30)
        full = log_bf01(models, Dataset(xs, ys, DatasetKind.INTERVENTIONAL))
        left = log_bf01(models, Dataset(xs[:11], ys[:11], DatasetKind.INTERVENTIONAL))
        right = log_bf01(models, Dataset(xs[11:], ys[11:], DatasetKind.INTERVENTIONAL))
        assert full == pytest.approx(left + right, abs=1e-12)

    def test_prefix_accumulation_exact(self):
        # a running sum over a growing dataset reproduces prefix values exactly
        models = make_models()
        rng = np.random.default_rng(2)
        xs, ys = rng.normal(size=25), rng.normal(size=25)
        running = 0.0
        for m in range(1, 26):
            running += point_log_bf(models, float(xs[m - 1]), float(ys[m - 1]))
            prefix = log_bf01(models, Dataset(xs[:m], ys[:m], DatasetKind.INTERVENTIONAL))
            assert prefix == running


class TestPosterior:
    def test_uniform_prior(self):
        p = HypothesisPosterior.uniform()
        assert p.p_h0 == 0.5
        assert p.p_h1 == 0.5

    def test_no_evidence_keeps_prior(self):
        p = update_posterior(HypothesisPosterior.uniform(), 0.0)
        assert (p.p_h0, p.p_h1) == (0.5, 0.5)

    def test_bayes_factor_ten(self):
        p = update_posterior(HypothesisPosterior.uniform(), math.log(10.0))
        assert p.p_h0 == pytest.approx(10 / 11, rel=1e-12)
        assert p.p_h1 == pytest.approx(1 / 11, rel=1e-12)

    def test_probabilities_sum_to_one_exactly(self):
        for lo in (-31.2, -0.7, 0.0, 2.4, 55.0):
            p = HypothesisPosterior(lo)
            assert p.p_h0 + p.p_h1 == 1.0

    def test_sequential_equals_batch(self):
        a, b = math.log(3.0), math.log(0.4)
        seq = update_posterior(update_posterior(HypothesisPosterior.uniform(), a), b)
        batch = update_posterior(HypothesisPosterior.uniform(), a + b)
        assert seq.log_odds_h0 == pytest.approx(batch.log_odds_h0, abs=1e-15)

    def test_order_invariant(self):
        models = make_models()
        rng = np.random.default_rng(4)
        xs, ys = rng.normal(size=20), rng.normal(size=20)
        perm = rng.permutation(20)
        p1 = update_posterior(
            HypothesisPosterior.uniform(),
            log_bf01(models, Dataset(xs, ys, DatasetKind.INTERVENTIONAL)),
        )
        p2 = update_posterior(
            HypothesisPosterior.uniform(),
            log_bf01(models, Dataset(xs[perm], ys[perm], DatasetKind.INTERVENTIONAL)),
        )
        assert p1.log_odds_h0 == pytest.approx(p2.log_odds_h0, abs=1e-10)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            update_posterior(HypothesisPosterior.uniform(), float("nan"))


class TestMaterialization:
    def test_clamp_flag(self):
        bf, clamped = bf01_from_log(10.0)
        assert not clamped
        assert bf == pytest.approx(math.exp(10.0))
        big, clamped = bf01_from_log(10_000.0)
        assert clamped
        assert np.isfinite(big)
        small, clamped = bf01_from_log(-10_000.0)
        assert clamped
        assert small > 0.0
