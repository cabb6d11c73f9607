#!/usr/bin/env python3
"""
Group statistics: one-sample t summaries and the interaction regression
"""

import numpy as np
import pytest

from core.exceptions import DegenerateDesign, LengthMismatch, NonFiniteData, TooFewSamples
from harness.analysis import COEFFICIENT_NAMES, interaction_regression, pearson_r, summary_stats


def _correlated(rng, n, r):
    a = rng.standard_normal(n)
    b = r * a + np.sqrt(1 - r ** 2) * rng.standard_normal(n)
    return a, b


class TestSummaryStats:
    def test_t_statistic(self, rng):
        v = rng.normal(0.3, 1.0, 50)
        s = summary_stats(v)
        assert s.n == 50
        assert s.mean == pytest.approx(v.mean())
        assert s.std == pytest.approx(v.std(ddof=1))
        assert s.t == pytest.approx(v.mean() / (v.std(ddof=1) / np.sqrt(50)))
        assert 0.0 <= s.p <= 1.0

    def test_constant_zero(self):
        s = summary_stats([0.0, 0.0, 0.0])
        assert (s.t, s.p) == (0.0, 1.0)

    def test_constant_nonzero(self):
        s = summary_stats([2.0, 2.0])
        assert s.t == np.inf
        assert s.p == 0.0
        assert summary_stats([-1.0, -1.0]).t == -np.inf

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            summary_stats([1.0])

    def test_non_finite(self):
        with pytest.raises(NonFiniteData):
            summary_stats([1.0, np.nan, 2.0])

    def test_null_calibration(self, rng):
        p = np.array([summary_stats(rng.standard_normal(20)).p for _ in range(2000)])
        assert np.mean(p < 0.05) == pytest.approx(0.05, abs=0.015)


class TestPearsonR:
    def test_matches_corrcoef(self, rng):
        a, b = _correlated(rng, 100, 0.6)
        assert pearson_r(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)

    def test_perfect(self):
        assert pearson_r([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_constant_input(self):
        with pytest.raises(DegenerateDesign):
            pearson_r([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson_r([1, 2, 3], [1, 2])


class TestInteractionRegression:
    def test_identical_outcomes(self, rng):
        a_nmi, a_numit = rng.standard_normal(30), rng.standard_normal(30)
        fit = interaction_regression(a_nmi, a_numit, a_nmi, a_numit)
        np.testing.assert_allclose(fit.beta, (0.0, 1.0, 0.0, 0.0), atol=1e-9)
        assert fit.r_nmi == pytest.approx(1.0)

    def test_slopes_are_group_correlations(self, rng):
        a_nmi, b_nmi = _correlated(rng, 200, 0.3)
        a_numit, b_numit = _correlated(rng, 200, 0.8)
        fit = interaction_regression(a_nmi, a_numit, b_nmi, b_numit)
        assert fit.beta[1] == pytest.approx(fit.r_nmi, abs=1e-9)
        assert fit.beta[1] + fit.beta[3] == pytest.approx(fit.r_numit, abs=1e-9)

    def test_detects_stronger_relationship(self, rng):
        a_nmi, b_nmi = _correlated(rng, 200, 0.0)
        a_numit, b_numit = _correlated(rng, 200, 0.9)
        fit = interaction_regression(a_nmi, a_numit, b_nmi, b_numit)
        assert fit.beta[3] > 0.5
        assert fit.p_values[3] < 1e-6
        assert fit.n == 200

    def test_no_interaction(self, rng):
        a_nmi, b_nmi = _correlated(rng, 200, 0.5)
        a_numit, b_numit = _correlated(rng, 200, 0.5)
        fit = interaction_regression(a_nmi, a_numit, b_nmi, b_numit)
        assert abs(fit.beta[3]) < 0.25

    def test_global_standardisation(self, rng):
        a_nmi, b_nmi = _correlated(rng, 100, 0.2)
        a_numit, b_numit = _correlated(rng, 100, 0.7)
        fit = interaction_regression(a_nmi, a_numit, 3 * b_nmi + 1, b_numit, standardize="global")
        assert fit.standardize == "global"
        assert fit.beta[3] > 0

    def test_coefficient_table(self, rng):
        a_nmi, b_nmi = _correlated(rng, 20, 0.2)
        table = interaction_regression(a_nmi, a_nmi + 1, b_nmi, b_nmi).coefficient_table()
        assert table["term"] == list(COEFFICIENT_NAMES)
        assert all(len(v) == 4 for v in table.values())

    def test_too_few_pairs(self):
        with pytest.raises(DegenerateDesign):
            interaction_regression([1, 2, 3], [1, 2, 4], [2, 1, 3], [3, 1, 2])

    def test_constant_column(self, rng):
        v = rng.standard_normal(10)
        with pytest.raises(DegenerateDesign):
            interaction_regression(np.ones(10), v, v, v)

    def test_length_mismatch(self, rng):
        v = rng.standard_normal(10)
        with pytest.raises(LengthMismatch):
            interaction_regression(v, v, v, v[:9])

    def test_unknown_standardisation(self, rng):
        v = rng.standard_normal(10)
        with pytest.raises(ValueError):
            interaction_regression(v, v, v, v, standardize="rank")
