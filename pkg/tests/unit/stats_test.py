"""Unit tests for rank tests and correlations."""

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from teamform.domain.errors import ContractError
from teamform.operations.stats import mann_whitney_u, pearson, spearman, trend_line


class TestMannWhitney:
    """Test the two-sided Mann-Whitney U test."""

    def test_complete_separation(self):
        """Three below three: U = 0 and p = 2/20."""
        u, p = mann_whitney_u([1, 2, 3], [4, 5, 6])
        assert u == 0
        assert p == pytest.approx(0.1)

    def test_exact_matches_scipy(self):
        """Enumeration agrees with scipy's exact distribution on tie-free samples."""
        rng = np.random.default_rng(0)
        for _ in range(10):
            pooled = rng.permutation(np.arange(16)).astype(float)
            a, b = pooled[:7], pooled[7:]
            u, p = mann_whitney_u(a, b)
            expected = scipy_stats.mannwhitneyu(a, b, alternative="two-sided", method="exact")
            assert u == pytest.approx(expected.statistic)
            assert p == pytest.approx(expected.pvalue)

    def test_normal_approximation_matches_scipy(self):
        """Large samples with ties use the corrected normal approximation."""
        rng = np.random.default_rng(1)
        a = rng.integers(0, 6, size=30).astype(float)
        b = rng.integers(1, 7, size=25).astype(float)
        u, p = mann_whitney_u(a, b)
        expected = scipy_stats.mannwhitneyu(
            a, b, alternative="two-sided", method="asymptotic", use_continuity=True
        )
        assert u == pytest.approx(expected.statistic)
        assert p == pytest.approx(expected.pvalue)

    @pytest.mark.parametrize("size", [3, 15])
    def test_identical_constant_samples(self, size):
        """No evidence of a difference."""
        _, p = mann_whitney_u([0.5] * size, [0.5] * size)
        assert p == 1.0

    def test_empty_sample(self):
        """Both samples need observations."""
        with pytest.raises(ContractError):
            mann_whitney_u([], [1.0])


class TestCorrelation:
    """Test correlation coefficients."""

    def test_pearson_matches_scipy(self):
        """Pearson r."""
        rng = np.random.default_rng(2)
        x = rng.normal(size=40)
        y = 0.5 * x + rng.normal(size=40)
        assert pearson(x, y) == pytest.approx(scipy_stats.pearsonr(x, y)[0])

    def test_spearman_matches_scipy(self):
        """Spearman rho with ties."""
        x = [0, 1, 2, 2, 3, 4, 5, 5]
        y = [0.1, 0.3, 0.2, 0.2, 0.5, 0.4, 0.9, 0.7]
        assert spearman(x, y) == pytest.approx(scipy_stats.spearmanr(x, y)[0])

    def test_perfect_monotone(self):
        """A monotone transform has rank correlation one."""
        assert spearman([1, 2, 3, 4], [1, 8, 27, 64]) == pytest.approx(1.0)

    def test_constant_sample_is_nan(self):
        """Correlation with a constant is undefined."""
        assert math.isnan(pearson([1, 2, 3], [4, 4, 4]))

    def test_length_mismatch(self):
        """Paired samples must align."""
        with pytest.raises(ContractError):
            pearson([1, 2, 3], [1, 2])


class TestTrendLine:
    """Test least-squares trend lines."""

    def test_exact_line(self):
        """Points on a line recover it."""
        slope, intercept = trend_line([0, 1, 2], [1, 3, 5])
        assert slope == pytest.approx(2)
        assert intercept == pytest.approx(1)

    def test_constant_x(self):
        """A vertical cloud gives a flat line through the mean."""
        assert trend_line([2, 2, 2], [1, 2, 3]) == (0.0, 2.0)
