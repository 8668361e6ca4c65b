"""
Tests for Kozachenko-Leonenko entropy and scalar MI estimation
"""
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slicedmi.exceptions import DegenerateDistanceError, InsufficientSamplesError, InvalidDimensionError
from slicedmi.models.settings import KnnConfig
from slicedmi.services.knn_service import (
    brute_force_knn_distances, jitter_degenerate_pair, kl_entropy, kl_entropy_multivariate, kl_mi_1d,
    knn_distances, log_unit_ball_volume,
)
from slicedmi.services.sampling_service import SeededRng

STRICT = KnnConfig(k=3, degeneracy_policy='error')
HALF_LOG_2PIE = 0.5 * math.log(2 * math.pi * math.e)


class TestKnnDistances:
    """Test suite for neighbor search"""

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_fast_path_matches_brute_force(self, d, k):
        samples = SeededRng(100 + d * 10 + k).standard_normal((200, d))
        fast = knn_distances(samples, k)
        reference = brute_force_knn_distances(samples, k)
        assert np.allclose(fast, reference, rtol=1e-12, atol=0)

    def test_one_dimensional_exact(self):
        """Sorted-gap search returns the exact absolute differences"""
        samples = np.array([0.0, 1.0, 3.0, 7.0])
        assert np.array_equal(knn_distances(samples, 1), [1.0, 1.0, 2.0, 4.0])
        assert np.array_equal(knn_distances(samples, 2), [3.0, 2.0, 3.0, 6.0])

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamplesError):
            knn_distances(np.arange(3.0), 3)

    def test_unit_ball_constants(self):
        assert log_unit_ball_volume(1) == math.log(2.0)
        assert log_unit_ball_volume(2) == math.log(math.pi)
        assert log_unit_ball_volume(3) == pytest.approx(math.log(4.0 / 3.0 * math.pi), abs=1e-12)


class TestKlEntropy:
    """Test suite for kl_entropy"""

    def test_uniform(self):
        """Unif[0, 1] has entropy 0"""
        samples = SeededRng(1).uniform(0.0, 1.0, 10 ** 5)
        assert -0.02 <= kl_entropy(samples, STRICT).value <= 0.02

    def test_standard_normal(self):
        samples = SeededRng(2).standard_normal(10 ** 5)
        assert 1.40 <= kl_entropy(samples, STRICT).value <= 1.44

    def test_estimate_record(self):
        estimate = kl_entropy(SeededRng(3).standard_normal(50), KnnConfig(k=4))
        assert estimate.n == 50
        assert estimate.k == 4
        assert math.isfinite(estimate.value)

    def test_constant_samples_error_policy(self):
        with pytest.raises(DegenerateDistanceError):
            kl_entropy(np.ones(100), STRICT)

    def test_constant_samples_jitter_policy(self, caplog):
        """Jitter policy recovers with a warning"""
        with caplog.at_level(logging.WARNING):
            estimate = kl_entropy(np.ones(100), KnnConfig(k=3), SeededRng(4))
        assert math.isfinite(estimate.value)
        assert 'jittering' in caplog.text

    def test_jitter_is_seeded(self):
        samples = np.repeat(np.arange(20.0), 5)
        first = kl_entropy(samples, KnnConfig(), SeededRng(8)).value
        second = kl_entropy(samples, KnnConfig(), SeededRng(8)).value
        assert first == second

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            kl_entropy(np.arange(3.0), KnnConfig(k=3))

    def test_dimension_limit(self):
        with pytest.raises(InvalidDimensionError):
            kl_entropy(np.zeros((10, 3)))

    def test_translation_exact_on_integer_grid(self):
        """Shifts that are exact in floating point leave the estimate unchanged"""
        samples = SeededRng(5).permutation(1000).astype(float)
        assert kl_entropy(samples + 4096.0, STRICT).value == kl_entropy(samples, STRICT).value

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32), shift=st.floats(-100, 100))
    def test_translation_invariance(self, seed, shift):
        samples = SeededRng(seed).standard_normal((300, 2))
        shifted = kl_entropy(samples + shift, STRICT).value
        assert shifted == pytest.approx(kl_entropy(samples, STRICT).value, abs=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 32),
           scale=st.floats(0.01, 100).flatmap(lambda a: st.sampled_from([a, -a])),
           d=st.sampled_from([1, 2]))
    def test_scaling_covariance(self, seed, scale, d):
        """H(a x) = H(x) + d log|a|"""
        samples = SeededRng(seed).standard_normal((300, d))
        scaled = kl_entropy(samples * scale, STRICT).value
        expected = kl_entropy(samples, STRICT).value + d * math.log(abs(scale))
        assert scaled == pytest.approx(expected, abs=1e-9)

    def test_multivariate_gaussian(self):
        """N(0, I_3) has entropy 3/2 log(2 pi e)"""
        samples = SeededRng(6).standard_normal((20000, 3))
        assert kl_entropy_multivariate(samples, STRICT).value == pytest.approx(3 * HALF_LOG_2PIE, abs=0.05)

    def test_multivariate_agrees_in_low_dimension(self):
        samples = SeededRng(7).standard_normal((500, 2))
        assert kl_entropy_multivariate(samples, STRICT).value == kl_entropy(samples, STRICT).value


class TestKlMi1d:
    """Test suite for kl_mi_1d"""

    def test_independent(self):
        stream = SeededRng(10)
        x, y = stream.standard_normal(10 ** 4), stream.standard_normal(10 ** 4)
        assert -0.03 <= kl_mi_1d(x, y, STRICT) <= 0.03

    def test_correlated_gaussian(self, gaussian_pair):
        """rho = 0.9 has I = -1/2 log(1 - 0.81)"""
        x, y = gaussian_pair(0.9, 10 ** 5, seed=11)
        assert 0.80 <= kl_mi_1d(x, y, STRICT) <= 0.86

    def test_sign_invariance(self, gaussian_pair):
        """Negating either variable leaves the estimate unchanged exactly"""
        x, y = gaussian_pair(0.6, 2000, seed=12)
        base = kl_mi_1d(x, y, STRICT)
        assert kl_mi_1d(-x, y, STRICT) == base
        assert kl_mi_1d(x, -y, STRICT) == base
        assert kl_mi_1d(-x, -y, STRICT) == base

    def test_copy_with_ties_fails_in_joint_term(self):
        """y = x on tied data produces coincident joint points"""
        x = np.repeat(SeededRng(13).standard_normal(100), 4)
        with pytest.raises(DegenerateDistanceError) as excinfo:
            kl_mi_1d(x, x.copy(), STRICT)
        assert excinfo.value.context['term'] == 'joint'
        assert 'term=joint' in str(excinfo.value)

    def test_copy_with_jitter_is_large(self, gaussian_pair):
        x, _ = gaussian_pair(0.0, 2000, seed=14)
        assert kl_mi_1d(x, x.copy(), KnnConfig()) > 3.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            kl_mi_1d(np.zeros(10), np.zeros(11))

    def test_rounded_data_is_sign_invariant(self):
        """Ties are broken before negation, so flips stay exact"""
        stream = SeededRng(15)
        x = np.round(stream.standard_normal(500), 1)
        y = np.round(x + stream.standard_normal(500), 1)
        base = kl_mi_1d(x, y)
        assert math.isfinite(base)
        assert kl_mi_1d(-x, y) == base
        assert kl_mi_1d(-x, -y) == base


class TestJitterDegeneratePair:
    """Test suite for jitter_degenerate_pair"""

    def test_continuous_data_untouched(self, gaussian_pair):
        x, y = gaussian_pair(0.5, 300, seed=16)
        jittered_x, jittered_y = jitter_degenerate_pair(x, y)
        assert np.array_equal(jittered_x[:, 0], x)
        assert np.array_equal(jittered_y[:, 0], y)

    def test_error_policy_untouched(self):
        x = np.repeat(np.arange(10.0), 4)
        jittered_x, _ = jitter_degenerate_pair(x, x, STRICT)
        assert np.array_equal(jittered_x[:, 0], x)

    def test_ties_are_broken(self, caplog):
        x = np.repeat(np.arange(10.0), 4)
        y = SeededRng(17).standard_normal(40)
        with caplog.at_level(logging.WARNING):
            jittered_x, jittered_y = jitter_degenerate_pair(x, y)
        assert np.all(knn_distances(jittered_x, 3) > 0.0)
        assert np.all(np.abs(jittered_x[:, 0] - x) < 1e-6)
        assert not np.array_equal(jittered_y[:, 0], y)
        assert 'jittering' in caplog.text

    def test_default_stream_is_fixed(self):
        x = np.repeat(np.arange(10.0), 4)
        first = jitter_degenerate_pair(x, x)
        second = jitter_degenerate_pair(x, x)
        assert np.array_equal(first[0], second[0])
        assert np.array_equal(first[1], second[1])

    def test_jitter_seed_changes_stream(self):
        x = np.repeat(np.arange(10.0), 4)
        first, _ = jitter_degenerate_pair(x, x, KnnConfig(jitter_seed=1))
        second, _ = jitter_degenerate_pair(x, x, KnnConfig(jitter_seed=2))
        assert not np.array_equal(first, second)

    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            jitter_degenerate_pair(np.zeros(10), np.zeros(11))
