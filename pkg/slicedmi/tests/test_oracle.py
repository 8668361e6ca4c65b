"""
Tests for the Gaussian oracle and GaussianSpec
"""
import math
import os

import numpy as np
import pytest

from slicedmi.exceptions import ConfigError, DimensionMismatchError, InvalidSpecError, NearSingularError
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.services.oracle_service import GaussianOracleService as Oracle
from slicedmi.services.sampling_service import SeededRng, sample_unit_sphere_batch
from slicedmi.tests.conftest import (
    OVERLAP_FIXTURE, OVERLAP_ORACLE_SEED, OVERLAP_ORACLE_SLICES, overlap_smi_quadrature, random_spec,
)


def diagonal_spec(values):
    d = len(values)
    return GaussianSpec(mean_x=np.zeros(d), mean_y=np.zeros(d), sigma_x=np.eye(d), sigma_y=np.eye(d),
                        sigma_xy=np.diag(values))


class TestGaussianSpec:
    """Test suite for GaussianSpec"""

    def test_overlap_cross_covariance(self):
        spec = GaussianSpec.overlap(4, (1, 3), (2, 4))
        expected = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        assert np.array_equal(spec.sigma_xy, expected)
        assert spec.d_x == 3 and spec.d_y == 3

    def test_non_symmetric_marginal(self):
        spec = GaussianSpec(mean_x=[0, 0], mean_y=[0], sigma_x=[[1, 0.5], [0, 1]], sigma_y=[[1]],
                            sigma_xy=[[0], [0]])
        with pytest.raises(InvalidSpecError):
            spec.validate()

    def test_joint_not_psd(self):
        with pytest.raises(InvalidSpecError):
            GaussianSpec.scalar(1.5).validate()

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            GaussianSpec(mean_x=[0, 0], mean_y=[0], sigma_x=np.eye(2), sigma_y=[[1]], sigma_xy=[[0, 0]])

    def test_from_dict_shorthands(self):
        assert GaussianSpec.from_dict({'rho': 0.5}).sigma_xy[0, 0] == 0.5
        spec = GaussianSpec.from_dict({'overlap': {'d_total': 4, 'x_range': [1, 3], 'y_range': [2, 4]}})
        assert spec.sigma_xy.shape == (3, 3)

    def test_from_dict_round_trip(self):
        spec = random_spec(3)
        again = GaussianSpec.from_dict(spec.to_dict())
        assert np.array_equal(again.sigma_xy, spec.sigma_xy)
        assert np.array_equal(again.sigma_x, spec.sigma_x)

    def test_from_dict_unknown_key(self):
        with pytest.raises(ConfigError):
            GaussianSpec.from_dict({'rho': 0.5, 'extra': 1})
        with pytest.raises(ConfigError):
            GaussianSpec.from_dict({'sigma_x': [[1]], 'sigma_y': [[1]], 'sigma_xy': [[0]], 'sigma': 1})

    @pytest.mark.parametrize("data", [
        {'rho': 'abc'},
        {'rho': None},
        {'overlap': {'d_total': 4, 'x_range': [1, 3]}},
        {'overlap': {'d_total': 4, 'x_range': [1, 3], 'y_range': [2, 4], 'z_range': [1, 1]}},
        {'overlap': 4},
        {'sigma_x': 'a', 'sigma_y': [[1]], 'sigma_xy': [[0]]},
    ])
    def test_from_dict_malformed_values(self, data):
        with pytest.raises(ConfigError):
            GaussianSpec.from_dict(data)

    def test_from_dict_keeps_spec_errors(self):
        with pytest.raises(InvalidSpecError):
            GaussianSpec.from_dict({'sigma_x': [[-1]], 'sigma_y': [[1]], 'sigma_xy': [[0]]})

    def test_sample_covariance(self):
        spec = random_spec(4, d_x=2, d_y=2)
        x, y = spec.sample(10 ** 5, SeededRng(5))
        empirical = np.cov(np.hstack([x, y]).T)
        assert np.allclose(empirical, spec.block_covariance(), atol=0.1)


class TestSliceQuantities:
    """Test suite for slice correlation and slice MI"""

    def test_independent_blocks(self):
        spec = diagonal_spec([0.0, 0.0])
        thetas = sample_unit_sphere_batch(20, 2, SeededRng(1))
        phis = sample_unit_sphere_batch(20, 2, SeededRng(2))
        assert np.array_equal(Oracle.slice_correlation_batch(spec, thetas, phis), np.zeros(20))

    def test_scalar_identity(self):
        assert Oracle.slice_correlation(GaussianSpec.scalar(0.5), [1.0], [1.0]) == pytest.approx(0.5, abs=1e-12)

    def test_orthogonal_directions(self):
        spec = diagonal_spec([0.8, 0.1])
        assert Oracle.slice_correlation(spec, [1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_slice_mi_values(self):
        assert Oracle.slice_mi(GaussianSpec.scalar(0.0), [1.0], [1.0]) == 0.0
        assert Oracle.slice_mi(GaussianSpec.scalar(0.5), [1.0], [1.0]) == pytest.approx(0.14384, abs=1e-5)
        assert Oracle.slice_mi(GaussianSpec.scalar(0.9), [1.0], [1.0]) == pytest.approx(0.83037, abs=1e-5)
        assert Oracle.slice_mi(GaussianSpec.scalar(0.5), [1.0], [1.0]) == pytest.approx(-0.5 * math.log(0.75),
                                                                                        abs=1e-12)

    def test_near_singular(self):
        spec = GaussianSpec.scalar(1.0)
        with pytest.raises(NearSingularError):
            Oracle.slice_mi(spec, [1.0], [1.0])

    def test_direction_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            Oracle.slice_correlation(diagonal_spec([0.5, 0.5]), [1.0], [1.0, 0.0])


class TestGaussianSmiMc:
    """Test suite for the Monte-Carlo oracle"""

    def test_independent_is_zero(self):
        estimate = Oracle.gaussian_smi_mc(diagonal_spec([0.0, 0.0, 0.0]), 1000, seed=1)
        assert estimate.value == 0.0
        assert np.all(estimate.per_slice == 0.0)

    @pytest.mark.parametrize("m", [1, 10, 1000])
    def test_scalar_equals_slice_mi(self, m):
        spec = GaussianSpec.scalar(0.5)
        assert Oracle.gaussian_smi_mc(spec, m, seed=2).value == Oracle.slice_mi(spec, [1.0], [1.0])

    def test_reproducible_and_chunk_independent(self):
        spec = random_spec(6)
        first = Oracle.gaussian_smi_mc(spec, 250000, seed=3)
        second = Oracle.gaussian_smi_mc(spec, 250000, seed=3)
        assert np.array_equal(first.per_slice, second.per_slice)

    def test_matches_quadrature(self):
        spec = GaussianSpec(mean_x=[0, 0], mean_y=[0, 0], sigma_x=np.eye(2), sigma_y=[[1.0, 0.3], [0.3, 1.0]],
                            sigma_xy=[[0.5, 0.1], [0.0, 0.3]])
        mc = Oracle.gaussian_smi_mc(spec, 10 ** 5, seed=4)
        assert mc.value == pytest.approx(Oracle.gaussian_smi_quadrature_2d(spec, 720), abs=1e-3)

    def test_quadrature_needs_two_dimensions(self):
        with pytest.raises(DimensionMismatchError):
            Oracle.gaussian_smi_quadrature_2d(diagonal_spec([0.5, 0.5, 0.5]))

    def test_rotation_invariance(self):
        spec = random_spec(7)
        stream = SeededRng(8)
        u, _ = np.linalg.qr(stream.standard_normal((3, 3)))
        v, _ = np.linalg.qr(stream.standard_normal((3, 3)))
        base = Oracle.gaussian_smi_mc(spec, 10 ** 5, seed=9)
        rotated = Oracle.gaussian_smi_mc(spec.rotated(u, v), 10 ** 5, seed=10)
        assert abs(base.value - rotated.value) <= 3 * math.hypot(base.std_error, rotated.std_error)

    def test_stored_directions(self):
        estimate = Oracle.gaussian_smi_mc(random_spec(11), 5, seed=12, store_directions=True)
        thetas, phis = estimate.directions
        assert thetas.shape == (5, 3) and phis.shape == (5, 3)


class TestOverlapOracle:
    """Test suite for the pinned overlap value"""

    def test_fixture_is_committed(self):
        assert os.path.exists(OVERLAP_FIXTURE)

    def test_fixture_matches_quadrature(self, overlap_oracle):
        value, error = overlap_smi_quadrature()
        assert error < 1e-7
        assert overlap_oracle['value'] == pytest.approx(value, abs=1e-8)

    def test_monte_carlo_agrees(self, overlap_spec, overlap_oracle):
        estimate = Oracle.gaussian_smi_mc(overlap_spec, OVERLAP_ORACLE_SLICES, seed=OVERLAP_ORACLE_SEED)
        assert abs(estimate.value - overlap_oracle['value']) <= 4 * estimate.std_error


class TestCanonicalCorrelation:
    """Test suite for CCA and the SMI ceiling"""

    def test_independent(self):
        assert Oracle.cca_coefficient(diagonal_spec([0.0, 0.0])) == 0.0
        assert Oracle.gaussian_smi_upper_bound(diagonal_spec([0.0, 0.0])) == 0.0

    def test_diagonal_cross(self):
        spec = diagonal_spec([0.5, 0.2, 0.0])
        assert Oracle.cca_coefficient(spec) == pytest.approx(0.5, abs=1e-12)
        bound = Oracle.gaussian_smi_upper_bound(spec)
        assert bound == pytest.approx(0.14384, abs=1e-5)
        assert Oracle.gaussian_smi_mc(spec, 10 ** 4, seed=1).value <= bound

    def test_scalar_bound(self):
        assert Oracle.gaussian_smi_upper_bound(GaussianSpec.scalar(0.5)) == pytest.approx(0.14384, abs=1e-5)

    def test_perfect_dependence(self):
        """X = Y reports rho_CCA = 1 and the bound refuses it"""
        sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
        spec = GaussianSpec(mean_x=[0, 0], mean_y=[0, 0], sigma_x=sigma, sigma_y=sigma, sigma_xy=sigma)
        assert Oracle.cca_coefficient(spec) == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(NearSingularError):
            Oracle.slice_mi(spec, [1.0, 0.0], [1.0, 0.0])

    def test_classic_mi_sums_canonical_terms(self):
        spec = diagonal_spec([0.5, 0.2, 0.0])
        expected = -0.5 * (math.log(1 - 0.25) + math.log(1 - 0.04))
        assert Oracle.gaussian_mi(spec) == pytest.approx(expected, rel=1e-12)
        assert sorted(Oracle.canonical_correlations(spec)) == pytest.approx([0.0, 0.2, 0.5], abs=1e-12)

    def test_classic_mi_bounds_smi(self):
        spec = random_spec(16)
        assert Oracle.gaussian_mi(spec) >= Oracle.gaussian_smi_upper_bound(spec)

    def test_classic_mi_refuses_shared_coordinates(self, overlap_spec):
        with pytest.raises(NearSingularError):
            Oracle.gaussian_mi(overlap_spec)

    def test_slice_correlations_within_cca(self):
        spec = random_spec(13)
        thetas = sample_unit_sphere_batch(2000, 3, SeededRng(14))
        phis = sample_unit_sphere_batch(2000, 3, SeededRng(15))
        rho = np.abs(Oracle.slice_correlation_batch(spec, thetas, phis))
        assert rho.max() <= Oracle.cca_coefficient(spec) + 1e-9

    def test_bound_ordering_on_random_specs(self):
        for seed in range(100):
            spec = random_spec(1000 + seed)
            assert Oracle.cca_coefficient(spec) <= 0.95 + 1e-9
            estimate = Oracle.gaussian_smi_mc(spec, 2000, seed=seed)
            assert 0.0 <= estimate.value <= Oracle.gaussian_smi_upper_bound(spec) + 1e-12
