"""
Tests for convergence-rate sweeps and the log-concave bound check
"""
import math

import numpy as np
import pytest

from slicedmi.exceptions import ConfigError, InputError, NearSingularError, NumericalError
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.rate_report import RateGrid
from slicedmi.services.convergence_service import ConvergenceService, fit_loglog_slope
from slicedmi.services.oracle_service import GaussianOracleService
from slicedmi.tests.conftest import random_spec


def tiny_grid(**overrides):
    values = {'spec': GaussianSpec.scalar(0.5), 'n_values': [40, 80], 'm_values': [2, 4],
              'trials': 2, 'fixed_n': 60, 'fixed_m': 3, 'seed': 21, 'truth': 0.1438}
    values.update(overrides)
    return RateGrid(**values)


class TestFitLoglogSlope:
    """Test suite for fit_loglog_slope"""

    def test_exact_power_law(self):
        axis = [250, 500, 1000, 2000, 4000]
        fit = fit_loglog_slope(axis, [3.0 * a ** -0.5 for a in axis])
        assert fit.slope == pytest.approx(-0.5, abs=1e-6)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-6)
        assert not fit.excluded_smallest and fit.points == 5

    def test_outlying_smallest_point_excluded(self):
        axis = [250, 500, 1000, 2000, 4000]
        rmse = [a ** -0.5 * (1 + 0.01 * (-1) ** i) for i, a in enumerate(axis)]
        rmse[0] *= 5.0
        fit = fit_loglog_slope(axis, rmse)
        assert fit.excluded_smallest and fit.points == 4
        assert fit.slope == pytest.approx(-0.5, abs=0.02)

    def test_unsorted_axis(self):
        fit = fit_loglog_slope([4000, 250, 1000], [4000 ** -1.0, 250 ** -1.0, 1000 ** -1.0])
        assert fit.slope == pytest.approx(-1.0, abs=1e-9)

    def test_too_few_points(self):
        with pytest.raises(InputError):
            fit_loglog_slope([100], [0.1])

    def test_non_positive_rmse(self):
        with pytest.raises(NumericalError):
            fit_loglog_slope([100, 200], [0.1, 0.0])


class TestRateGrid:
    """Test suite for RateGrid validation and cell layout"""

    def test_defaults(self):
        grid = RateGrid(spec=GaussianSpec.scalar(0.5))
        assert grid.n_values == [250, 500, 1000, 2000, 4000]
        assert grid.trials == 10 and grid.fixed_n == 10000

    def test_non_increasing_grid(self):
        with pytest.raises(ConfigError):
            tiny_grid(n_values=[80, 40])

    def test_unknown_sweep(self):
        with pytest.raises(ConfigError):
            tiny_grid(sweeps=['diagonal'])

    def test_spec_from_shorthand(self):
        grid = RateGrid.from_dict({'spec': {'rho': 0.5}, 'seed': 1})
        assert grid.spec.sigma_xy[0, 0] == 0.5

    def test_unique_cells(self):
        grid = tiny_grid(n_values=[40, 60], fixed_m=60, m_values=[40, 60], fixed_n=60)
        sweeps = grid.sweep_cells()
        assert sweeps['joint'] == [(40, 40), (60, 60)]
        assert sweeps['n'] == [(40, 60), (60, 60)]
        assert sweeps['m'] == [(60, 40), (60, 60)]
        assert grid.unique_cells() == [(40, 40), (60, 60), (40, 60), (60, 40)]

    def test_grid_sweep_is_opt_in(self):
        assert 'grid' not in tiny_grid().sweeps
        grid = tiny_grid(sweeps=['grid'])
        assert grid.sweep_cells() == {'grid': [(40, 2), (40, 4), (80, 2), (80, 4)]}

    def test_classic_mi_must_be_boolean(self):
        with pytest.raises(ConfigError):
            tiny_grid(classic_mi='yes')


class TestRunRateSweep:
    """Test suite for run_rate_sweep"""

    def test_report_layout(self):
        report = ConvergenceService.run_rate_sweep(tiny_grid())
        assert report.truth == 0.1438
        assert len(report.rows) == len(tiny_grid().unique_cells())
        for name in ('joint', 'n', 'm'):
            assert getattr(report, f"slope_{name}").points == 2
        assert all(row.rmse > 0 for row in report.rows)
        summary = report.summary()
        assert summary['sweeps']['joint'] == [[40, 40], [80, 80]]

    def test_deterministic_across_threads(self):
        serial = ConvergenceService.run_rate_sweep(tiny_grid())
        parallel = ConvergenceService.run_rate_sweep(tiny_grid(threads=4))
        assert [row.rmse for row in serial.rows] == [row.rmse for row in parallel.rows]

    def test_cells_independent_of_requested_sweeps(self):
        full = ConvergenceService.run_rate_sweep(tiny_grid())
        joint_only = ConvergenceService.run_rate_sweep(tiny_grid(sweeps=['joint']))
        assert joint_only.slope_n is None and joint_only.slope_m is None
        for row in joint_only.rows:
            assert row.rmse == full.rmse(row.n, row.m)

    def test_grid_sweep_rows_without_slope(self):
        report = ConvergenceService.run_rate_sweep(tiny_grid(sweeps=['grid']))
        assert [(row.n, row.m) for row in report.rows] == [(40, 2), (40, 4), (80, 2), (80, 4)]
        assert report.slope_joint is None and report.slope_n is None and report.slope_m is None
        assert 'grid' in report.summary()['sweeps']

    def test_grid_cells_shared_with_other_sweeps(self):
        grid_only = ConvergenceService.run_rate_sweep(tiny_grid(sweeps=['grid']))
        combined = ConvergenceService.run_rate_sweep(tiny_grid(sweeps=['grid', 'joint']))
        assert combined.rmse(40, 2) == grid_only.rmse(40, 2)
        assert combined.slope_joint is not None

    def test_classic_mi_column(self):
        report = ConvergenceService.run_rate_sweep(tiny_grid(classic_mi=True, sweeps=['joint']))
        assert report.mi_truth == pytest.approx(-0.5 * math.log(0.75), rel=1e-12)
        assert all(row.mi_rmse is not None and row.mi_rmse > 0 for row in report.rows)
        without = ConvergenceService.run_rate_sweep(tiny_grid(sweeps=['joint']))
        assert [row.rmse for row in report.rows] == [row.rmse for row in without.rows]
        assert all(row.mi_rmse is None for row in without.rows)

    def test_classic_mi_on_shared_coordinates(self, overlap_spec):
        with pytest.raises(NearSingularError):
            ConvergenceService.run_rate_sweep(tiny_grid(spec=overlap_spec, classic_mi=True, sweeps=['m']))

    def test_oracle_truth(self):
        report = ConvergenceService.run_rate_sweep(tiny_grid(truth=None, truth_slices=100, sweeps=['m']))
        assert report.truth == pytest.approx(-0.5 * math.log(0.75), rel=1e-9)


class TestLogConcaveBound:
    """Test suite for check_logconcave_bound"""

    def test_scalar_example(self):
        check = ConvergenceService.check_logconcave_bound(GaussianSpec.scalar(0.5), slices=100, seed=1)
        assert check.holds
        assert check.max_slice_mi == pytest.approx(0.14384, abs=1e-5)
        assert check.bound == pytest.approx(0.24885, abs=1e-5)
        assert check.margin == pytest.approx(0.105, abs=1e-3)

    def test_random_specs(self):
        for seed in range(100):
            spec = random_spec(seed)
            check = ConvergenceService.check_logconcave_bound(spec, slices=2000, seed=seed)
            assert check.holds, seed
            assert check.max_slice_mi <= GaussianOracleService.logconcave_slice_bound(spec)

    def test_reproducible(self):
        spec = random_spec(3)
        first = ConvergenceService.check_logconcave_bound(spec, slices=500, seed=3)
        second = ConvergenceService.check_logconcave_bound(spec, slices=500, seed=3)
        assert first.to_dict() == second.to_dict()

    def test_shared_coordinates_rejected(self, overlap_spec):
        """Overlapping coordinate ranges have a canonical correlation of one"""
        with pytest.raises(NearSingularError):
            ConvergenceService.check_logconcave_bound(overlap_spec, slices=10, seed=3)


@pytest.mark.slow
class TestRateAcceptance:
    """Near-parametric convergence of the sliced estimator"""

    def test_joint_and_m_slopes(self, overlap_spec, overlap_oracle):
        grid = RateGrid(spec=overlap_spec, seed=17, truth=overlap_oracle['value'], sweeps=['joint', 'm'],
                        threads=4)
        report = ConvergenceService.run_rate_sweep(grid)
        assert -0.65 <= report.slope_joint.slope <= -0.35
        assert -0.65 <= report.slope_m.slope <= -0.35
        assert np.all(np.isfinite([row.rmse for row in report.rows]))

    def test_rmse_shrinks_when_n_and_m_double(self):
        spec = random_spec(7)
        truth = GaussianOracleService.gaussian_smi_mc(spec, 10 ** 5, seed=7).value
        shrinking, pairs = 0, 0
        for seed in range(10):
            grid = RateGrid(spec=spec, n_values=[100, 200, 400, 800], m_values=[100, 200, 400, 800],
                            trials=20, sweeps=['joint'], truth=truth, seed=seed, threads=4)
            rmse = [row.rmse for row in ConvergenceService.run_rate_sweep(grid).rows]
            shrinking += sum(larger <= smaller for smaller, larger in zip(rmse, rmse[1:]))
            pairs += len(rmse) - 1
        assert shrinking >= 0.8 * pairs
