"""
Convergence Service

RMSE of the sliced estimator against a Gaussian ground truth as the sample
count n and the slice count m grow, with log-log slope fits, and the
per-slice log-concave bound check.
"""
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from slicedmi.exceptions import InputError, NumericalError
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.rate_report import LogConcaveCheck, RateGrid, RateReport, RateRow, SlopeFit
from slicedmi.models.settings import KnnConfig, SmiConfig
from slicedmi.services.independence_service import multivariate_kl_mi
from slicedmi.services.oracle_service import GaussianOracleService
from slicedmi.services.sampling_service import SeededRng, as_rng, sample_unit_sphere_batch
from slicedmi.services.smi_service import SmiService
from slicedmi.tasks import run_jobs

logger = logging.getLogger(__name__)

EXCLUSION_FACTOR = 3.0
# Residuals below this are rounding noise on an exact power law
RESIDUAL_FLOOR = 1e-9


def _least_squares(log_x: np.ndarray, log_y: np.ndarray) -> Tuple[float, float, np.ndarray]:
    design = np.column_stack([log_x, np.ones_like(log_x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, log_y, rcond=None)
    residuals = log_y - (slope * log_x + intercept)
    return float(slope), float(intercept), residuals


def _rmse(errors: Sequence[float]) -> float:
    return math.sqrt(float(np.mean(np.square(errors))))


def fit_loglog_slope(axis: Sequence[float], rmse: Sequence[float]) -> SlopeFit:
    """
    Ordinary least-squares slope of log(rmse) against log(axis)

    The smallest grid point is dropped when, measured against the fit of the
    remaining points, its residual exceeds 3x that fit's residual RMS.

    Args:
        axis: Grid values (n, m or n = m), positive
        rmse: RMSE per grid value, positive

    Returns:
        SlopeFit: Slope, intercept, residual RMS and whether the smallest
        point was excluded
    """
    axis = np.asarray(axis, dtype=float)
    rmse = np.asarray(rmse, dtype=float)
    if axis.size != rmse.size or axis.size < 2:
        raise InputError("slope fit needs at least two (axis, rmse) points of equal count")
    if np.any(axis <= 0) or np.any(rmse <= 0) or not np.all(np.isfinite(rmse)):
        raise NumericalError("log-log fit needs positive finite values", rmse=rmse.tolist())

    order = np.argsort(axis, kind='mergesort')
    log_x, log_y = np.log(axis[order]), np.log(rmse[order])

    excluded = False
    if log_x.size >= 3:
        slope, intercept, residuals = _least_squares(log_x[1:], log_y[1:])
        rms = math.sqrt(float(np.mean(residuals ** 2)))
        smallest_residual = abs(log_y[0] - (slope * log_x[0] + intercept))
        excluded = smallest_residual > max(EXCLUSION_FACTOR * rms, RESIDUAL_FLOOR)
    if excluded:
        log_x, log_y = log_x[1:], log_y[1:]

    slope, intercept, residuals = _least_squares(log_x, log_y)
    return SlopeFit(slope=slope, intercept=intercept,
                    residual_rms=math.sqrt(float(np.mean(residuals ** 2))),
                    excluded_smallest=bool(excluded), points=int(log_x.size))


class ConvergenceService:
    """Service for convergence-rate benchmarks"""

    @staticmethod
    def ground_truth(grid: RateGrid, rng: SeededRng) -> float:
        if grid.truth is not None:
            logger.info(f"Using pinned ground truth {grid.truth:.6f}")
            return float(grid.truth)
        estimate = GaussianOracleService.gaussian_smi_mc(grid.spec, grid.truth_slices, seed=rng.derive_seed(0))
        logger.info(f"Ground truth from {grid.truth_slices} oracle slices: "
                    f"{estimate.value:.6f} +- {estimate.std_error:.2e}")
        return estimate.value

    @staticmethod
    def run_cell(grid: RateGrid, n: int, m: int, truth: float, rng: SeededRng,
                 mi_truth: Optional[float] = None) -> RateRow:
        """
        RMSE over trials of estimate_smi at one (n, m) cell; fresh data and directions per trial

        With mi_truth, the classic kNN MI of the same draws is scored against it too.
        """
        knn = KnnConfig(k=grid.k, degeneracy_policy=grid.degeneracy_policy)
        cell_rng = rng.spawn(1, n, m)
        errors, mi_errors = [], []
        for trial in range(grid.trials):
            x, y = grid.spec.sample(n, cell_rng.spawn(trial, 0))
            estimate = SmiService.estimate_smi(x, y, SmiConfig(m=m, knn=knn, seed=cell_rng.derive_seed(trial, 1)))
            errors.append(estimate.value - truth)
            if mi_truth is not None:
                mi_errors.append(multivariate_kl_mi(x, y, knn) - mi_truth)
        row = RateRow(n=n, m=m, rmse=_rmse(errors), trials=grid.trials,
                      mi_rmse=_rmse(mi_errors) if mi_errors else None)
        logger.debug(f"cell n={n}, m={m}: rmse={row.rmse:.6f}")
        return row

    @staticmethod
    def run_rate_sweep(grid: RateGrid, progress: bool = False) -> RateReport:
        """
        Run every requested sweep and fit log-log slopes

        Cells shared between sweeps are computed once; each cell's data and
        directions are keyed by (seed, n, m, trial), so the report does not
        depend on the thread count or on which sweeps are requested.

        Args:
            grid (RateGrid): Spec, grids, trials and seed
            progress (bool): Show a progress bar over cells

        Returns:
            RateReport: One row per distinct cell plus slope fits
        """
        if grid.seed is None:
            grid.seed = SeededRng().seed
        rng = SeededRng(grid.seed)
        truth = ConvergenceService.ground_truth(grid, rng)
        cells = grid.unique_cells()
        logger.info(f"Rate sweep: {len(cells)} cells, trials={grid.trials}, sweeps={grid.sweeps}, seed={grid.seed}")

        mi_truth = GaussianOracleService.gaussian_mi(grid.spec) if grid.classic_mi else None
        rows = run_jobs(lambda cell: ConvergenceService.run_cell(grid, cell[0], cell[1], truth, rng, mi_truth),
                        cells, threads=grid.threads, desc='cells', progress=progress)
        rmse: Dict[Tuple[int, int], float] = {(row.n, row.m): row.rmse for row in rows}

        sweeps = grid.sweep_cells()
        report = RateReport(rows=rows, truth=truth, sweeps=sweeps, mi_truth=mi_truth)
        axes = {'joint': 0, 'n': 0, 'm': 1}
        for name, sweep in sweeps.items():
            # The two-axis grid has no single rate
            if name not in axes or len(sweep) < 2:
                continue
            fit = fit_loglog_slope([cell[axes[name]] for cell in sweep], [rmse[cell] for cell in sweep])
            setattr(report, f"slope_{name}", fit)
            logger.info(f"{name} sweep slope {fit.slope:.3f} (excluded smallest: {fit.excluded_smallest})")
        return report

    @staticmethod
    def check_logconcave_bound(spec: GaussianSpec, slices: int = 10000, seed=None) -> LogConcaveCheck:
        """
        Compare sampled slice MI against 1/2 log((pi^2 / 8) / (1 - rho_CCA^2))

        Args:
            spec: Gaussian specification with rho_CCA < 1
            slices (int): Number of random direction pairs
            seed: Integer seed or SeededRng

        Returns:
            LogConcaveCheck: holds is true iff every sampled slice MI is at or
            below the bound; margin is bound minus the largest slice MI
        """
        bound = GaussianOracleService.logconcave_slice_bound(spec)
        rng = as_rng(seed)
        thetas = sample_unit_sphere_batch(slices, spec.d_x, rng)
        phis = sample_unit_sphere_batch(slices, spec.d_y, rng)
        largest = float(np.max(GaussianOracleService.slice_mi_batch(spec, thetas, phis)))
        check = LogConcaveCheck(holds=largest <= bound, margin=bound - largest, bound=bound,
                                max_slice_mi=largest, slices=slices)
        logger.info(f"Log-concave bound {bound:.6f}, largest slice MI {largest:.6f}, holds={check.holds}")
        return check
