"""
SMI Service

Monte-Carlo sliced mutual information and sliced entropy estimation from
samples. Directions are drawn up front from the seeded stream; slices may
run in parallel but are reduced by slice index, so the result does not
depend on the thread count.
"""
import logging
from typing import Optional

import numpy as np

from slicedmi.exceptions import DimensionMismatchError, InsufficientSamplesError, SmiError
from slicedmi.models.estimates import SmiEstimate
from slicedmi.models.settings import KnnConfig, SmiConfig
from slicedmi.services.knn_service import jitter_degenerate_pair, kl_entropy, kl_mi_1d
from slicedmi.services.sampling_service import (
    SeededRng, as_sample_matrix, project_many, sample_unit_sphere_batch,
)
from slicedmi.tasks import run_jobs

logger = logging.getLogger(__name__)


class SmiService:
    """Service for nonparametric sliced information estimates"""

    @staticmethod
    def estimate_smi(x, y, cfg: Optional[SmiConfig] = None, progress: bool = False) -> SmiEstimate:
        """
        Estimate SI(X;Y) as the mean of scalar MI estimates over m random slices

        Args:
            x: n x d_x sample matrix
            y: n x d_y sample matrix
            cfg (SmiConfig): Slice count, kNN settings, seed, parallelism
            progress (bool): Show a progress bar over slices

        Returns:
            SmiEstimate: Mean, per-slice values and Monte-Carlo standard error

        Raises:
            DegenerateDistanceError: Annotated with the offending slice index
        """
        cfg = cfg or SmiConfig()
        x = as_sample_matrix(x, 'x')
        y = as_sample_matrix(y, 'y')
        n = x.shape[0]
        if y.shape[0] != n:
            raise DimensionMismatchError(f"x has {n} rows but y has {y.shape[0]}")
        if n < cfg.knn.k + 1:
            raise InsufficientSamplesError(f"need at least k+1={cfg.knn.k + 1} samples, got n={n}")
        # Ties are broken once on the original sample so every slice sees the same data
        x, y = jitter_degenerate_pair(x, y, cfg.knn)

        rng = SeededRng(cfg.seed)
        logger.info(f"Estimating SMI: n={n}, d_x={x.shape[1]}, d_y={y.shape[1]}, "
                    f"m={cfg.m}, k={cfg.knn.k}, seed={rng.seed}")

        thetas = sample_unit_sphere_batch(cfg.m, x.shape[1], rng)
        phis = sample_unit_sphere_batch(cfg.m, y.shape[1], rng)
        projected_x = project_many(x, thetas)
        projected_y = project_many(y, phis)

        def run_slice(index: int) -> float:
            try:
                return kl_mi_1d(projected_x[:, index], projected_y[:, index], cfg.knn, rng.spawn(index))
            except SmiError as e:
                raise e.with_context(slice_index=index)

        per_slice = np.asarray(run_jobs(run_slice, range(cfg.m), threads=cfg.threads,
                                        desc='slices', progress=progress))
        if cfg.clip_negative_slices:
            per_slice = np.maximum(per_slice, 0.0)

        directions = (thetas, phis) if cfg.store_directions else None
        estimate = SmiEstimate.from_slices(per_slice, n=n, directions=directions)
        logger.info(f"SMI estimate {estimate.value:.6f} +- {estimate.std_error:.6f} nats")
        return estimate

    @staticmethod
    def estimate_sliced_entropy(x, m: int = 1000, knn: Optional[KnnConfig] = None, seed=None,
                                threads: int = 1, progress: bool = False) -> SmiEstimate:
        """
        Sliced entropy: mean Kozachenko-Leonenko entropy of m random projections

        Args:
            x: n x d sample matrix
            m (int): Number of slices
            knn (KnnConfig): Neighbor settings
            seed: Seed for directions and jitter
            threads (int): Worker threads

        Returns:
            SmiEstimate: Mean entropy over slices, in nats
        """
        knn = knn or KnnConfig()
        cfg = SmiConfig(m=m, knn=knn, seed=seed, threads=threads)
        x = as_sample_matrix(x, 'x')
        n = x.shape[0]
        if n < knn.k + 1:
            raise InsufficientSamplesError(f"need at least k+1={knn.k + 1} samples, got n={n}")

        rng = SeededRng(cfg.seed)
        logger.info(f"Estimating sliced entropy: n={n}, d={x.shape[1]}, m={m}, seed={rng.seed}")
        thetas = sample_unit_sphere_batch(m, x.shape[1], rng)
        projected = project_many(x, thetas)

        def run_slice(index: int) -> float:
            try:
                return kl_entropy(projected[:, index], knn, rng.spawn(index)).value
            except SmiError as e:
                raise e.with_context(slice_index=index)

        per_slice = run_jobs(run_slice, range(m), threads=threads, desc='slices', progress=progress)
        return SmiEstimate.from_slices(np.asarray(per_slice), n=n)
