"""
Kozachenko-Leonenko k-nearest-neighbor entropy and mutual information
estimation.

All values are in nats. Neighbor distances are Euclidean; the 1-D fast
path sorts the sample, higher dimensions use a k-d tree.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.special import digamma, gammaln

from slicedmi.exceptions import (
    DegenerateDistanceError, DimensionMismatchError, InsufficientSamplesError,
    InvalidDimensionError,
)
from slicedmi.models.estimates import EntropyEstimate
from slicedmi.models.settings import KnnConfig
from slicedmi.services.sampling_service import SeededRng, as_rng, as_sample_matrix

logger = logging.getLogger(__name__)


def log_unit_ball_volume(d: int) -> float:
    """log c_d with c_d = pi^(d/2) / Gamma(d/2 + 1); c_1 = 2, c_2 = pi"""
    if d == 1:
        return math.log(2.0)
    if d == 2:
        return math.log(math.pi)
    return 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1.0))


def _knn_distances_sorted(values: np.ndarray, k: int) -> np.ndarray:
    # Candidates are the k left and k right neighbors in sorted order
    n = values.size
    order = np.argsort(values, kind='mergesort')
    ordered = values[order]
    candidates = np.full((n, 2 * k), np.inf)
    for j in range(1, k + 1):
        gaps = ordered[j:] - ordered[:-j]
        candidates[j:, j - 1] = gaps
        candidates[:-j, k + j - 1] = gaps
    kth = np.partition(candidates, k - 1, axis=1)[:, k - 1]
    distances = np.empty(n)
    distances[order] = kth
    return distances


def knn_distances(samples, k: int) -> np.ndarray:
    """
    Distance from every sample to its k-th nearest other sample

    Args:
        samples: n x d matrix (a vector is treated as n x 1)
        k (int): Neighbor order, k < n

    Returns:
        np.ndarray: Length-n distances in sample order
    """
    samples = as_sample_matrix(samples)
    n = samples.shape[0]
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got n={n}", n=n, k=k)
    if samples.shape[1] == 1:
        return _knn_distances_sorted(samples[:, 0], k)
    tree = cKDTree(samples)
    # The query point itself is returned as its own 0-th neighbor
    distances, _ = tree.query(samples, k=k + 1)
    return distances[:, k]


def brute_force_knn_distances(samples, k: int) -> np.ndarray:
    """O(n^2) all-pairs reference for knn_distances"""
    samples = as_sample_matrix(samples)
    n = samples.shape[0]
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got n={n}", n=n, k=k)
    pairwise = cdist(samples, samples)
    np.fill_diagonal(pairwise, np.inf)
    return np.partition(pairwise, k - 1, axis=1)[:, k - 1]


def _jittered(samples: np.ndarray, cfg: KnnConfig, rng: SeededRng) -> np.ndarray:
    scale = float(np.std(samples))
    if scale == 0.0:
        scale = float(np.abs(samples).max()) or 1.0
    return samples + cfg.jitter_scale * scale * rng.standard_normal(samples.shape)


def _kl_entropy(samples: np.ndarray, cfg: KnnConfig, rng: Optional[SeededRng]) -> EntropyEstimate:
    n, d = samples.shape
    k = cfg.k
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got n={n}", n=n, k=k)

    distances = knn_distances(samples, k)
    if np.any(distances == 0.0):
        duplicates = int(np.count_nonzero(distances == 0.0))
        if cfg.degeneracy_policy == 'error':
            raise DegenerateDistanceError("zero k-th neighbor distance from duplicate points",
                                          duplicates=duplicates)
        logger.warning(f"{duplicates} zero neighbor distances, jittering samples")
        distances = knn_distances(_jittered(samples, cfg, as_rng(rng if rng is not None else cfg.jitter_seed)), k)
        if np.any(distances == 0.0):
            raise DegenerateDistanceError("zero k-th neighbor distance persists after jitter",
                                          duplicates=int(np.count_nonzero(distances == 0.0)))

    value = (float(digamma(n)) - float(digamma(k)) + log_unit_ball_volume(d)
             + d * float(np.mean(np.log(distances))))
    return EntropyEstimate(value=value, n=n, k=k)


def kl_entropy(samples, cfg: Optional[KnnConfig] = None,
               rng: Optional[SeededRng] = None) -> EntropyEstimate:
    """
    Kozachenko-Leonenko differential entropy of 1-D or 2-D samples

    H = psi(n) - psi(k) + log c_d + (d/n) * sum_i log eps_i, where eps_i is the
    Euclidean distance from sample i to its k-th nearest neighbor.

    Args:
        samples: n x d matrix with d in {1, 2}, or a length-n vector
        cfg (KnnConfig): Neighbor order and degeneracy policy
        rng (SeededRng, optional): Stream for jitter; defaults to cfg.jitter_seed

    Returns:
        EntropyEstimate: Value in nats

    Raises:
        DegenerateDistanceError: Duplicate points under the 'error' policy
        InsufficientSamplesError: n <= k
    """
    samples = as_sample_matrix(samples)
    if samples.shape[1] > 2:
        raise InvalidDimensionError(
            f"kl_entropy supports d in {{1, 2}}, got d={samples.shape[1]}; "
            f"use kl_entropy_multivariate", d=samples.shape[1])
    return _kl_entropy(samples, cfg or KnnConfig(), rng)


def kl_entropy_multivariate(samples, cfg: Optional[KnnConfig] = None,
                            rng: Optional[SeededRng] = None) -> EntropyEstimate:
    """Kozachenko-Leonenko entropy for samples of any dimension"""
    return _kl_entropy(as_sample_matrix(samples), cfg or KnnConfig(), rng)


def jitter_degenerate_pair(x, y, cfg: Optional[KnnConfig] = None,
                           rng: Optional[SeededRng] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Perturb a paired sample once when either marginal has zero neighbor distances

    The joint sample can only be degenerate when both marginals are, so the
    marginals decide. x is perturbed first, then y, from one stream; any
    projection of the result is the projection of the same perturbed data,
    which keeps sign flips exact. Under the 'error' policy the sample is
    returned unchanged and the caller raises for the failing term.

    Args:
        x: n x d_x samples (a vector is n x 1)
        y: n x d_y samples
        cfg (KnnConfig): Neighbor order, policy and jitter settings
        rng (SeededRng, optional): Jitter stream; defaults to cfg.jitter_seed

    Returns:
        tuple: (x, y) sample matrices
    """
    cfg = cfg or KnnConfig()
    x = as_sample_matrix(x, 'x')
    y = as_sample_matrix(y, 'y')
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if cfg.degeneracy_policy != 'jitter':
        return x, y
    duplicates = (int(np.count_nonzero(knn_distances(x, cfg.k) == 0.0))
                  + int(np.count_nonzero(knn_distances(y, cfg.k) == 0.0)))
    if duplicates == 0:
        return x, y
    logger.warning(f"{duplicates} zero neighbor distances, jittering samples")
    rng = as_rng(rng if rng is not None else cfg.jitter_seed)
    return _jittered(x, cfg, rng), _jittered(y, cfg, rng)


def kl_mi_1d(x, y, cfg: Optional[KnnConfig] = None, rng: Optional[SeededRng] = None) -> float:
    """
    Mutual information of two scalar variables by entropy decomposition

    I = H(x) + H(y) - H(x, y). Small negative values are possible and are
    returned unclipped. Tied samples are jittered once as a pair before any
    entropy term is computed.

    Args:
        x: Length-n vector
        y: Length-n vector
        cfg (KnnConfig): Estimator settings
        rng (SeededRng, optional): Jitter stream; defaults to cfg.jitter_seed

    Returns:
        float: Estimate in nats
    """
    cfg = cfg or KnnConfig()
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise DimensionMismatchError(f"x and y must have equal length, got {x.size} and {y.size}")
    if x.size <= cfg.k:
        raise InsufficientSamplesError(f"need more than k={cfg.k} samples, got n={x.size}", n=x.size, k=cfg.k)

    x, y = jitter_degenerate_pair(x, y, cfg, rng)
    strict = KnnConfig(k=cfg.k, degeneracy_policy='error')
    terms = {}
    for term, samples in (('joint', np.hstack([x, y])), ('x', x), ('y', y)):
        try:
            terms[term] = _kl_entropy(samples, strict, None).value
        except DegenerateDistanceError as e:
            raise e.with_context(term=term)
    return terms['x'] + terms['y'] - terms['joint']
