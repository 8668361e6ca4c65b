"""
Seeded random streams, uniform sphere sampling and slicing projections
"""
import logging
from typing import Optional, Tuple

import numpy as np

from slicedmi.exceptions import DimensionMismatchError, InvalidDimensionError, NumericalError

logger = logging.getLogger(__name__)

UINT64_MAX = 2 ** 64 - 1


class SeededRng:
    """
    Reproducible random stream.

    Uses numpy's Philox counter-based bit generator keyed by a SeedSequence
    built from (seed, stream). The output sequence depends only on those two
    values, not on the platform or process. Sub-streams for parallel consumers
    are derived with spawn(); a stream must not be shared between threads.
    """

    def __init__(self, seed: Optional[int] = None, stream: Tuple[int, ...] = ()):
        if seed is None:
            # OS entropy only when no seed is supplied; kept for provenance
            seed = int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
            logger.debug(f"No seed supplied, drew seed {seed} from OS entropy")
        seed = int(seed)
        if not 0 <= seed <= UINT64_MAX:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.stream = tuple(int(i) for i in stream)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def spawn(self, *index: int) -> 'SeededRng':
        """Independent sub-stream keyed by (seed, stream + index)"""
        return SeededRng(self.seed, self.stream + tuple(index))

    def derive_seed(self, *index: int) -> int:
        """A 64-bit seed drawn from the sub-stream at index"""
        return int(self.spawn(*index).generator.integers(0, UINT64_MAX, dtype=np.uint64, endpoint=True))

    def standard_normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def as_rng(rng) -> SeededRng:
    """Accept a SeededRng, an integer seed or None"""
    if isinstance(rng, SeededRng):
        return rng
    return SeededRng(rng)


def sample_unit_sphere_batch(m: int, d: int, rng: SeededRng) -> np.ndarray:
    """
    Draw m directions uniformly from the unit sphere in R^d

    For d = 1 the sphere is {-1, +1} and each row is a fair sign draw.
    Otherwise rows are normalized standard Gaussian draws.

    Args:
        m (int): Number of directions
        d (int): Ambient dimension
        rng (SeededRng): Random stream

    Returns:
        np.ndarray: Array of shape (m, d) with unit rows
    """
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise InvalidDimensionError(f"sphere dimension must be a positive integer, got {d}", d=d)
    if m < 0:
        raise ValueError(f"number of directions must be non-negative, got {m}")
    d = int(d)

    if d == 1:
        signs = rng.integers(0, 2, size=(m, 1)).astype(float)
        return 2.0 * signs - 1.0

    draws = rng.standard_normal((m, d))
    norms = np.linalg.norm(draws, axis=1)
    # A zero-norm Gaussian draw has probability zero; redraw rather than divide
    for _ in range(100):
        bad = norms < 1e-300
        if not bad.any():
            break
        draws[bad] = rng.standard_normal((int(bad.sum()), d))
        norms[bad] = np.linalg.norm(draws[bad], axis=1)
    else:
        raise NumericalError("could not draw a non-zero Gaussian vector", d=d)
    return draws / norms[:, None]


def sample_unit_sphere(d: int, rng: SeededRng) -> np.ndarray:
    """Draw a single direction uniformly from the unit sphere in R^d"""
    return sample_unit_sphere_batch(1, d, rng)[0]


def as_sample_matrix(samples, name: str = 'samples') -> np.ndarray:
    """
    Validate a sample matrix (one sample per row)

    Vectors are treated as n x 1 matrices.

    Raises:
        InvalidDimensionError: Empty or more than two-dimensional input
        NumericalError: Non-finite entries
    """
    matrix = np.asarray(samples, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise InvalidDimensionError(f"{name} must be a non-empty n x d matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"{name} contains non-finite entries")
    return matrix


def project(samples, direction) -> np.ndarray:
    """
    Slice samples along a direction

    Args:
        samples: n x d sample matrix
        direction: Unit vector of length d

    Returns:
        np.ndarray: Length-n vector of inner products
    """
    samples = as_sample_matrix(samples)
    direction = np.asarray(direction, dtype=float).reshape(-1)
    if samples.shape[1] != direction.size:
        raise DimensionMismatchError(
            f"samples have {samples.shape[1]} columns but direction has dimension {direction.size}")
    return samples @ direction


def project_many(samples, directions) -> np.ndarray:
    """
    Slice samples along every direction at once

    Args:
        samples: n x d sample matrix
        directions: m x d matrix of unit rows

    Returns:
        np.ndarray: n x m matrix whose column i is the projection on row i
    """
    samples = as_sample_matrix(samples)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if samples.shape[1] != directions.shape[1]:
        raise DimensionMismatchError(
            f"samples have {samples.shape[1]} columns but directions have dimension {directions.shape[1]}")
    return samples @ directions.T
