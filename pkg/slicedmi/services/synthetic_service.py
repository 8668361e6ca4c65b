"""
Synthetic Data Service

Seeded generators for the convergence, independence-testing and
feature-extraction experiments.
"""
import logging
from typing import Tuple

import numpy as np

from slicedmi.exceptions import DimensionMismatchError
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.scenario import Scenario
from slicedmi.services.sampling_service import SeededRng, as_rng, as_sample_matrix

logger = logging.getLogger(__name__)

SQRT_HALF = np.sqrt(0.5)


class SyntheticDataService:
    """Service for generating paired samples (X, Y)"""

    @staticmethod
    def generate(scenario: Scenario) -> Tuple[np.ndarray, np.ndarray]:
        """
        Generate n paired samples for a scenario

        Args:
            scenario (Scenario): Kind, size, dimensions and seed

        Returns:
            tuple: (x, y) sample matrices with one row per draw
        """
        rng = as_rng(scenario.seed)
        n = scenario.n
        generator = _GENERATORS[scenario.kind]
        logger.debug(f"Generating {scenario.kind} scenario (n={n}, seed={rng.seed})")
        x, y = generator(scenario, n, rng)
        return x, y

    @staticmethod
    def shuffle_pairing(x, y, rng) -> Tuple[np.ndarray, np.ndarray]:
        """
        Break the pairing of (x, y) by a uniform permutation of the y rows

        Marginals are preserved exactly; dependence is destroyed.
        """
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatchError(f"row counts differ: {x.shape[0]} and {y.shape[0]}")
        permutation = as_rng(rng).permutation(y.shape[0])
        return x, y[permutation]

    @staticmethod
    def sample_gaussian(spec: GaussianSpec, n: int, rng) -> Tuple[np.ndarray, np.ndarray]:
        """Draw n samples from a jointly Gaussian specification"""
        return spec.sample(n, as_rng(rng))

    @staticmethod
    def scale_coordinates(x, scales) -> np.ndarray:
        """
        Coordinate-wise scaling g(x) = (a_1 x_1, ..., a_d x_d)

        Used to show that SMI can increase under processing, e.g.
        scales = (1, 0.25) on a two-dimensional X.
        """
        x = as_sample_matrix(x)
        scales = np.asarray(scales, dtype=float).reshape(-1)
        if scales.size != x.shape[1]:
            raise DimensionMismatchError(f"{scales.size} scales for {x.shape[1]} columns")
        return x * scales


def _overlap(scenario: Scenario, n: int, rng: SeededRng):
    z = rng.standard_normal((n, scenario.d_total))
    x0, x1 = scenario.x_range
    y0, y1 = scenario.y_range
    return z[:, x0 - 1:x1].copy(), z[:, y0 - 1:y1].copy()


def _one_feature_linear(scenario: Scenario, n: int, rng: SeededRng):
    d = scenario.d
    x = rng.standard_normal((n, d))
    z = rng.standard_normal((n, d))
    feature = x.sum(axis=1, keepdims=True) / np.sqrt(d)
    return x, SQRT_HALF * (feature * np.ones((1, d)) + z)


def _one_feature_sin(scenario: Scenario, n: int, rng: SeededRng):
    d = scenario.d
    x = rng.standard_normal((n, d))
    z = rng.standard_normal((n, d))
    feature = np.sin(x.sum(axis=1, keepdims=True)) / np.sqrt(d)
    return x, SQRT_HALF * (feature * np.ones((1, d)) + z)


def _two_features(scenario: Scenario, n: int, rng: SeededRng):
    d = scenario.d
    half = d // 2
    x = rng.standard_normal((n, d))
    z = rng.standard_normal((n, d))
    # First floor(d/2) outputs see the first floor(d/2) inputs, the rest the last ceil(d/2)
    first = x[:, :half].sum(axis=1, keepdims=True) / d
    second = x[:, half:].sum(axis=1, keepdims=True) / d
    signal = np.hstack([np.repeat(first, half, axis=1), np.repeat(second, d - half, axis=1)])
    return x, SQRT_HALF * (signal + z)


def _low_rank(scenario: Scenario, n: int, rng: SeededRng):
    d = scenario.d
    # Projections are redrawn on every call, i.i.d. N(0, 1), not orthonormalized
    p1 = rng.standard_normal((d, 2))
    p2 = rng.standard_normal((d, 2))
    v = rng.standard_normal((n, 2))
    z1 = rng.standard_normal((n, d))
    z2 = rng.standard_normal((n, d))
    return v @ p1.T + z1, v @ p2.T + z2


def _independent(scenario: Scenario, n: int, rng: SeededRng):
    d = scenario.d
    x = rng.standard_normal((n, d))
    z = rng.standard_normal((n, d))
    return x, SQRT_HALF * (x + z)


def _feature_needle(scenario: Scenario, n: int, rng: SeededRng):
    # Scalar Y = e_1^T X + Z_0 with unit-variance scalar noise
    x = rng.standard_normal((n, scenario.d))
    noise = rng.standard_normal((n, 1))
    return x, x[:, :1] + noise


_GENERATORS = {
    'overlap': _overlap,
    'one_feature_linear': _one_feature_linear,
    'one_feature_sin': _one_feature_sin,
    'two_features': _two_features,
    'low_rank': _low_rank,
    'independent': _independent,
    'feature_needle': _feature_needle,
}
