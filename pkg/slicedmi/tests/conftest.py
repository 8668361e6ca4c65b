"""
Pytest configuration for the sliced mutual information toolkit
"""
import json
import os

import numpy as np
import pytest
from scipy.integrate import dblquad
from unittest.mock import patch

from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.services.sampling_service import SeededRng

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')
OVERLAP_FIXTURE = os.path.join(FIXTURE_DIR, 'overlap_oracle.json')

# Monte-Carlo cross-check of the pinned overlap value
OVERLAP_ORACLE_SEED = 20220101
OVERLAP_ORACLE_SLICES = 10 ** 5


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: statistical acceptance tests with long runtimes')


@pytest.fixture(scope="session", autouse=True)
def mock_env_vars(tmp_path_factory):
    """Testing profile with output kept out of the working tree"""
    with patch.dict(os.environ, {
        "SMI_ENV": "testing",
        "SMI_OUTPUT_DIR": str(tmp_path_factory.mktemp('results')),
        "LOG_LEVEL": "WARNING",
    }):
        yield


@pytest.fixture
def rng():
    """Seeded random stream"""
    return SeededRng(1234)


@pytest.fixture
def gaussian_pair():
    """Factory for n draws of a scalar Gaussian pair with correlation rho"""
    def make(rho, n, seed=0):
        x, y = GaussianSpec.scalar(rho).sample(n, SeededRng(seed))
        return x[:, 0], y[:, 0]
    return make


@pytest.fixture(scope="session")
def overlap_spec():
    """X = Z_{1:3}, Y = Z_{2:4} with Z ~ N(0, I_4)"""
    return GaussianSpec.overlap(4, (1, 3), (2, 4))


@pytest.fixture(scope="session")
def overlap_oracle():
    """Pinned SMI of the overlap spec, from tests/fixtures/overlap_oracle.json"""
    if os.path.exists(OVERLAP_FIXTURE):
        with open(OVERLAP_FIXTURE, 'r') as handle:
            return json.load(handle)
    value, error = overlap_smi_quadrature()
    return {'value': value, 'abs_error': error, 'method': 'quadrature'}


def overlap_smi_quadrature():
    """
    SMI of X = Z_{1:3}, Y = Z_{2:4} reduced to a two-dimensional integral

    A slice correlation is r s cos(alpha): r and s are the radii of the shared
    coordinates of theta and phi, whose free coordinates t and w are uniform on
    [-1, 1], and alpha is uniform. Averaging -1/2 log(1 - rho^2) over alpha in
    closed form leaves -log((1 + sqrt(1 - (1 - t^2)(1 - w^2))) / 2) over the
    unit square.

    Returns:
        tuple: (value in nats, absolute error estimate)
    """
    def integrand(w, t):
        return -np.log((1.0 + np.sqrt(t * t + w * w - t * t * w * w)) / 2.0)
    value, error = dblquad(integrand, 0.0, 1.0, 0.0, 1.0, epsabs=1e-11, epsrel=1e-11)
    return float(value), float(error)


def random_spec(seed, d_x=3, d_y=3, max_cca=0.95):
    """Random valid Gaussian spec with canonical correlation at most max_cca"""
    stream = SeededRng(seed)
    a = stream.standard_normal((d_x, d_x))
    b = stream.standard_normal((d_y, d_y))
    sigma_x = a @ a.T + 0.5 * np.eye(d_x)
    sigma_y = b @ b.T + 0.5 * np.eye(d_y)
    cross = stream.standard_normal((d_x, d_y))
    top = np.linalg.svd(cross, compute_uv=False).max()
    cross *= max_cca * stream.uniform(0.05, 1.0) / top

    def sqrtm(matrix):
        values, vectors = np.linalg.eigh(matrix)
        return (vectors * np.sqrt(values)) @ vectors.T

    sigma_xy = sqrtm(sigma_x) @ cross @ sqrtm(sigma_y)
    return GaussianSpec(mean_x=np.zeros(d_x), mean_y=np.zeros(d_y),
                        sigma_x=sigma_x, sigma_y=sigma_y, sigma_xy=sigma_xy)
