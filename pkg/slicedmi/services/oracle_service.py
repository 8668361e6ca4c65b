"""
Gaussian Oracle Service

Closed-form per-slice mutual information, Monte-Carlo sliced mutual
information and canonical correlation for jointly Gaussian specifications.
"""
import logging
import math

import numpy as np
from scipy.integrate import trapezoid

from slicedmi.exceptions import DimensionMismatchError, InvalidSpecError, NearSingularError
from slicedmi.models.estimates import SmiEstimate
from slicedmi.models.gaussian_spec import EIGEN_FLOOR, GaussianSpec
from slicedmi.services.sampling_service import as_rng, sample_unit_sphere_batch

logger = logging.getLogger(__name__)

SINGULAR_THRESHOLD = 1.0 - 1e-12
MC_CHUNK = 100000


def _inverse_sqrt(matrix: np.ndarray, name: str) -> np.ndarray:
    # Symmetric eigendecomposition with an eigenvalue floor
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    if eigenvalues.min() < EIGEN_FLOOR:
        raise InvalidSpecError(f"{name} is not positive definite", min_eigenvalue=float(eigenvalues.min()))
    return (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T


class GaussianOracleService:
    """Ground-truth quantities for jointly Gaussian (X, Y)"""

    @staticmethod
    def slice_correlation_batch(spec: GaussianSpec, thetas, phis) -> np.ndarray:
        """
        Correlation of theta^T X and phi^T Y for paired direction rows

        Args:
            spec: Gaussian specification
            thetas: m x d_x directions
            phis: m x d_y directions

        Returns:
            np.ndarray: Length-m correlations clipped to [-1, 1]
        """
        spec.validate()
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        phis = np.atleast_2d(np.asarray(phis, dtype=float))
        if thetas.shape[1] != spec.d_x or phis.shape[1] != spec.d_y:
            raise DimensionMismatchError(
                f"directions of dimension ({thetas.shape[1]}, {phis.shape[1]}) do not match "
                f"spec dimensions ({spec.d_x}, {spec.d_y})")
        if thetas.shape[0] != phis.shape[0]:
            raise DimensionMismatchError("thetas and phis must have the same number of rows")

        cross = np.einsum('ij,jk,ik->i', thetas, spec.sigma_xy, phis)
        var_x = np.einsum('ij,jk,ik->i', thetas, spec.sigma_x, thetas)
        var_y = np.einsum('ij,jk,ik->i', phis, spec.sigma_y, phis)
        return np.clip(cross / np.sqrt(var_x * var_y), -1.0, 1.0)

    @staticmethod
    def slice_correlation(spec: GaussianSpec, theta, phi) -> float:
        """Correlation coefficient of theta^T X and phi^T Y"""
        return float(GaussianOracleService.slice_correlation_batch(
            spec, np.reshape(theta, (1, -1)), np.reshape(phi, (1, -1)))[0])

    @staticmethod
    def mi_from_correlation(rho) -> np.ndarray:
        """-1/2 log(1 - rho^2), refusing |rho| at or above 1 - 1e-12"""
        rho = np.asarray(rho, dtype=float)
        worst = float(np.max(np.abs(rho))) if rho.size else 0.0
        if worst >= SINGULAR_THRESHOLD:
            raise NearSingularError("slice correlation is numerically +-1 (degenerate linear dependence)",
                                    rho=worst)
        return -0.5 * np.log1p(-rho * rho)

    @staticmethod
    def slice_mi_batch(spec: GaussianSpec, thetas, phis) -> np.ndarray:
        """Closed-form mutual information of every slice pair"""
        rho = GaussianOracleService.slice_correlation_batch(spec, thetas, phis)
        return GaussianOracleService.mi_from_correlation(rho)

    @staticmethod
    def slice_mi(spec: GaussianSpec, theta, phi) -> float:
        """Closed-form mutual information of (theta^T X, phi^T Y) in nats"""
        rho = GaussianOracleService.slice_correlation(spec, theta, phi)
        return float(GaussianOracleService.mi_from_correlation(rho))

    @staticmethod
    def gaussian_smi_mc(spec: GaussianSpec, m: int, seed=None,
                        store_directions: bool = False) -> SmiEstimate:
        """
        Monte-Carlo average of closed-form slice MI over uniform directions

        Directions are drawn up front in fixed order and processed in chunks;
        the reduction is by slice index.

        Args:
            spec: Gaussian specification
            m (int): Number of direction pairs
            seed: Integer seed or SeededRng
            store_directions (bool): Keep the drawn directions in the result

        Returns:
            SmiEstimate: Mean slice MI with standard error
        """
        if m < 1:
            raise ValueError(f"m must be positive, got {m}")
        spec.validate()
        rng = as_rng(seed)
        logger.info(f"Gaussian SMI oracle with m={m} (d_x={spec.d_x}, d_y={spec.d_y}, seed={rng.seed})")

        thetas = sample_unit_sphere_batch(m, spec.d_x, rng)
        phis = sample_unit_sphere_batch(m, spec.d_y, rng)
        per_slice = np.empty(m)
        for start in range(0, m, MC_CHUNK):
            stop = min(start + MC_CHUNK, m)
            per_slice[start:stop] = GaussianOracleService.slice_mi_batch(
                spec, thetas[start:stop], phis[start:stop])
        directions = (thetas, phis) if store_directions else None
        return SmiEstimate.from_slices(per_slice, directions=directions)

    @staticmethod
    def canonical_correlations(spec: GaussianSpec) -> np.ndarray:
        """Singular values of S_x^{-1/2} S_xy S_y^{-1/2}, clipped to [0, 1], largest first"""
        spec.validate()
        whitened = (_inverse_sqrt(spec.sigma_x, 'sigma_x') @ spec.sigma_xy
                    @ _inverse_sqrt(spec.sigma_y, 'sigma_y'))
        return np.clip(np.linalg.svd(whitened, compute_uv=False), 0.0, 1.0)

    @staticmethod
    def cca_coefficient(spec: GaussianSpec) -> float:
        """Canonical correlation coefficient: the largest canonical correlation"""
        correlations = GaussianOracleService.canonical_correlations(spec)
        return float(correlations.max()) if correlations.size else 0.0

    @staticmethod
    def gaussian_mi(spec: GaussianSpec) -> float:
        """
        Classic mutual information -1/2 sum log(1 - rho_i^2) over canonical correlations

        Raises:
            NearSingularError: A canonical correlation is numerically 1, so I(X; Y) is infinite
        """
        correlations = GaussianOracleService.canonical_correlations(spec)
        return float(np.sum(GaussianOracleService.mi_from_correlation(correlations)))

    @staticmethod
    def gaussian_smi_upper_bound(spec: GaussianSpec) -> float:
        """SMI ceiling -1/2 log(1 - rho_CCA^2)"""
        rho = GaussianOracleService.cca_coefficient(spec)
        return float(GaussianOracleService.mi_from_correlation(rho))

    @staticmethod
    def gaussian_smi_quadrature_2d(spec: GaussianSpec, grid: int = 720) -> float:
        """
        SMI for d_x = d_y = 2 by trapezoid quadrature over both circle angles

        Args:
            spec: Gaussian specification with two-dimensional X and Y
            grid (int): Points per angle on [0, 2 pi]

        Returns:
            float: Average slice MI in nats
        """
        if spec.d_x != 2 or spec.d_y != 2:
            raise DimensionMismatchError("quadrature requires d_x = d_y = 2")
        angles = np.linspace(0.0, 2.0 * np.pi, grid + 1)
        circle = np.column_stack([np.cos(angles), np.sin(angles)])
        theta_idx, phi_idx = np.meshgrid(np.arange(angles.size), np.arange(angles.size), indexing='ij')
        values = GaussianOracleService.slice_mi_batch(
            spec, circle[theta_idx.ravel()], circle[phi_idx.ravel()]).reshape(angles.size, angles.size)
        inner = trapezoid(values, angles, axis=1)
        return float(trapezoid(inner, angles) / (2.0 * np.pi) ** 2)

    @staticmethod
    def logconcave_slice_bound(spec: GaussianSpec) -> float:
        """Per-slice ceiling 1/2 log((pi^2 / 8) / (1 - rho_CCA^2)) for log-concave pairs"""
        rho = GaussianOracleService.cca_coefficient(spec)
        if rho >= SINGULAR_THRESHOLD:
            raise NearSingularError("canonical correlation is numerically 1", rho=rho)
        return 0.5 * math.log((math.pi ** 2 / 8.0) / (1.0 - rho * rho))
