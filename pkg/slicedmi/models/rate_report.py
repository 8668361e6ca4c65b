"""
Convergence-rate sweep records
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from slicedmi.exceptions import ConfigError
from slicedmi.models.base import BaseRecord
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.settings import DEGENERACY_POLICIES, check_seed

SWEEPS = ('joint', 'n', 'm', 'grid')
DEFAULT_SWEEPS = ('joint', 'n', 'm')
RATE_COLUMNS = ('n', 'm', 'rmse', 'mi_rmse', 'trials')


def _check_grid(values: List[int], name: str) -> List[int]:
    values = [int(v) for v in values]
    if not values:
        raise ConfigError(f"{name} must be non-empty")
    if min(values) < 1:
        raise ConfigError(f"{name} must be positive, got {values}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{name} must be strictly increasing, got {values}")
    return values


@dataclass
class RateGrid(BaseRecord):
    """
    RMSE sweep of the sliced estimator against a Gaussian ground truth.

    The joint sweep uses n = m over n_values, the n sweep pairs n_values with
    fixed_m and the m sweep pairs m_values with fixed_n. The grid sweep covers
    every (n, m) in n_values x m_values and has no slope fit. truth, when
    given, replaces the high-m Monte-Carlo oracle value. classic_mi adds the
    RMSE of the kNN classic MI estimator against the closed-form Gaussian MI,
    scored on the same draws.
    """
    spec: GaussianSpec
    n_values: List[int] = field(default_factory=lambda: [250, 500, 1000, 2000, 4000])
    m_values: List[int] = field(default_factory=lambda: [250, 500, 1000, 2000, 4000])
    trials: int = 10
    fixed_n: int = 10000
    fixed_m: int = 10000
    seed: Optional[int] = None
    k: int = 3
    degeneracy_policy: str = 'jitter'
    sweeps: List[str] = field(default_factory=lambda: list(DEFAULT_SWEEPS))
    truth: Optional[float] = None
    truth_slices: int = 1000000
    classic_mi: bool = False
    threads: int = 1

    nested = {'spec': GaussianSpec}

    def __post_init__(self):
        if isinstance(self.spec, dict):
            self.spec = GaussianSpec.from_dict(self.spec)
        if not isinstance(self.spec, GaussianSpec):
            raise ConfigError("rate sweeps need a Gaussian spec for the ground truth")
        self.n_values = _check_grid(self.n_values, 'n_values')
        self.m_values = _check_grid(self.m_values, 'm_values')
        for name in ('trials', 'fixed_n', 'fixed_m', 'k', 'truth_slices', 'threads'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        self.sweeps = list(self.sweeps)
        unknown = sorted(set(self.sweeps) - set(SWEEPS))
        if unknown or not self.sweeps:
            raise ConfigError(f"sweeps must be a non-empty subset of {SWEEPS}, got {self.sweeps}")
        if self.degeneracy_policy not in DEGENERACY_POLICIES:
            raise ConfigError(f"degeneracy_policy must be one of {DEGENERACY_POLICIES}")
        if not isinstance(self.classic_mi, bool):
            raise ConfigError(f"classic_mi must be a boolean, got {self.classic_mi!r}")
        check_seed(self.seed)

    def sweep_cells(self) -> Dict[str, List[Tuple[int, int]]]:
        """(n, m) cells of every requested sweep, in grid order"""
        cells = {
            'joint': [(n, n) for n in self.n_values],
            'n': [(n, self.fixed_m) for n in self.n_values],
            'm': [(self.fixed_n, m) for m in self.m_values],
            'grid': [(n, m) for n in self.n_values for m in self.m_values],
        }
        return {name: cells[name] for name in SWEEPS if name in self.sweeps}

    def unique_cells(self) -> List[Tuple[int, int]]:
        """Cells of all sweeps with duplicates removed, first occurrence first"""
        seen = {}
        for cells in self.sweep_cells().values():
            for cell in cells:
                seen.setdefault(cell, None)
        return list(seen)


@dataclass
class SlopeFit:
    """Least-squares fit of log(rmse) against log(axis)"""
    slope: float
    intercept: float
    residual_rms: float
    excluded_smallest: bool
    points: int

    def to_dict(self) -> Dict[str, Any]:
        return {'slope': self.slope, 'intercept': self.intercept, 'residual_rms': self.residual_rms,
                'excluded_smallest': self.excluded_smallest, 'points': self.points}


@dataclass
class RateRow:
    n: int
    m: int
    rmse: float
    trials: int
    mi_rmse: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'm': self.m, 'rmse': self.rmse, 'mi_rmse': self.mi_rmse, 'trials': self.trials}


@dataclass
class RateReport:
    """Per-cell RMSE plus log-log slopes of each sweep"""
    rows: List[RateRow]
    truth: float
    sweeps: Dict[str, List[Tuple[int, int]]]
    slope_n: Optional[SlopeFit] = None
    slope_m: Optional[SlopeFit] = None
    slope_joint: Optional[SlopeFit] = None
    mi_truth: Optional[float] = None

    def rmse(self, n: int, m: int) -> float:
        for row in self.rows:
            if (row.n, row.m) == (n, m):
                return row.rmse
        raise KeyError((n, m))

    def summary(self, unit_scale: float = 1.0) -> Dict[str, Any]:
        """Side-car document: truth, sweep membership and slope fits"""
        return {
            'truth': self.truth * unit_scale,
            'mi_truth': self.mi_truth * unit_scale if self.mi_truth is not None else None,
            'sweeps': {name: [list(cell) for cell in cells] for name, cells in self.sweeps.items()},
            'slope_n': self.slope_n.to_dict() if self.slope_n else None,
            'slope_m': self.slope_m.to_dict() if self.slope_m else None,
            'slope_joint': self.slope_joint.to_dict() if self.slope_joint else None,
        }


@dataclass
class LogConcaveCheck:
    """Outcome of comparing sampled slice MI with the log-concave per-slice ceiling"""
    holds: bool
    margin: float
    bound: float
    max_slice_mi: float
    slices: int

    def to_dict(self) -> Dict[str, Any]:
        return {'holds': self.holds, 'margin': self.margin, 'bound': self.bound,
                'max_slice_mi': self.max_slice_mi, 'slices': self.slices}
