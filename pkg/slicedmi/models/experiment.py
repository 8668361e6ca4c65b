"""
Independence-testing experiment records
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from slicedmi.exceptions import ConfigError, InputError
from slicedmi.models.base import BaseRecord
from slicedmi.models.scenario import resolve_kind
from slicedmi.models.settings import DEGENERACY_POLICIES, check_seed

ESTIMATORS = ('SMI', 'MI')
CSV_COLUMNS = ('scenario', 'd', 'n', 'estimator', 'auc', 'trials', 'm', 'k', 'seed', 'error')
SCORE_COLUMNS = ('scenario', 'd', 'n', 'estimator', 'trial', 'label', 'score')


@dataclass
class RocInput:
    """Test statistics on dependent (positive) and independent (negative) datasets"""
    positive_scores: np.ndarray
    negative_scores: np.ndarray

    def __post_init__(self):
        self.positive_scores = np.asarray(self.positive_scores, dtype=float).reshape(-1)
        self.negative_scores = np.asarray(self.negative_scores, dtype=float).reshape(-1)
        if self.positive_scores.size == 0 or self.negative_scores.size == 0:
            raise InputError("ROC input needs at least one positive and one negative score")
        if not (np.all(np.isfinite(self.positive_scores)) and np.all(np.isfinite(self.negative_scores))):
            raise InputError("ROC scores must be finite")


@dataclass
class ExperimentPlan(BaseRecord):
    """Grid of (dimension, sample size) cells for one scenario"""
    scenario: str
    dims: List[int]
    sample_sizes: List[int]
    trials: int = 20
    m: int = 1000
    k: int = 3
    seed: Optional[int] = None
    degeneracy_policy: str = 'jitter'
    threads: int = 1

    def __post_init__(self):
        self.scenario = resolve_kind(self.scenario)
        if self.scenario == 'overlap':
            raise ConfigError("overlap is not an independence-testing scenario")
        self.dims = [int(d) for d in self.dims]
        self.sample_sizes = [int(n) for n in self.sample_sizes]
        if not self.dims or not self.sample_sizes:
            raise ConfigError("dims and sample_sizes must be non-empty")
        for name in ('trials', 'm', 'k', 'threads'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if min(self.dims) < 1 or min(self.sample_sizes) < 1:
            raise ConfigError("dims and sample_sizes must be positive")
        if self.degeneracy_policy not in DEGENERACY_POLICIES:
            raise ConfigError(f"degeneracy_policy must be one of {DEGENERACY_POLICIES}")
        check_seed(self.seed)
