"""
Estimator and training settings
"""
from dataclasses import dataclass, field
from typing import Optional

from slicedmi.exceptions import ConfigError
from slicedmi.models.base import BaseRecord

DEGENERACY_POLICIES = ('error', 'jitter')
OPTIMIZERS = ('sgd', 'adam')
UINT64_MAX = 2 ** 64 - 1


def check_seed(seed: Optional[int]) -> None:
    """Validate an optional 64-bit unsigned seed"""
    if seed is None:
        return
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= UINT64_MAX:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")


@dataclass
class KnnConfig(BaseRecord):
    """Kozachenko-Leonenko estimator settings (entropies in nats)"""
    k: int = 3
    degeneracy_policy: str = 'jitter'
    jitter_scale: float = 1e-10
    # Stream of the one-off jitter applied to degenerate paired samples
    jitter_seed: int = 0

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if self.degeneracy_policy not in DEGENERACY_POLICIES:
            raise ConfigError(f"degeneracy_policy must be one of {DEGENERACY_POLICIES}, "
                              f"got {self.degeneracy_policy!r}")
        if not self.jitter_scale > 0:
            raise ConfigError(f"jitter_scale must be positive, got {self.jitter_scale!r}")
        check_seed(self.jitter_seed)
        if self.jitter_seed is None:
            raise ConfigError("jitter_seed must be an integer")


@dataclass
class SmiConfig(BaseRecord):
    """Monte-Carlo sliced estimator settings"""
    m: int = 1000
    knn: KnnConfig = field(default_factory=KnnConfig)
    seed: Optional[int] = None
    clip_negative_slices: bool = False
    store_directions: bool = False
    threads: int = 1

    nested = {'knn': KnnConfig}

    def __post_init__(self):
        if isinstance(self.knn, dict):
            self.knn = KnnConfig.from_dict(self.knn)
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m!r}")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")
        check_seed(self.seed)


@dataclass
class TrainConfig(BaseRecord):
    """Variational (Donsker-Varadhan) training settings"""
    epochs: int = 200
    batch_size: int = 256
    learning_rate: float = 1e-3
    optimizer: str = 'adam'
    seed: Optional[int] = None
    resample_directions_per_batch: bool = True
    hidden: int = 100
    slicing: bool = True
    holdout_fraction: float = 0.2
    smoothing_epochs: int = 10
    eval_slices: int = 200

    def __post_init__(self):
        for name in ('epochs', 'batch_size', 'hidden', 'smoothing_epochs', 'eval_slices'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not 0 < self.holdout_fraction < 1:
            raise ConfigError(f"holdout_fraction must lie in (0, 1), got {self.holdout_fraction!r}")
        check_seed(self.seed)
