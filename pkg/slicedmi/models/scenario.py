"""
Synthetic experiment scenarios
"""
from dataclasses import dataclass
from typing import List, Optional

from slicedmi.exceptions import ScenarioError
from slicedmi.models.base import BaseRecord
from slicedmi.models.settings import check_seed

KINDS = (
    'overlap',
    'one_feature_linear',
    'one_feature_sin',
    'two_features',
    'low_rank',
    'independent',
    'feature_needle',
)

# Short labels (a)-(e) of the independence-testing scenarios
LABELS = {
    'a': 'one_feature_linear',
    'b': 'one_feature_sin',
    'c': 'two_features',
    'd': 'low_rank',
    'e': 'independent',
}


def resolve_kind(kind: str) -> str:
    """Map a scenario label or name to its canonical kind"""
    name = LABELS.get(str(kind).strip().strip('()').lower(), kind)
    if name not in KINDS:
        raise ScenarioError(f"Unknown scenario kind: {kind}", allowed=list(KINDS) + sorted(LABELS))
    return name


@dataclass
class Scenario(BaseRecord):
    """
    A seeded synthetic dataset definition.

    overlap uses d_total with 1-based inclusive x_range / y_range; every other
    kind uses d. low_rank always has a rank-2 common signal.
    """
    kind: str
    n: int
    seed: Optional[int] = None
    d: Optional[int] = None
    d_total: Optional[int] = None
    x_range: Optional[List[int]] = None
    y_range: Optional[List[int]] = None

    def __post_init__(self):
        self.kind = resolve_kind(self.kind)
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ScenarioError(f"n must be a positive integer, got {self.n!r}")
        check_seed(self.seed)

        if self.kind == 'overlap':
            if self.d_total is None or self.x_range is None or self.y_range is None:
                raise ScenarioError("overlap requires d_total, x_range and y_range")
            if self.d_total < 1:
                raise ScenarioError(f"d_total must be positive, got {self.d_total}")
            for name in ('x_range', 'y_range'):
                bounds = list(getattr(self, name))
                if len(bounds) != 2 or not 1 <= bounds[0] <= bounds[1] <= self.d_total:
                    raise ScenarioError(f"{name}={bounds} is not within 1..{self.d_total}")
                setattr(self, name, bounds)
            return

        if self.d is None or isinstance(self.d, bool) or not isinstance(self.d, int) or self.d < 1:
            raise ScenarioError(f"{self.kind} requires a positive dimension d, got {self.d!r}")
        if self.kind == 'two_features' and self.d < 2:
            raise ScenarioError(f"two_features requires d >= 2, got {self.d}")

    @property
    def d_x(self) -> int:
        if self.kind == 'overlap':
            return self.x_range[1] - self.x_range[0] + 1
        return self.d

    @property
    def d_y(self) -> int:
        if self.kind == 'overlap':
            return self.y_range[1] - self.y_range[0] + 1
        if self.kind == 'feature_needle':
            return 1
        return self.d
