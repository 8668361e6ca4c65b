"""
Estimate records returned by the entropy, SMI and oracle services
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

UNITS = ('nats', 'bits')


def convert_unit(value: float, unit: str = 'nats') -> float:
    """Convert a nat-valued quantity to the requested presentation unit"""
    if unit == 'nats':
        return value
    if unit == 'bits':
        return value / math.log(2)
    raise ValueError(f"Unknown unit: {unit}")


@dataclass
class EntropyEstimate:
    """Differential entropy estimate in nats"""
    value: float
    n: int
    k: int

    def to_dict(self, unit: str = 'nats') -> Dict[str, Any]:
        return {'value': convert_unit(self.value, unit), 'n': self.n, 'k': self.k, 'unit': unit}


@dataclass
class SmiEstimate:
    """
    Monte-Carlo estimate over m slices.

    value is the mean of per_slice; std_error is the sample standard
    deviation of per_slice over sqrt(m). It treats slices as independent and
    ignores the correlation from reusing the same data points in every slice.
    """
    value: float
    per_slice: np.ndarray
    std_error: float
    directions: Optional[Tuple[np.ndarray, np.ndarray]] = None
    n: Optional[int] = None

    @property
    def m(self) -> int:
        return int(self.per_slice.size)

    @property
    def max_slice(self) -> float:
        """Largest per-slice value (max-sliced report)"""
        return float(np.max(self.per_slice))

    @property
    def min_slice(self) -> float:
        return float(np.min(self.per_slice))

    def quantiles(self, probs=(0.0, 0.25, 0.5, 0.75, 1.0)) -> Dict[str, float]:
        """Per-slice quantiles keyed by probability"""
        values = np.quantile(self.per_slice, probs)
        return {f"q{int(round(p * 100)):02d}": float(v) for p, v in zip(probs, values)}

    def to_dict(self, unit: str = 'nats', include_slices: bool = False) -> Dict[str, Any]:
        """Serialize, converting every information quantity to unit"""
        data = {
            'value': convert_unit(self.value, unit),
            'std_error': convert_unit(self.std_error, unit),
            'm': self.m,
            'n': self.n,
            'max_slice': convert_unit(self.max_slice, unit),
            'quantiles': {key: convert_unit(v, unit) for key, v in self.quantiles().items()},
            'unit': unit,
        }
        if include_slices:
            data['per_slice'] = [convert_unit(float(v), unit) for v in self.per_slice]
        return data

    @classmethod
    def from_slices(cls, per_slice: np.ndarray, n: Optional[int] = None,
                    directions: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> 'SmiEstimate':
        """
        Reduce per-slice values in index order

        Args:
            per_slice: Values ordered by slice index
            n: Sample count behind the values, if any
            directions: Optional (thetas, phis) arrays, one row per slice

        Returns:
            SmiEstimate: Mean, standard error and the raw slices
        """
        per_slice = np.asarray(per_slice, dtype=float)
        m = per_slice.size
        if m == 0:
            raise ValueError("at least one slice is required")
        lo, hi = float(per_slice.min()), float(per_slice.max())
        mean = math.fsum(per_slice.tolist()) / m
        # Rounding of the sum must not push the mean outside the slice range
        value = min(max(mean, lo), hi)
        std_error = float(np.std(per_slice, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        return cls(value=value, per_slice=per_slice, std_error=std_error,
                   directions=directions, n=n)
