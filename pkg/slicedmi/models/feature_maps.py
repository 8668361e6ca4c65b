"""
Linear feature maps learned by SMI maximization
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np


def _matrix_to_dict(matrix: Optional[np.ndarray]) -> Optional[Dict[str, Any]]:
    if matrix is None:
        return None
    return {'shape': list(matrix.shape), 'values': matrix.reshape(-1).tolist()}


def _matrix_from_dict(data: Optional[Dict[str, Any]]) -> Optional[np.ndarray]:
    if data is None:
        return None
    return np.asarray(data['values'], dtype=float).reshape(tuple(data['shape']))


@dataclass
class FeatureMaps:
    """A_x (r_x x d_x) and optional A_y (r_y x d_y); A_y is None when Y is unprocessed"""
    a_x: np.ndarray
    a_y: Optional[np.ndarray] = None

    def apply(self, x: np.ndarray, y: np.ndarray):
        """Mapped samples (A_x x, A_y y)"""
        mapped_y = y if self.a_y is None else y @ self.a_y.T
        return x @ self.a_x.T, mapped_y

    def row_alignment(self, axis: int = 0) -> np.ndarray:
        """|cosine similarity| of every A_x row with the basis vector e_axis"""
        norms = np.linalg.norm(self.a_x, axis=1)
        norms[norms == 0.0] = np.inf
        return np.abs(self.a_x[:, axis]) / norms

    def dominant_indices(self) -> np.ndarray:
        """1-based index of the largest-magnitude coordinate of every A_x row"""
        return np.argmax(np.abs(self.a_x), axis=1) + 1

    def to_dict(self) -> Dict[str, Any]:
        return {'a_x': _matrix_to_dict(self.a_x), 'a_y': _matrix_to_dict(self.a_y)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FeatureMaps':
        return cls(a_x=_matrix_from_dict(data['a_x']), a_y=_matrix_from_dict(data.get('a_y')))
