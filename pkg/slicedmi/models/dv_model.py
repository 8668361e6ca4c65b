"""
Two-layer potential network for the Donsker-Varadhan objective
"""
import math
from typing import Any, Dict

import numpy as np
import torch
from torch import nn

from slicedmi.exceptions import ConfigError

DTYPE = torch.float64


def tensor_to_dict(tensor: torch.Tensor) -> Dict[str, Any]:
    """Shape header plus row-major values"""
    array = tensor.detach().cpu().numpy()
    return {'shape': list(array.shape), 'values': array.reshape(-1).tolist()}


def tensor_from_dict(data: Dict[str, Any]) -> torch.Tensor:
    shape = tuple(data['shape'])
    values = np.asarray(data['values'], dtype=float)
    if values.size != int(np.prod(shape)):
        raise ConfigError(f"serialized tensor has {values.size} values for shape {shape}")
    return torch.from_numpy(values.reshape(shape)).to(DTYPE)


class DvModel(nn.Module):
    """
    Potential g(u) = w2 . tanh(W1 u + b1) + b2.

    With slicing the input row is (theta, phi, theta^T x, phi^T y), so
    input_dim = d_x + d_y + 2; without slicing it is (x, y).
    """

    activation = 'tanh'

    def __init__(self, input_dim: int, hidden: int = 100, rng=None):
        super().__init__()
        if input_dim < 1 or hidden < 1:
            raise ConfigError(f"input_dim and hidden must be positive, got {input_dim}, {hidden}")
        self.input_dim = int(input_dim)
        self.hidden = int(hidden)
        self.layer1 = nn.Linear(self.input_dim, self.hidden, dtype=DTYPE)
        self.layer2 = nn.Linear(self.hidden, 1, dtype=DTYPE)
        if rng is not None:
            self.reset_parameters(rng)

    def reset_parameters(self, rng) -> None:
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization from a seeded stream"""
        with torch.no_grad():
            for layer in (self.layer1, self.layer2):
                bound = 1.0 / math.sqrt(layer.in_features)
                for parameter in (layer.weight, layer.bias):
                    values = rng.uniform(-bound, bound, size=tuple(parameter.shape))
                    parameter.copy_(torch.from_numpy(np.asarray(values, dtype=float)))

    def zero_parameters(self) -> 'DvModel':
        with torch.no_grad():
            for parameter in self.parameters():
                parameter.zero_()
        return self

    def hidden_activations(self, inputs: torch.Tensor) -> torch.Tensor:
        return torch.tanh(self.layer1(inputs))

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        return self.layer2(self.hidden_activations(inputs)).squeeze(-1)

    def parameter_norms(self) -> Dict[str, float]:
        return {name: float(parameter.detach().norm()) for name, parameter in self.named_parameters()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'input_dim': self.input_dim,
            'hidden': self.hidden,
            'activation': self.activation,
            'parameters': {name: tensor_to_dict(p) for name, p in self.named_parameters()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DvModel':
        model = cls(int(data['input_dim']), int(data['hidden']))
        stored = data.get('parameters', {})
        with torch.no_grad():
            for name, parameter in model.named_parameters():
                if name not in stored:
                    raise ConfigError(f"serialized model is missing parameter {name}")
                value = tensor_from_dict(stored[name])
                if tuple(value.shape) != tuple(parameter.shape):
                    raise ConfigError(f"parameter {name} has shape {tuple(value.shape)}, "
                                      f"expected {tuple(parameter.shape)}")
                parameter.copy_(value)
        return model
