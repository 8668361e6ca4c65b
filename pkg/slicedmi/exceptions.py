"""
Error hierarchy for the sliced mutual information toolkit.

Every error carries free-form keyword context (slice index, failing term,
epoch, line number...) that is rendered into the message, and an exit code
used by the command-line layer.
"""
from typing import Any, Dict


class SmiError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 3

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)

    def with_context(self, **context: Any) -> 'SmiError':
        """Attach additional context and return the same error"""
        self.context.update(context)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ', '.join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


# Input errors

class InputError(SmiError, ValueError):
    """Invalid user-supplied data"""
    exit_code = 2


class DatasetParseError(InputError):
    """Malformed numeric table"""


class DimensionMismatchError(InputError):
    """Shapes of samples, directions or specs do not agree"""


class InvalidDimensionError(InputError):
    """A dimension is zero, negative or unsupported by the operation"""


class InsufficientSamplesError(InputError):
    """Fewer samples than the neighbor order requires"""


class ScenarioError(InputError):
    """Invalid synthetic scenario definition"""


# Numerical errors

class DegenerateDistanceError(SmiError):
    """A k-th nearest neighbor distance is zero (duplicate points)"""


class InvalidSpecError(SmiError, ValueError):
    """Gaussian specification is not a valid covariance"""


class NearSingularError(SmiError):
    """Correlation too close to +-1 for the Gaussian log formula"""


class NumericalError(SmiError):
    """Non-finite values produced by a numerical routine"""


class TrainingDivergedError(NumericalError):
    """Variational training produced a non-finite objective"""


# Configuration errors

class ConfigError(SmiError, ValueError):
    """Run configuration failed validation"""
    exit_code = 4
