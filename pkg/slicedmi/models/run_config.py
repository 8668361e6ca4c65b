"""
Run configuration document for the command-line layer.

A RunConfig holds the global keys (seed, unit, threads, output_path) and one
optional section per subcommand. Every section parses through its record's
from_dict, so unknown keys are rejected at any depth.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from slicedmi.exceptions import ConfigError
from slicedmi.models.base import BaseRecord
from slicedmi.models.estimates import UNITS
from slicedmi.models.experiment import ExperimentPlan
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.rate_report import RateGrid
from slicedmi.models.scenario import Scenario
from slicedmi.models.settings import SmiConfig, TrainConfig, check_seed


def _positive(record, *names: str) -> None:
    for name in names:
        value = getattr(record, name)
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")


@dataclass
class OracleSection(BaseRecord):
    """Gaussian oracle report settings"""
    spec: Optional[GaussianSpec] = None
    m: int = 100000
    seed: Optional[int] = None
    bound_slices: int = 10000
    quadrature_grid: Optional[int] = None

    nested = {'spec': GaussianSpec}

    def __post_init__(self):
        if isinstance(self.spec, dict):
            self.spec = GaussianSpec.from_dict(self.spec)
        _positive(self, 'm', 'bound_slices', 'quadrature_grid')
        check_seed(self.seed)


@dataclass
class DataSource(BaseRecord):
    """Synthetic data for training commands: a scenario or n draws of a Gaussian spec"""
    scenario: Optional[Scenario] = None
    gaussian: Optional[GaussianSpec] = None
    n: Optional[int] = None
    seed: Optional[int] = None

    nested = {'scenario': Scenario, 'gaussian': GaussianSpec}

    def __post_init__(self):
        if isinstance(self.scenario, dict):
            self.scenario = Scenario.from_dict(self.scenario)
        if isinstance(self.gaussian, dict):
            self.gaussian = GaussianSpec.from_dict(self.gaussian)
        if self.scenario is not None and self.gaussian is not None:
            raise ConfigError("data takes either a scenario or a gaussian spec, not both")
        if self.gaussian is not None and self.n is None:
            raise ConfigError("gaussian data needs a sample count n")
        _positive(self, 'n')
        check_seed(self.seed)

    @property
    def empty(self) -> bool:
        return self.scenario is None and self.gaussian is None


@dataclass
class SmineSection(BaseRecord):
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataSource = field(default_factory=DataSource)
    slices_per_batch: Optional[int] = None

    nested = {'train': TrainConfig, 'data': DataSource}

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig.from_dict(self.train)
        if isinstance(self.data, dict):
            self.data = DataSource.from_dict(self.data)
        _positive(self, 'slices_per_batch')


@dataclass
class ExtractSection(BaseRecord):
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataSource = field(default_factory=DataSource)
    r_x: Optional[int] = None
    r_y: int = 0

    nested = {'train': TrainConfig, 'data': DataSource}

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig.from_dict(self.train)
        if isinstance(self.data, dict):
            self.data = DataSource.from_dict(self.data)
        _positive(self, 'r_x')
        if isinstance(self.r_y, bool) or not isinstance(self.r_y, int) or self.r_y < 0:
            raise ConfigError(f"r_y must be a non-negative integer, got {self.r_y!r}")


@dataclass
class RunConfig(BaseRecord):
    """Resolved configuration of one command invocation"""
    seed: Optional[int] = None
    unit: str = 'nats'
    threads: int = 1
    output_path: Optional[str] = None
    estimate: Optional[SmiConfig] = None
    oracle: Optional[OracleSection] = None
    indep: Optional[ExperimentPlan] = None
    rates: Optional[RateGrid] = None
    smine: Optional[SmineSection] = None
    extract: Optional[ExtractSection] = None
    gen: Optional[Scenario] = None

    nested = {
        'estimate': SmiConfig,
        'oracle': OracleSection,
        'indep': ExperimentPlan,
        'rates': RateGrid,
        'smine': SmineSection,
        'extract': ExtractSection,
        'gen': Scenario,
    }

    def __post_init__(self):
        check_seed(self.seed)
        if self.unit not in UNITS:
            raise ConfigError(f"unit must be one of {UNITS}, got {self.unit!r}")
        _positive(self, 'threads')

    def to_json(self) -> str:
        """Compact single-line JSON with sorted keys"""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

    @classmethod
    def from_json(cls, text: str, defaults: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        """Parse a run configuration document; values present in the document win over defaults"""
        try:
            data: Dict[str, Any] = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Run configuration is not valid JSON: {e.msg}", line=e.lineno) from e
        if not isinstance(data, dict):
            raise ConfigError("Run configuration must be a JSON object")
        return cls.from_dict(merge_settings(defaults or {}, data))


def merge_settings(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dictionary merge; nested mappings are merged key by key"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_settings(merged[key], value)
        else:
            merged[key] = value
    return merged
