"""
Models package initialization
"""
from slicedmi.models.estimates import EntropyEstimate, SmiEstimate
from slicedmi.models.settings import KnnConfig, SmiConfig, TrainConfig
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.scenario import Scenario
from slicedmi.models.experiment import ExperimentPlan, RocInput
from slicedmi.models.rate_report import LogConcaveCheck, RateGrid, RateReport, SlopeFit
from slicedmi.models.feature_maps import FeatureMaps
from slicedmi.models.dv_model import DvModel
from slicedmi.models.run_config import RunConfig

__all__ = ['EntropyEstimate', 'SmiEstimate', 'KnnConfig', 'SmiConfig', 'TrainConfig', 'GaussianSpec',
           'Scenario', 'ExperimentPlan', 'RocInput', 'LogConcaveCheck', 'RateGrid', 'RateReport',
           'SlopeFit', 'FeatureMaps', 'DvModel', 'RunConfig']
