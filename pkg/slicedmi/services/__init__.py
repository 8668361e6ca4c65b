"""
Services package initialization
"""
from slicedmi.services.sampling_service import SeededRng
from slicedmi.services.smi_service import SmiService
from slicedmi.services.oracle_service import GaussianOracleService
from slicedmi.services.synthetic_service import SyntheticDataService
from slicedmi.services.independence_service import IndependenceService
from slicedmi.services.smine_service import SmineService
from slicedmi.services.convergence_service import ConvergenceService

__all__ = ['SeededRng', 'SmiService', 'GaussianOracleService', 'SyntheticDataService',
           'IndependenceService', 'SmineService', 'ConvergenceService']
