"""
Sliced mutual information toolkit.

Estimation of sliced mutual information from samples, Gaussian closed-form
oracles, independence testing, convergence benchmarks and variational
(Donsker-Varadhan) feature extraction.
"""
import logging
from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s'

logger = logging.getLogger(__name__)


def create_app(config_name='default', log_level=None):
    """
    Resolve the configuration profile and configure logging

    Args:
        config_name (str): Profile name ('development', 'testing', 'production')
        log_level (str, optional): Overrides the profile's LOG_LEVEL

    Returns:
        type: The active configuration class
    """
    from slicedmi.config import get_config

    config = get_config(config_name)
    configure_logging(log_level or config.LOG_LEVEL, config.LOG_FILE)
    logger.debug(f"Configuration profile loaded: {config.__name__}")
    return config


def configure_logging(level='INFO', log_file=None):
    """Configure the root logger once per process"""
    kwargs = {'level': getattr(logging, str(level).upper(), logging.INFO), 'format': LOG_FORMAT}
    if log_file:
        kwargs['filename'] = log_file
    logging.basicConfig(**kwargs)
    logging.getLogger().setLevel(kwargs['level'])
