"""
Configuration settings for different environments
"""
import os


class Config:
    """Base configuration"""

    # Output
    OUTPUT_DIR = os.environ.get('SMI_OUTPUT_DIR', 'results')

    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_FILE = None

    # Estimator defaults
    KNN_K = 3
    DEGENERACY_POLICY = 'jitter'
    JITTER_SCALE = 1e-10
    SLICES = 1000
    ORACLE_SLICES = 100000
    UNIT = 'nats'

    # Parallelism
    THREADS = int(os.environ.get('SMI_THREADS', '1'))
    SHOW_PROGRESS = False

    @classmethod
    def to_dict(cls):
        """Return the upper-case settings as a plain dictionary"""
        return {key: getattr(cls, key) for key in dir(cls) if key.isupper()}

    @classmethod
    def run_defaults(cls):
        """Profile defaults in run-configuration form; the run configuration file is layered on top"""
        return {
            'unit': cls.UNIT,
            'threads': cls.THREADS,
            'estimate': {
                'm': cls.SLICES,
                'knn': {'k': cls.KNN_K, 'degeneracy_policy': cls.DEGENERACY_POLICY,
                        'jitter_scale': cls.JITTER_SCALE},
            },
            'oracle': {'m': cls.ORACLE_SLICES},
        }


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    """Testing configuration"""
    # Keep test output out of the working tree
    OUTPUT_DIR = os.environ.get('SMI_OUTPUT_DIR', '/tmp/slicedmi_test_results')
    SLICES = 200
    ORACLE_SLICES = 20000


class ProductionConfig(Config):
    """Production configuration for long benchmark runs"""
    LOG_FILE = os.environ.get('SMI_LOG_FILE', 'slicedmi.log')
    SHOW_PROGRESS = True


CONFIGS = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
}


def get_config(config_name='default'):
    """Resolve a configuration class by profile name"""
    config_name = os.environ.get('SMI_ENV', config_name)
    # Default to development if not specified
    if not config_name or config_name == 'default':
        config_name = 'development'
    try:
        return CONFIGS[config_name.lower()]
    except KeyError:
        from slicedmi.exceptions import ConfigError
        raise ConfigError(f"Unknown configuration profile: {config_name}", profile=config_name)
