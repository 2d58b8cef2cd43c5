import os


class Config:
    """Base configuration class."""

    # Output locations
    OUTPUT_DIR = os.environ.get('ODRPO_OUTPUT_DIR') or 'Output'
    LOG_FILE = os.environ.get('ODRPO_LOG_FILE', os.path.join(OUTPUT_DIR, 'odrpo_log.txt'))
    LOG_TO_STDOUT = os.environ.get('LOG_TO_STDOUT', 'true').lower() in ['true', 'on', '1']

    # Seeding
    DEFAULT_SEED = int(os.environ.get('ODRPO_SEED') or 0)

    # Numerics
    EPSILON = 1e-8
    CONSISTENCY_THRESHOLD = 0.9

    # Resource guards
    ENUMERATION_LIMIT = 10 ** 6  # |S_{M-1}| for expected fields
    CURL_LIMIT = 10 ** 7  # |S_{M-2}| * K^2 for curl scans

    # Trainer
    EXACT_LEARNING_RATE = 0.5
    SAMPLED_LEARNING_RATE = 1e-2
    GROUP_SIZE = 8
    TRAIN_STEPS = 200

    # Scale used when no --scale-k or --scale-levels is given
    DEFAULT_SCALE_K = 10

    # Synthetic judge
    JUDGE_NOISE_WIDTH = 0.75
    JUDGE_OUTLIER_RATE = 0.1
    JUDGE_QUALITY_SPREAD = 2.0


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    LOG_FILE = ''
    LOG_TO_STDOUT = False


config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    """Resolve a configuration class from its name or ODRPO_CONFIG."""
    return config.get(name or os.environ.get('ODRPO_CONFIG') or 'default', DevelopmentConfig)
