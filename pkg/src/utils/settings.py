"""
Environment-driven settings
"""

import os
import logging
from pathlib import Path

from dotenv import load_dotenv

try:
    from .constants import (
        ENV_OUTPUT_DIR, ENV_CACHE_DIR, ENV_CAIDA_PATH, ENV_LOG_LEVEL, ENV_WORKERS,
        DEFAULT_OUTPUT_DIR, DEFAULT_CACHE_DIR, DEFAULT_LOG_LEVEL, DEFAULT_WORKERS,
    )
except ImportError:
    from utils.constants import (
        ENV_OUTPUT_DIR, ENV_CACHE_DIR, ENV_CAIDA_PATH, ENV_LOG_LEVEL, ENV_WORKERS,
        DEFAULT_OUTPUT_DIR, DEFAULT_CACHE_DIR, DEFAULT_LOG_LEVEL, DEFAULT_WORKERS,
    )

logger = logging.getLogger(__name__)


class Settings:
    """Process-wide settings read from the environment and an optional .env file"""

    def __init__(self, env_file: str = None):
        load_dotenv(env_file)
        self.reload()

    def reload(self):
        """Re-read every setting from the environment"""
        self.output_dir = Path(os.getenv(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR))
        self.cache_dir = Path(os.getenv(ENV_CACHE_DIR, DEFAULT_CACHE_DIR))
        caida = os.getenv(ENV_CAIDA_PATH)
        self.caida_path = Path(caida) if caida else None
        self.log_level = os.getenv(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).upper()
        try:
            self.workers = max(1, int(os.getenv(ENV_WORKERS, DEFAULT_WORKERS)))
        except ValueError:
            logger.warning(f"Ignoring non-integer {ENV_WORKERS}; using {DEFAULT_WORKERS}")
            self.workers = DEFAULT_WORKERS


# Global settings instance
settings = Settings()
