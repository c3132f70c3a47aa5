"""Configuration settings for the tvcut segmentation toolkit"""
import os
from typing import Any, Dict, Optional

from dotenv import dotenv_values, load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == 'true'


class Config:
    """Main configuration class"""

    # Projection algorithm defaults
    TAU = float(os.getenv('TVCUT_TAU', '0.1'))
    TOL = float(os.getenv('TVCUT_TOL', '0.002'))
    MAX_ITER = int(os.getenv('TVCUT_MAX_ITER', '2000'))
    DEBUG_CHECKS = _env_bool('TVCUT_DEBUG_CHECKS', 'False')

    # A contrario detection defaults
    DETECTION_RADIUS = int(os.getenv('TVCUT_DETECTION_RADIUS', '3'))
    DETECTION_EPSILON = float(os.getenv('TVCUT_DETECTION_EPSILON', '1.0'))

    # 'raw' feeds the edge function with the file's own intensity scale (0-255
    # for 8-bit PGM), 'normalized' with intensities in [0, 1]
    INTENSITY_SCALE = os.getenv('TVCUT_INTENSITY_SCALE', 'raw')

    # Graph cut integer mode
    CUT_SCALE = float(os.getenv('TVCUT_CUT_SCALE', str(2 ** 20)))

    # Oracle size caps
    BRUTE_FORCE_MAX_PIXELS = int(os.getenv('TVCUT_BRUTE_FORCE_MAX_PIXELS', '20'))
    REFERENCE_FLOW_MAX_NODES = int(os.getenv('TVCUT_REFERENCE_FLOW_MAX_NODES', '200'))

    # Logging
    LOG_LEVEL = os.getenv('TVCUT_LOG_LEVEL', 'INFO')
    LOG_TO_FILE = _env_bool('TVCUT_LOG_TO_FILE', 'True')

    # Log file location
    LOGS_DIR = os.getenv('TVCUT_LOGS_DIR', os.path.join(os.path.dirname(os.path.dirname(__file__)), 'logs'))

    @classmethod
    def ensure_directories(cls):
        """Create the log directory when logging to a file"""
        if cls.LOG_TO_FILE:
            os.makedirs(cls.LOGS_DIR, exist_ok=True)

    @classmethod
    def load_config_file(cls, path: Optional[str]) -> Dict[str, Any]:
        """Load a plain-text key=value file; keys are normalised to flag names"""
        if not path:
            return {}
        if not os.path.exists(path):
            raise FileNotFoundError(f"Config file not found: {path}")
        values = dotenv_values(path)
        return {key.strip().lower().replace('-', '_'): value
                for key, value in values.items() if value is not None}
