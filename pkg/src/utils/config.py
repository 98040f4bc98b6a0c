"""
Configuration management for pppkit.

Loads and validates environment variables from .env file.
Loads named run presets from config/presets.yaml.
"""

import copy
import os
from pathlib import Path
from typing import List, Dict, Any
from dotenv import load_dotenv
import yaml

# Load environment variables
load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, '')
    return int(raw) if raw.strip() else default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, '')
    return float(raw) if raw.strip() else default


class Config:
    """Application configuration loaded from environment variables"""

    # Parallelism
    THREADS = max(1, _env_int('PPPKIT_THREADS', os.cpu_count() or 1))

    # Logging
    LOG_LEVEL = os.getenv('PPPKIT_LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.getenv('PPPKIT_LOG_FILE', '')

    # Simulation defaults
    DEFAULT_SEED = _env_int('PPPKIT_SEED', 20240601)
    DEFAULT_NUM_SAMPLES = 10_000
    DEFAULT_TAIL_TOLERANCE = _env_float('PPPKIT_TAIL_TOLERANCE', 1e-4)
    DEFAULT_CONTAINMENT_DELTA = 0.01

    # Model validation
    GROWTH_EPSILON = _env_float('PPPKIT_GROWTH_EPSILON', 0.1)

    # Numerics
    MOMENT_REL_TOL = 1e-9
    FADING_TAIL_MASS = 1e-8
    TABLE1_TOLERANCE = 1e-3

    # Project paths
    PROJECT_ROOT = Path(__file__).parent.parent.parent
    CONFIG_DIR = PROJECT_ROOT / 'config'
    PRESETS_FILE = CONFIG_DIR / 'presets.yaml'

    @classmethod
    def validate(cls) -> List[str]:
        """
        Validate configuration values.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        if not 0.0 < cls.DEFAULT_TAIL_TOLERANCE < 1.0:
            errors.append(f"PPPKIT_TAIL_TOLERANCE must lie in (0, 1), got {cls.DEFAULT_TAIL_TOLERANCE}")

        if cls.GROWTH_EPSILON <= 0.0:
            errors.append(f"PPPKIT_GROWTH_EPSILON must be positive, got {cls.GROWTH_EPSILON}")

        if cls.LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"Unknown PPPKIT_LOG_LEVEL: {cls.LOG_LEVEL}")

        if not cls.PRESETS_FILE.exists():
            errors.append(f"Presets file not found: {cls.PRESETS_FILE}")

        return errors


# Cache for presets to avoid repeated file reads
_presets_cache: Dict[str, Any] = {}


def load_presets() -> Dict[str, Any]:
    """
    Load run presets from config/presets.yaml.

    Returns:
        Dict mapping preset name (e.g. 'fig3-g2') to its RunConfig-shaped mapping

    Raises:
        FileNotFoundError: If config/presets.yaml doesn't exist
        yaml.YAMLError: If YAML is invalid
    """
    global _presets_cache

    if _presets_cache:
        return _presets_cache

    if not Config.PRESETS_FILE.exists():
        raise FileNotFoundError(
            f"Presets not found: {Config.PRESETS_FILE}\n"
            "Please restore config/presets.yaml from the repository."
        )

    with open(Config.PRESETS_FILE, 'r') as f:
        presets = yaml.safe_load(f) or {}

    _presets_cache = presets.get('presets', {})
    return _presets_cache


def get_preset(name: str) -> Dict[str, Any]:
    """Get a copy of one preset by name."""
    presets = load_presets()
    if name not in presets:
        raise KeyError(f"Unknown preset '{name}'. Known presets: {sorted(presets)}")
    return copy.deepcopy(presets[name])


def preset_names() -> List[str]:
    """Names of all shipped presets."""
    return sorted(load_presets())


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a YAML or JSON run configuration file.

    Args:
        path: Path to a .yaml/.yml/.json file

    Returns:
        Parsed mapping (empty dict for an empty file)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    with open(path, 'r') as f:
        data = yaml.safe_load(f)

    return data or {}
