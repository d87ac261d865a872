#!/usr/bin/env python3

import os
import sys
import yaml
from typing import Any, Dict, Optional

from ..errors import InvalidConfigError

# Type definitions
ConfigDict = Dict[str, Dict[str, Any]]

# Default paths
DEFAULT_CONFIG_PATH = "spanemu.yaml"
SYSTEM_CONFIG_PATH = "/etc/spanemu/spanemu.yaml"

# Build defaults
DEFAULT_ALGO = "centralized"
DEFAULT_MODE = "sim"
DEFAULT_EPS = 0.5
DEFAULT_KAPPA = 2
DEFAULT_SEED = 0
DEFAULT_OUT_DIR = "spanemu-out"
DEFAULT_GRAPH_FORMAT = "edge-list"

# Verify defaults
# None picks exhaustive up to exhaustive_limit vertices and sampled above
DEFAULT_STRETCH_MODE = None
DEFAULT_SIZE_FORM = "exact"

# Options
DEFAULT_WORD_LIMIT = 4
DEFAULT_ROUND_CAP = 10 ** 18
DEFAULT_DELTA_CAP = None
DEFAULT_EXHAUSTIVE_LIMIT = 1024
DEFAULT_SAMPLE_SOURCES = 64
DEFAULT_WORKERS = 4
DEFAULT_ALLOW_INFEASIBLE = False

SECTIONS = ("build", "verify", "bench", "options")
ALGORITHMS = ("centralized", "distributed", "spanner")

DEFAULTS: ConfigDict = {
    "build": {
        "algo": DEFAULT_ALGO,
        "mode": DEFAULT_MODE,
        "eps": DEFAULT_EPS,
        "kappa": DEFAULT_KAPPA,
        "rho": None,
        "seed": DEFAULT_SEED,
        "out": DEFAULT_OUT_DIR,
        "format": DEFAULT_GRAPH_FORMAT,
    },
    "verify": {
        "mode": DEFAULT_STRETCH_MODE,
        "size_form": DEFAULT_SIZE_FORM,
        "seed": DEFAULT_SEED,
        "format": DEFAULT_GRAPH_FORMAT,
    },
    "bench": {
        "suite": None,
        "out": DEFAULT_OUT_DIR,
    },
    "options": {
        "word_limit": DEFAULT_WORD_LIMIT,
        "round_cap": DEFAULT_ROUND_CAP,
        "delta_cap": DEFAULT_DELTA_CAP,
        "exhaustive_limit": DEFAULT_EXHAUSTIVE_LIMIT,
        "sample_sources": DEFAULT_SAMPLE_SOURCES,
        "workers": DEFAULT_WORKERS,
        "allow_infeasible": DEFAULT_ALLOW_INFEASIBLE,
    },
}


def get_real_home() -> str:
    """Get the real user's home directory even when running with sudo"""
    if "SUDO_USER" in os.environ and os.environ.get("HOME") == "/root":
        real_user = os.environ["SUDO_USER"]
        return os.path.expanduser(f"~{real_user}")
    return os.path.expanduser("~")


def user_config_dir() -> str:
    return os.path.join(get_real_home(), ".config/spanemu")


def ensure_user_config_dir() -> str:
    """Ensure the user's config directory exists"""
    path = user_config_dir()
    os.makedirs(path, exist_ok=True)
    return path


def find_config_file(config_path: Optional[str] = None) -> Optional[str]:
    """
    Find the configuration file by checking multiple locations:
    1. Specified path from command line
    2. Current directory
    3. Same directory as the executable
    4. User config directory (~/.config/spanemu/)
    5. System-wide location (/etc/spanemu)

    Returns None when nothing is found; an explicit path is returned as is
    so that loading it reports the missing file.
    """
    if config_path:
        return config_path

    candidates = [
        os.path.join(os.getcwd(), DEFAULT_CONFIG_PATH),
        os.path.join(os.path.dirname(os.path.abspath(sys.argv[0])), DEFAULT_CONFIG_PATH),
        os.path.join(user_config_dir(), DEFAULT_CONFIG_PATH),
        SYSTEM_CONFIG_PATH,
    ]
    for candidate in candidates:
        if os.path.isfile(candidate):
            return candidate
    return None


def default_config() -> ConfigDict:
    return {section: dict(values) for section, values in DEFAULTS.items()}


def create_default_config(config_path: str) -> ConfigDict:
    """Create a default configuration file"""
    config = default_config()

    # Ensure the directory exists
    os.makedirs(os.path.dirname(os.path.abspath(config_path)), exist_ok=True)

    try:
        with open(config_path, "w") as f:
            yaml.dump(config, f, default_flow_style=False)
        return config
    except OSError as e:
        raise IOError(f"Failed to create config file: {e}")


def _fill_defaults(config: ConfigDict) -> ConfigDict:
    for section, values in DEFAULTS.items():
        current = config.get(section)
        if current is None:
            current = config[section] = {}
        if not isinstance(current, dict):
            raise InvalidConfigError(f"section '{section}' must be a mapping")
        for key, value in values.items():
            current.setdefault(key, value)
    return config


def check_config(config: ConfigDict) -> ConfigDict:
    """Reject unknown sections and algorithm names"""
    unknown = sorted(set(config) - set(SECTIONS))
    if unknown:
        raise InvalidConfigError(f"unknown config section(s): {', '.join(unknown)}")
    algo = config["build"]["algo"]
    if algo not in ALGORITHMS:
        raise InvalidConfigError(f"unknown algorithm '{algo}' (expected one of {', '.join(ALGORITHMS)})")
    return config


def load_config(config_path: Optional[str]) -> ConfigDict:
    """Load the configuration from the specified path; None gives the defaults"""
    if config_path is None:
        return default_config()
    try:
        with open(config_path, "r") as file:
            config = yaml.safe_load(file) or {}
    except FileNotFoundError:
        raise FileNotFoundError(f"Config file not found at: {config_path}")
    except yaml.YAMLError as e:
        raise InvalidConfigError(f"Error parsing YAML: {e}")
    if not isinstance(config, dict):
        raise InvalidConfigError(f"{config_path}: top level must be a mapping")
    return check_config(_fill_defaults(config))


def merge_flags(section: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """Overlay command-line flags on a config section; flags left as None do not count"""
    merged = dict(section)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    return merged
