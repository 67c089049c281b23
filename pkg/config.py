"""
Configuration module for the leaf-growth toolkit
Handles project-wide caps and defaults, config files and per-run settings
"""

import os
import secrets
from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, Any, Optional

from dotenv import dotenv_values

from errors import CapExceededError, UsageError

ENV_PREFIX = "LEAFGROWTH_"


class OutputFormat(Enum):
    """Supported output formats"""
    TEXT = "text"
    CSV = "csv"
    JSON = "json"
    JSONL = "jsonl"
    DOT = "dot"


class VerifySuite(Enum):
    """Invariant suites runnable through `verify`"""
    UNIFORMITY = "uniformity"
    IDENTITIES = "identities"
    SPECTRUM = "spectrum"
    SPINE = "spine"


class TreeStatistic(Enum):
    """Tree statistics usable as the mixing witness"""
    PATH_LENGTH = "path_length"
    HEIGHT = "height"
    LEFT_FRACTION = "left_fraction"


class SpineMeasure(Enum):
    """Leaf selection rule driving the continuum spine"""
    NU = "nu"
    UNIFORM = "uniform"


class Config:
    """Project-wide caps and defaults"""

    # Brute-force and exact-arithmetic caps
    ENUMERATION_CAP = 12
    EXACT_MEASURE_CAP = 30
    PUSHFORWARD_CAP = 7
    MOMENT_CAP = 20_000
    EXACT_MOMENT_CAP = 8

    # Simulation caps
    GROWTH_MAX = 1_000_000
    FULL_MEASURE_CAP = 100_000
    KERNEL_CACHE_CAP = 2_048

    # Numerics
    QUADRATURE_TOLERANCE = 1e-12
    ROOT_TOLERANCE = 1e-12
    EPS_CUT = 1e-4
    EXTINCTION_TAIL = 1e-6
    INVERSE_CDF_KNOTS = 2 ** 14

    @classmethod
    def check_cap(cls, name: str, value: int, cap_name: str) -> None:
        """Raise CapExceededError if value is above the named cap"""
        cap = getattr(cls, cap_name)
        if value > cap:
            raise CapExceededError(name, value, cap)

    @classmethod
    def override(cls, cap_name: str, value: Any) -> None:
        """Change a default for the rest of the process"""
        if not hasattr(cls, cap_name):
            raise ValueError(f"Unknown setting: {cap_name}")
        setattr(cls, cap_name, type(getattr(cls, cap_name))(value))


@dataclass
class RunConfig:
    """Settings of one CLI invocation after merging all sources"""
    command: str
    seed: Optional[int] = None
    output: Optional[str] = None
    output_format: OutputFormat = OutputFormat.TEXT
    threads: int = 0
    params: Dict[str, Any] = field(default_factory=dict)
    seed_generated: bool = False

    def __post_init__(self):
        if self.seed is None:
            self.seed = secrets.randbits(63)
            self.seed_generated = True
        if self.threads <= 0:
            self.threads = os.cpu_count() or 1

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def to_metadata(self) -> Dict[str, Any]:
        """Flat description recorded in every output header"""
        meta = {
            "command": self.command,
            "seed": self.seed,
            "seed_generated": self.seed_generated,
            "format": self.output_format.value,
        }
        for key, value in sorted(self.params.items()):
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, (list, tuple)):
                value = list(value)
            meta[key] = value
        return meta


def settings_key(flag: str) -> str:
    """Map a long flag name to its config-file key: --eps-cut -> EPS_CUT"""
    return flag.lstrip("-").replace("-", "_").upper()


def load_settings(config_path: Optional[str] = None) -> Dict[str, str]:
    """
    Read raw settings from the environment and an optional config file

    Args:
        config_path (str): Flat KEY=value file, or None

    Returns:
        dict: Upper-case keys to raw string values; the file wins over
        LEAFGROWTH_* environment variables
    """
    merged: Dict[str, str] = {}
    for key, value in os.environ.items():
        if key.startswith(ENV_PREFIX):
            merged[key[len(ENV_PREFIX):]] = value
    if config_path:
        if not os.path.exists(config_path):
            raise UsageError(f"Config file not found: {config_path}")
        for key, value in dotenv_values(config_path).items():
            if value is not None:
                merged[key.upper()] = value
    return merged
