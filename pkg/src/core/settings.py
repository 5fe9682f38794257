"""
Runtime settings for the grn-dynamics engine.

Settings are read from environment variables (a ``.env`` file is loaded by the
command-line tool through python-dotenv). Command-line flags override them.
"""

import os
import logging
from dataclasses import dataclass, replace
from typing import Callable, Any

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


def _read(key: str, default: Any, convert: Callable[[str], Any]) -> Any:
    raw = os.getenv(key)
    if raw is None or raw.strip() == '':
        return default
    try:
        return convert(raw.strip())
    except ValueError as e:
        raise ConfigurationError(f"Invalid value for {key}: {raw!r}", key, raw, e)


@dataclass(frozen=True)
class Settings:
    """Engine-wide tunables with their documented defaults."""
    max_in_edges: int = 4
    max_out_edges: int = 4
    lp_margin: float = 1e-6
    sample_count: int = 1_000_000
    sample_seed: int = 0
    epsilon: float = 0.10
    hill_exponent: float = 10.0
    dt: float = 0.01
    t_end: float = 200.0
    transient: float = 0.5
    checkpoint_every: int = 10_000
    workers: int = 1
    linear_extension_cap: int = 10_000

    def __post_init__(self):
        if self.max_in_edges < 0 or self.max_out_edges < 0:
            raise ConfigurationError("Enumeration guards must be non-negative", 'max_in_edges/max_out_edges')
        if self.lp_margin <= 0:
            raise ConfigurationError("LP margin must be positive", 'GRN_LP_MARGIN', str(self.lp_margin))
        if not 0 < self.epsilon < 0.5:
            raise ConfigurationError("Noise level must lie in (0, 0.5)", 'GRN_EPSILON', str(self.epsilon))
        if self.dt <= 0 or self.t_end <= 0:
            raise ConfigurationError("Integration step and horizon must be positive", 'GRN_DT/GRN_T_END')
        if not 0 <= self.transient < 1:
            raise ConfigurationError("Transient fraction must lie in [0, 1)", 'GRN_TRANSIENT', str(self.transient))
        if self.workers < 1:
            raise ConfigurationError("Worker count must be at least 1", 'GRN_WORKERS', str(self.workers))
        if self.checkpoint_every < 1 or self.sample_count < 1 or self.linear_extension_cap < 1:
            raise ConfigurationError("Counts must be positive",
                                     'GRN_CHECKPOINT_EVERY/GRN_SAMPLE_COUNT/GRN_LINEAR_EXTENSION_CAP')

    @classmethod
    def from_env(cls) -> 'Settings':
        """Build settings from GRN_* environment variables."""
        settings = cls(
            max_in_edges=_read('GRN_MAX_IN_EDGES', 4, int),
            max_out_edges=_read('GRN_MAX_OUT_EDGES', 4, int),
            lp_margin=_read('GRN_LP_MARGIN', 1e-6, float),
            sample_count=_read('GRN_SAMPLE_COUNT', 1_000_000, int),
            sample_seed=_read('GRN_SAMPLE_SEED', 0, int),
            epsilon=_read('GRN_EPSILON', 0.10, float),
            hill_exponent=_read('GRN_HILL_N', 10.0, float),
            dt=_read('GRN_DT', 0.01, float),
            t_end=_read('GRN_T_END', 200.0, float),
            transient=_read('GRN_TRANSIENT', 0.5, float),
            checkpoint_every=_read('GRN_CHECKPOINT_EVERY', 10_000, int),
            workers=_read('GRN_WORKERS', 1, int),
            linear_extension_cap=_read('GRN_LINEAR_EXTENSION_CAP', 10_000, int),
        )
        logger.debug(f"Loaded settings: {settings}")
        return settings

    def override(self, **changes) -> 'Settings':
        """Return a copy with the non-None entries of ``changes`` applied."""
        return replace(self, **{key: value for key, value in changes.items() if value is not None})


_settings = None


def get_settings() -> Settings:
    """Get the process-wide settings, loading them from the environment on first use."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def set_settings(settings: Settings):
    """Install explicit settings (used by the CLI after applying flags, and by tests)."""
    global _settings
    _settings = settings
