"""Flight envelope protection workbench.

Thin Python layer over the compiled core: configs travel as JSON text, episode
logs come back as plain dicts of lists.
"""

import json

from ._rlfep import (
    CHECKPOINT_VERSION,
    OBS_DIM,
    CheckpointError,
    ConfigError,
    Env,
    Error,
    Policy,
    default_config_json,
    file_hash,
    normalize_config_json,
    r_alpha,
    r_nz,
    r_q,
    r_tracking,
    run_scenario,
    sweep,
    train,
    trim,
)

__version__ = "0.1.0"


def default_config():
    """The built-in configuration as a dict."""
    return json.loads(default_config_json())


def config_json(overrides=None):
    """JSON text for the defaults with `overrides` merged in section by section."""
    cfg = default_config()
    for section, values in (overrides or {}).items():
        if isinstance(values, dict) and isinstance(cfg.get(section), dict):
            cfg[section].update(values)
        else:
            cfg[section] = values
    return normalize_config_json(json.dumps(cfg))


def pass_rate(rows):
    """Fraction of sweep rows that did not fail."""
    return sum(not r["failed"] for r in rows) / len(rows) if rows else 0.0


__all__ = [
    "CHECKPOINT_VERSION", "OBS_DIM", "CheckpointError", "ConfigError", "Env", "Error", "Policy",
    "config_json", "default_config", "default_config_json", "file_hash", "normalize_config_json",
    "pass_rate", "r_alpha", "r_nz", "r_q", "r_tracking", "run_scenario", "sweep", "train", "trim",
]
