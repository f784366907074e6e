"""
Configuration settings for the interference-regime toolkit.
"""
import os
from typing import Dict, Optional

from .errors import ArgumentError

# Numeric tolerances
TOLERANCES = {
    "pmf_internal": 1e-12,
    "pmf_file": 1e-9,
    "ratio_relative": 1e-9,
    "alpha_slack": 1e-12,
    "membership": 1e-12,
    "vertex_dedup": 1e-9,
    "gap": 1e-10,
    "gap_dump": 1e-6,
    "mi_clamp": 1e-12,
    "bound_equality": 1e-9,
    "lp_feasibility": 1e-9,
}

# Size caps the brute-force modules depend on
SIZE_CAPS = {
    "max_alphabet": 8,
    "max_input_tuples": 4096,
    "max_users": 10,
    "max_vertex_users": 3,
    "max_grid_points": 10_000_000,
}

# Capacity iteration
ITERATION = {
    "tolerance": 1e-10,
    "max_iter": 10_000,
}

# Sampling and batching
SAMPLING = {
    "seed": 0,
    "dirichlet_concentration": 1.0,
    "chunk_size": 2048,
    "workers": 1,
    "fallback_samples": 10_000,
    "max_chunk_elements": 1 << 22,
}

# Report output
OUTPUT = {
    "precision": 6,
    "max_precision": 15,
    "log_dir": None,
}

# Environment variables that override the settings above
ENV_SETTINGS = {
    "max_grid_env_var": "ICREGIME_MAX_GRID",
    "log_level_env_var": "ICREGIME_LOG_LEVEL",
    "workers_env_var": "ICREGIME_WORKERS",
    "progress_env_var": "ICREGIME_PROGRESS",
    "log_dir_env_var": "ICREGIME_LOG_DIR",
}


def max_grid_points() -> int:
    """Grid cap, honouring ICREGIME_MAX_GRID."""
    raw = os.getenv(ENV_SETTINGS["max_grid_env_var"])
    if raw:
        try:
            return int(float(raw))
        except ValueError:
            raise ArgumentError(f"{ENV_SETTINGS['max_grid_env_var']} must be a number, got {raw!r}")
    return SIZE_CAPS["max_grid_points"]


def default_workers() -> int:
    raw = os.getenv(ENV_SETTINGS["workers_env_var"])
    if raw:
        return max(1, int(raw))
    return SAMPLING["workers"]


def progress_enabled() -> bool:
    return os.getenv(ENV_SETTINGS["progress_env_var"], "0") not in ("", "0", "false", "False")


def log_level() -> str:
    return os.getenv(ENV_SETTINGS["log_level_env_var"], "WARNING").upper()


def log_dir() -> Optional[str]:
    return os.getenv(ENV_SETTINGS["log_dir_env_var"]) or OUTPUT["log_dir"]


def resolve_tolerances(overrides: Optional[Dict[str, float]] = None) -> Dict[str, float]:
    """Copy of TOLERANCES with per-run overrides applied; unknown names are rejected."""
    resolved = dict(TOLERANCES)
    for name, value in (overrides or {}).items():
        if name not in resolved:
            raise KeyError(f"unknown tolerance '{name}'")
        resolved[name] = float(value)
    return resolved
