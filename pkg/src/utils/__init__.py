"""Cluster-typing NED toolkit - Utilities Module."""

from .helpers import (
    batch_items,
    harmonic_mean,
    make_rng,
    safe_divide,
    safe_log,
    spawn_seeds,
    tokens_contain,
)
from .logging import setup_file_logging, get_logger

__all__ = [
    "batch_items",
    "harmonic_mean",
    "make_rng",
    "safe_divide",
    "safe_log",
    "spawn_seeds",
    "tokens_contain",
    "setup_file_logging",
    "get_logger",
]
