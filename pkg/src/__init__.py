"""Cluster-typing NED toolkit."""

__version__ = "1.0.0"

# Make key modules easily accessible
from .config import Settings
from .core import (
    NedError,
    ValidationError,
    ConfigurationError,
    MissingArtifactError,
    DataProcessingError,
)

__all__ = [
    "__version__",
    "Settings",
    "NedError",
    "ValidationError",
    "ConfigurationError",
    "MissingArtifactError",
    "DataProcessingError",
]
