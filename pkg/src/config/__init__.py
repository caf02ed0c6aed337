"""Cluster-typing NED toolkit - Configuration Module."""

from .settings import Settings, get_settings, read_ini
from .constants import (
    ALL_FLAVORS,
    FLAVOR_FORMATS,
    STAGE_ONE_FLAVORS,
    ClusterFlavor,
    CoarseType,
    ContextFormat,
    EncoderKind,
    MentionSource,
    Provenance,
    SurfaceFlag,
    SurfaceFormType,
    TrainingMode,
)

__all__ = [
    "Settings",
    "get_settings",
    "read_ini",
    "ALL_FLAVORS",
    "FLAVOR_FORMATS",
    "STAGE_ONE_FLAVORS",
    "ClusterFlavor",
    "CoarseType",
    "ContextFormat",
    "EncoderKind",
    "MentionSource",
    "Provenance",
    "SurfaceFlag",
    "SurfaceFormType",
    "TrainingMode",
]
