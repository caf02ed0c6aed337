"""Configuration settings for the cluster-typing NED toolkit.

This module provides centralized configuration management using Pydantic Settings.
Values come from (highest priority first) CLI overrides, an INI file with one
``[section]`` per pipeline stage, ``NED_<SECTION>__<KEY>`` environment variables
and the defaults declared here.
"""

import configparser
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import (
    ABSTAIN_THRESHOLD,
    CONTEXT_MENTIONS,
    MAX_CHANNEL_TOKENS,
    MAX_SENTENCE_WORDS,
    MIN_SENTENCE_WORDS,
    RANKER_DROPOUT,
    RANKER_HIDDEN,
    EncoderKind,
)
from ..core.exceptions import ConfigurationError


class RuntimeSettings(BaseModel):
    """Process-wide behavior shared by every subcommand."""
    seed: int = Field(default=13, description="Seed for every stochastic step")
    deterministic: bool = Field(
        default=True,
        description="Single-threaded training with reproducible outputs",
    )
    jobs: int = Field(default=1, ge=1, le=256, description="Worker cap")
    log_file: str = Field(default="logs/ned.log")
    log_level: str = Field(default="INFO")
    progress: bool = Field(default=False, description="Show tqdm progress bars")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalize and check the log level name."""
        level = v.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR"}:
            raise ValueError(f"unknown log level: {v}")
        return level


class CorpusSettings(BaseModel):
    """Context extraction and typing dataset filters."""
    context_mentions: int = Field(default=CONTEXT_MENTIONS, ge=1)
    min_sentence_words: int = Field(default=MIN_SENTENCE_WORDS, ge=1)
    max_sentence_words: int = Field(default=MAX_SENTENCE_WORDS, ge=1)


class EmbeddingSettings(BaseModel):
    """Skip-gram with negative sampling."""
    dim: int = Field(default=300, ge=2)
    window: int = Field(default=2, ge=1)
    negatives: int = Field(default=5, ge=1)
    epochs: int = Field(default=5, ge=1)
    synset_epochs: int = Field(default=20, ge=1)
    cooccurrence_epochs: int = Field(default=20, ge=1)
    min_count: int = Field(default=1, ge=1)
    learning_rate: float = Field(default=0.025, gt=0)


class ClusteringSettings(BaseModel):
    """K-means and Brown clustering."""
    k: int = Field(default=1000, ge=2)
    max_iterations: int = Field(default=50, ge=1)
    change_tolerance: float = Field(default=0.01, ge=0, le=1)
    top_combinations: int = Field(default=10, ge=1)


class TypingSettings(BaseModel):
    """Mention typing model and its optimizer."""
    encoder: EncoderKind = EncoderKind.RECURRENT
    hidden: int = Field(default=600, ge=1)
    dropout: float = Field(default=0.5, ge=0, lt=1)
    learning_rate: float = Field(default=0.1, ge=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    clip: float = Field(default=2.0, gt=0)
    weight_decay: float = Field(default=1.2e-6, ge=0)
    batch_size: int = Field(default=200, ge=1)
    epochs: int = Field(default=20, ge=1)
    patience: int = Field(default=3, ge=1)
    max_tokens: int = Field(default=MAX_CHANNEL_TOKENS, ge=1)
    dev_fraction: float = Field(default=0.1, ge=0, lt=1)

    @field_validator("encoder", mode="before")
    @classmethod
    def reject_cnn(cls, v: Any) -> Any:
        """The convolutional encoder is not provided."""
        if str(v).lower() == "cnn":
            raise ValueError("encoder kind 'cnn' is not supported; use 'mean' or 'recurrent'")
        return v


class CandgenSettings(BaseModel):
    """Candidate generation thresholds."""
    trigram_threshold: float = Field(default=0.60, ge=0, le=1, alias="T")
    edit_ratio: float = Field(default=0.25, ge=0, alias="E")
    min_words: int = Field(default=2, ge=1, alias="W")
    max_word_diff: int = Field(default=1, ge=0, alias="D")
    top_n: int = Field(default=100, ge=1, alias="N")
    coocc_top_r: int = Field(default=20, ge=0)

    model_config = {"populate_by_name": True}


class FeatureSettings(BaseModel):
    """Ranking features."""
    top_n: int = Field(default=3, ge=1, description="N of the top-N x M context set")
    window_m: int = Field(default=5, ge=1, description="M of the top-N x M context set")
    raw_doc_similarity: bool = False


class RankerSettings(BaseModel):
    """Feedforward ranker and its optimizer."""
    hidden: Tuple[int, int] = RANKER_HIDDEN
    dropout: Tuple[float, float] = RANKER_DROPOUT
    learning_rate: float = Field(default=0.05, ge=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    batch_size: int = Field(default=400, ge=1)
    epochs: int = Field(default=30, ge=1)
    patience: int = Field(default=5, ge=1)
    dev_fraction: float = Field(default=0.1, ge=0, lt=1)
    downsample: bool = False
    threshold: float = Field(default=ABSTAIN_THRESHOLD, ge=0, le=1)

    @field_validator("hidden", "dropout", mode="before")
    @classmethod
    def split_pair(cls, v: Any) -> Any:
        """Accept ``500,300`` style values from INI files."""
        if isinstance(v, str):
            return tuple(part.strip() for part in v.split(","))
        return v


class EvaluationSettings(BaseModel):
    """Significance testing."""
    rounds: int = Field(default=10_000, ge=1)


class Settings(BaseSettings):
    """Application settings.

    Attributes:
        runtime: Seed, determinism, worker cap and logging
        corpus: Context window sizes and WC sentence filters
        embeddings: SGNS hyperparameters
        clustering: K-means/Brown parameters and combination selection
        typing: Mention typing model and optimizer
        candgen: Candidate generation thresholds (T, E, W, D, N, R)
        features: Ranking feature options
        ranker: Ranker architecture, optimizer and abstention threshold
        evaluation: Randomization test rounds
    """

    model_config = SettingsConfigDict(
        env_prefix="NED_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    runtime: RuntimeSettings = RuntimeSettings()
    corpus: CorpusSettings = CorpusSettings()
    embeddings: EmbeddingSettings = EmbeddingSettings()
    clustering: ClusteringSettings = ClusteringSettings()
    typing: TypingSettings = TypingSettings()
    candgen: CandgenSettings = CandgenSettings()
    features: FeatureSettings = FeatureSettings()
    ranker: RankerSettings = RankerSettings()
    evaluation: EvaluationSettings = EvaluationSettings()


def read_ini(path: Path) -> Dict[str, Dict[str, str]]:
    """Read an INI file into ``{section: {key: value}}``.

    Args:
        path: INI file with ``[section]`` headers and ``key = value`` lines

    Returns:
        Nested dictionary of raw string values

    Raises:
        ConfigurationError: If the file is missing or not valid INI
    """
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}", config_key="config")
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep T/E/W/D case
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigurationError(f"Invalid config file {path}: {e}", config_key="config")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def _deep_merge(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = {key: dict(value) if isinstance(value, dict) else value for key, value in base.items()}
    for key, value in overrides.items():
        if isinstance(value, Mapping):
            merged[key] = _deep_merge(merged.get(key, {}), value)
        elif value is not None:
            merged[key] = value
    return merged


def get_settings(
    config_path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Settings:
    """Build validated settings from an optional INI file and CLI overrides.

    Args:
        config_path: INI file; skipped when None
        overrides: ``{section: {key: value}}`` from CLI flags; None values ignored

    Returns:
        Settings instance with validated configuration

    Raises:
        ConfigurationError: If a value fails validation
    """
    data: Dict[str, Any] = read_ini(config_path) if config_path else {}
    data = _deep_merge(data, overrides or {})
    try:
        return Settings(**data)
    except ValueError as e:
        raise ConfigurationError(f"Invalid configuration: {e}", config_key="settings")
