"""Cluster-typing NED toolkit - Core Module."""

from .exceptions import (
    NedError,
    ValidationError,
    ParseError,
    ConfigurationError,
    ArtifactError,
    MissingArtifactError,
    ArtifactVersionError,
    DataProcessingError,
    ContractError,
)
from .models import (
    CandidateMatch,
    CandidateScores,
    Clustering,
    ContextWindow,
    Document,
    Entity,
    KnowledgeBase,
    Mention,
    MentionCandidates,
    Prediction,
    SurfaceFormRecord,
    EmbeddingTable,
    TypingInstance,
    mention_key,
    split_mention_key,
)

__all__ = [
    "NedError",
    "ValidationError",
    "ParseError",
    "ConfigurationError",
    "ArtifactError",
    "MissingArtifactError",
    "ArtifactVersionError",
    "DataProcessingError",
    "ContractError",
    "CandidateMatch",
    "CandidateScores",
    "Clustering",
    "ContextWindow",
    "Document",
    "Entity",
    "KnowledgeBase",
    "Mention",
    "MentionCandidates",
    "Prediction",
    "SurfaceFormRecord",
    "EmbeddingTable",
    "TypingInstance",
    "mention_key",
    "split_mention_key",
]
