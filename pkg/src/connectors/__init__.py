"""Cluster-typing NED toolkit - Connectors Module (file formats)."""

from .kb import load_lexicon, parse_kb, parse_type_mapping, read_kb, write_kb
from .surface_forms import (
    SurfaceFormStore,
    parse_surface_forms,
    read_surface_forms,
    write_surface_forms,
)
from .corpus import parse_corpus, read_corpus, write_corpus
from .cooccurrence import CooccurrenceTable, read_cooccurrence, write_cooccurrence
from .artifact_files import (
    read_clustering,
    read_embeddings,
    pairs_source,
    read_pairs,
    read_stream,
    read_typing_dataset,
    write_clustering,
    write_embeddings,
    write_pairs,
    write_stream,
    write_typing_dataset,
)
from .ranking_files import (
    feature_columns,
    read_candidates,
    read_features,
    read_predictions,
    read_rank_scores,
    read_report,
    read_table,
    read_typing_predictions,
    write_candidates,
    write_features,
    write_predictions,
    write_rank_scores,
    write_report,
    write_table,
    write_typing_predictions,
)

__all__ = [
    "load_lexicon",
    "parse_kb",
    "parse_type_mapping",
    "read_kb",
    "write_kb",
    "SurfaceFormStore",
    "parse_surface_forms",
    "read_surface_forms",
    "write_surface_forms",
    "parse_corpus",
    "read_corpus",
    "write_corpus",
    "CooccurrenceTable",
    "read_cooccurrence",
    "write_cooccurrence",
    "read_clustering",
    "read_embeddings",
    "pairs_source",
    "read_pairs",
    "read_stream",
    "read_typing_dataset",
    "write_clustering",
    "write_embeddings",
    "write_pairs",
    "write_stream",
    "write_typing_dataset",
    "feature_columns",
    "read_candidates",
    "read_features",
    "read_predictions",
    "read_rank_scores",
    "read_report",
    "read_table",
    "read_typing_predictions",
    "write_candidates",
    "write_features",
    "write_predictions",
    "write_rank_scores",
    "write_report",
    "write_table",
    "write_typing_predictions",
]
