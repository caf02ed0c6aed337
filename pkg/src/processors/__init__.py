"""Cluster-typing NED toolkit - Processors Module."""

from .annotation import auto_annotate, derive_main_title
from .candidates import CandidateGenerator, get_candidates_for_mention, mine_cooccurrence
from .cluster_selection import agccs, eq1_penalty, select_combinations
from .clustering import brown_cluster, kmeans
from .contexts import build_typing_dataset, extract_context
from .evaluation import bot_f1, inkb_accuracy, micro_prf, randomization_test
from .features import FeatureExtractor, feature_layout, max_diff
from .mention_typing import TypingModelConfig, build_typing_model, predict_types, train_typing
from .ranker import apply_threshold, rank_candidates, train_ranker
from .two_stage import two_stage_rank

__all__ = [
    "auto_annotate",
    "derive_main_title",
    "CandidateGenerator",
    "get_candidates_for_mention",
    "mine_cooccurrence",
    "agccs",
    "eq1_penalty",
    "select_combinations",
    "brown_cluster",
    "kmeans",
    "build_typing_dataset",
    "extract_context",
    "bot_f1",
    "inkb_accuracy",
    "micro_prf",
    "randomization_test",
    "FeatureExtractor",
    "feature_layout",
    "max_diff",
    "TypingModelConfig",
    "build_typing_model",
    "predict_types",
    "train_typing",
    "apply_threshold",
    "rank_candidates",
    "train_ranker",
    "two_stage_rank",
]
