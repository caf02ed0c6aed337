"""Cluster-typing NED toolkit - Operations Module."""

from .candidate_generation import run_candgen
from .evaluate import run_evaluate, run_randtest, run_report
from .fixture import run_synth_fixture, run_validate_config
from .ingest import run_ingest, run_mine_coocc
from .mention_typing import run_build_typing_data, run_predict_typing, run_train_typing
from .ranking import run_features, run_rank, run_replicate, run_train_ranker
from .representations import run_build_streams, run_cluster, run_embed
from .selection import run_agccs, run_select_combo

__all__ = [
    "run_candgen",
    "run_evaluate",
    "run_randtest",
    "run_report",
    "run_synth_fixture",
    "run_validate_config",
    "run_ingest",
    "run_mine_coocc",
    "run_build_typing_data",
    "run_predict_typing",
    "run_train_typing",
    "run_features",
    "run_rank",
    "run_replicate",
    "run_train_ranker",
    "run_build_streams",
    "run_cluster",
    "run_embed",
    "run_agccs",
    "run_select_combo",
]
