"""Candidate Generation Operation - Fuzzy retrieval, expansion and top-N cut."""

from pathlib import Path
from typing import Dict, Optional

import pandas as pd
import structlog

from ..config.settings import Settings
from ..connectors.cooccurrence import read_cooccurrence
from ..connectors.corpus import read_corpus
from ..connectors.kb import load_lexicon, read_kb
from ..connectors.ranking_files import write_candidates, write_table
from ..connectors.surface_forms import read_surface_forms
from ..processors.candidates import CandidateGenerator, recall_table
from ..processors.evaluation import gold_map

logger = structlog.get_logger(__name__)


def recall_path_for(candidates_path: str) -> Path:
    """Where candgen puts the gold-recall table next to the candidate dump."""
    path = Path(candidates_path)
    return path.with_name(path.stem + ".recall.tsv")


def run_candgen(
    settings: Settings,
    corpus_path: str,
    kb_path: str,
    surface_forms_path: str,
    output_path: str,
    cooccurrence_path: Optional[str] = None,
    first_names_path: Optional[str] = None,
    surnames_path: Optional[str] = None,
) -> Dict:
    """Execute candgen operation.

    Writes the candidate dump and, next to it, the gold recall before
    expansion and at every final cut.

    Returns:
        Dictionary with candidate counts and the gold-recall table
    """
    cfg = settings.candgen
    logger.info("candgen_started", corpus=corpus_path, T=cfg.trigram_threshold, E=cfg.edit_ratio,
                W=cfg.min_words, D=cfg.max_word_diff, N=cfg.top_n, R=cfg.coocc_top_r)

    corpus = read_corpus(corpus_path)
    generator = CandidateGenerator(
        read_surface_forms(surface_forms_path),
        kb=read_kb(kb_path),
        cooccurrence=read_cooccurrence(cooccurrence_path) if cooccurrence_path else None,
        settings=cfg,
        first_names=load_lexicon(first_names_path),
        surnames=load_lexicon(surnames_path),
    )
    final_sets, stage1_sets = generator.generate(corpus)
    rows = write_candidates(final_sets, output_path, N=cfg.top_n, R=cfg.coocc_top_r)

    recall = recall_table(final_sets, stage1_sets, gold_map(corpus))
    recall_path = recall_path_for(output_path)
    write_table(pd.DataFrame([{"cut": cut, "gold_recall": value} for cut, value in recall.items()]),
                recall_path, "recall")

    mentions = len(final_sets)
    result = {
        "success": True,
        "mentions": mentions,
        "candidates": rows,
        "empty_mentions": sum(1 for c in final_sets.values() if not c),
        "gold_recall": recall,
        "output_path": str(output_path),
        "recall_path": str(recall_path),
    }
    logger.info("candgen_completed", mentions=mentions, candidates=rows,
                **{f"gold_recall_{k}": round(v, 4) for k, v in recall.items()})
    return result
