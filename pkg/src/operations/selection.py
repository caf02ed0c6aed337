"""Clustering Selection Operations - AGCCS and combination ranking."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd
import structlog

from ..config.constants import ClusterFlavor
from ..config.settings import Settings
from ..connectors.artifact_files import read_clustering
from ..connectors.corpus import read_corpus
from ..connectors.ranking_files import read_candidates, read_typing_predictions, write_table
from ..core.exceptions import ContractError, ValidationError
from ..processors.cluster_selection import agccs, mention_sets, select_combinations
from ..processors.mention_typing import candidate_type_probabilities
from ..processors.two_stage import candidate_id_lists

logger = structlog.get_logger(__name__)


def run_agccs(
    settings: Settings,
    corpus_path: str,
    candidates_path: str,
    clustering_paths: Sequence[str],
    output_path: Optional[str] = None,
) -> Dict:
    """Execute agccs operation: one AGCCS value per clustering file."""
    logger.info("agccs_started", clusterings=list(clustering_paths))
    mentions = mention_sets(read_corpus(corpus_path), read_candidates(candidates_path))

    rows: List[Dict] = []
    for path in clustering_paths:
        clustering = read_clustering(path)
        rows.append({
            "clustering": Path(path).stem,
            "flavor": clustering.flavor.value,
            "k": clustering.k,
            "agccs": agccs(clustering, mentions),
        })
    if output_path:
        write_table(pd.DataFrame(rows), output_path, "agccs")

    result = {"success": True, "rows": rows, "output_path": output_path}
    logger.info("agccs_completed", clusterings=len(rows))
    return result


def run_select_combo(
    settings: Settings,
    corpus_path: str,
    candidates_path: str,
    typing_paths: Sequence[str],
    clustering_paths: Sequence[str],
    output_path: Optional[str] = None,
    top: Optional[int] = None,
) -> Dict:
    """Execute select-combo operation.

    ``typing_paths[i]`` holds the predictions of the model trained on
    ``clustering_paths[i]``; both must name the same flavor. Each pair is one
    option of its flavor, named after the predictions file.

    Raises:
        ValidationError: If the two lists differ in length
        ContractError: If a predictions file and its clustering disagree on flavor
    """
    if len(typing_paths) != len(clustering_paths):
        raise ValidationError(
            f"{len(typing_paths)} typing prediction files for {len(clustering_paths)} clusterings",
            field="typing",
        )
    top = top or settings.clustering.top_combinations
    logger.info("select_combo_started", options=len(typing_paths), top=top)

    candidate_sets = read_candidates(candidates_path)
    mentions = mention_sets(read_corpus(corpus_path), candidate_sets)
    candidates = candidate_id_lists(candidate_sets)

    options: Dict[ClusterFlavor, Dict[str, Dict]] = {}
    for typing_path, clustering_path in zip(typing_paths, clustering_paths):
        probabilities, flavor_name = read_typing_predictions(typing_path)
        clustering = read_clustering(clustering_path)
        if flavor_name != clustering.flavor.value:
            raise ContractError(
                f"{typing_path} holds {flavor_name or 'unknown'} predictions but "
                f"{clustering_path} is a {clustering.flavor.value} clustering",
                operation="select_combo",
            )
        options.setdefault(clustering.flavor, {})[Path(typing_path).stem] = candidate_type_probabilities(
            probabilities, clustering, candidates
        )

    scores = select_combinations(options, mentions, top)
    flavors = [flavor for flavor, _ in scores[0].combo] if scores else []
    rows = [
        {"rank": rank, "penalty": score.penalty, **{f.value: score.option(f) for f in flavors}}
        for rank, score in enumerate(scores, start=1)
    ]
    if output_path:
        write_table(pd.DataFrame(rows), output_path, "combinations")

    result = {"success": True, "combinations": rows, "output_path": output_path}
    logger.info("select_combo_completed", combinations=len(rows))
    return result
