"""Two-stage ranking.

Stage one ranks candidates without Entity typing or ranking-derived
features. Its top-1 entities define every mention's entity context, the
Entity typing model predicts on those windows, and stage two re-ranks with
the full feature layout.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import structlog

from ..config.constants import ClusterFlavor, ContextFormat
from ..config.settings import Settings
from ..connectors.ranking_files import CandidateSets
from ..connectors.surface_forms import SurfaceFormStore
from ..core.exceptions import ContractError
from ..core.models import (
    CandidateScores,
    Clustering,
    Document,
    EmbeddingTable,
    KnowledgeBase,
    MentionCandidates,
    Prediction,
    mention_key,
)
from .contexts import build_inference_windows
from .embeddings import EntityDocumentIndex
from .features import FeatureExtractor, ScoreTable
from .mention_typing import TypingModel, candidate_type_probabilities
from .ranker import RankerModel, rank_candidates, top_predictions

logger = structlog.get_logger(__name__)

# flavor → mention key → entity id → probability
FlavorProbabilities = Mapping[ClusterFlavor, Mapping[str, Mapping[str, float]]]


def mention_candidates(corpus: Sequence[Document], candidate_sets: CandidateSets) -> List[List[MentionCandidates]]:
    """Per document, every mention with its candidate list (empty when absent)."""
    return [
        [
            MentionCandidates(d.doc_id, i, m, list(candidate_sets.get((d.doc_id, i), [])))
            for i, m in enumerate(d.mentions)
        ]
        for d in corpus
    ]


def document_similarities(
    corpus: Sequence[Document],
    candidate_sets: CandidateSets,
    index: Optional[EntityDocumentIndex],
) -> Dict[str, Dict[str, float]]:
    """cos(D_c, D_t) for every candidate; all 0 without a document index."""
    result: Dict[str, Dict[str, float]] = {}
    for document in corpus:
        vector = index.embed(document)[0] if index is not None else None
        for i in range(len(document.mentions)):
            candidates = candidate_sets.get((document.doc_id, i), [])
            result[document.mention_key(i)] = {
                c.entity_id: index.similarity(c.entity_id, vector) if index is not None else 0.0
                for c in candidates
            }
    return result


def build_score_table(
    documents: Sequence[Sequence[MentionCandidates]],
    typing_probs: FlavorProbabilities,
    doc_sims: Optional[Mapping[str, Mapping[str, float]]] = None,
    rank_probs: Optional[Mapping[str, Mapping[str, float]]] = None,
) -> Dict[str, Dict[str, CandidateScores]]:
    """Join every model output onto its (mention, candidate) pair.

    A typing probability absent from its flavor's table is left out of the
    candidate's scores, so feature extraction reports the gap.
    """
    table: Dict[str, Dict[str, CandidateScores]] = {}
    for mentions in documents:
        for m in mentions:
            row: Dict[str, CandidateScores] = {}
            for c in m.candidates:
                row[c.entity_id] = CandidateScores(
                    typing_probs={
                        flavor: float(probs[m.key][c.entity_id])
                        for flavor, probs in typing_probs.items()
                        if c.entity_id in probs.get(m.key, {})
                    },
                    rank_prob=None if rank_probs is None else rank_probs.get(m.key, {}).get(c.entity_id),
                    doc_sim=float((doc_sims or {}).get(m.key, {}).get(c.entity_id, 0.0)),
                )
            table[m.key] = row
    return table


def rank_probabilities(ranked: pd.DataFrame) -> Dict[str, Dict[str, float]]:
    """mention key → entity id → R, from a ranked table."""
    result: Dict[str, Dict[str, float]] = {}
    for row in ranked.itertuples(index=False):
        result.setdefault(mention_key(row.doc_id, int(row.mention_index)), {})[row.entity_id] = float(row.R)
    return result


def candidate_id_lists(candidate_sets: CandidateSets) -> Dict[str, List[str]]:
    """mention key → candidate entity ids in candidate order."""
    return {
        mention_key(doc_id, index): [c.entity_id for c in candidates]
        for (doc_id, index), candidates in candidate_sets.items()
    }


def first_stage_entities(
    corpus: Sequence[Document],
    predictions: Sequence[Prediction],
) -> Dict[str, List[Optional[str]]]:
    """doc_id → top-1 entity per mention (None without candidates)."""
    top = {(p.doc_id, p.mention_index): p.entity_id for p in predictions}
    return {d.doc_id: [top.get((d.doc_id, i)) for i in range(len(d.mentions))] for d in corpus}


def entity_typing_probabilities(
    corpus: Sequence[Document],
    candidate_sets: CandidateSets,
    stage_one: Sequence[Prediction],
    model: TypingModel,
    clustering: Clustering,
    context_mentions: int,
) -> Dict[str, Dict[str, float]]:
    """``P_c^Entity`` from EC windows built on the stage-1 top-1 entities."""
    if model.config.context_format is not ContextFormat.EC:
        raise ContractError("Stage 2 needs an Entity (EC) typing model", operation="two_stage_rank")
    windows = list(build_inference_windows(corpus, ContextFormat.EC, context_mentions,
                                           first_stage_entities(corpus, stage_one)))
    probabilities = model.predict_proba(windows)
    by_key: Dict[str, np.ndarray] = {w.mention_key: probabilities[i] for i, w in enumerate(windows)}
    return candidate_type_probabilities(by_key, clustering, candidate_id_lists(candidate_sets))


@dataclass
class TwoStageResult:
    """Outputs of both stages; stage-2 fields stay empty for a stage-1 run."""
    stage1_features: pd.DataFrame
    stage1_ranked: pd.DataFrame
    stage1_predictions: List[Prediction]
    stage2_features: Optional[pd.DataFrame] = None
    stage2_ranked: Optional[pd.DataFrame] = None
    stage2_predictions: List[Prediction] = field(default_factory=list)

    @property
    def predictions(self) -> List[Prediction]:
        return self.stage2_predictions if self.stage2_ranked is not None else self.stage1_predictions


def two_stage_rank(
    corpus: Sequence[Document],
    candidate_sets: CandidateSets,
    kb: KnowledgeBase,
    store: SurfaceFormStore,
    typing_probs: FlavorProbabilities,
    stage1_model: RankerModel,
    settings: Settings,
    doc_index: Optional[EntityDocumentIndex] = None,
    stage2_model: Optional[RankerModel] = None,
    entity_model: Optional[TypingModel] = None,
    entity_clustering: Optional[Clustering] = None,
    entity_table: Optional[EmbeddingTable] = None,
) -> TwoStageResult:
    """Rank every mention of a corpus slice with one or two stages.

    Predictions are top-1 per mention before thresholding.

    Raises:
        ContractError: If stage 2 is requested without the Entity typing
            model and its clustering
    """
    if stage2_model is not None and (entity_model is None or entity_clustering is None):
        raise ContractError("Stage 2 requested without an Entity typing model and clustering",
                            operation="two_stage_rank")
    flavors = [f for f in typing_probs if f is not ClusterFlavor.ENTITY]
    documents = mention_candidates(corpus, candidate_sets)
    doc_sims = document_similarities(corpus, candidate_sets, doc_index)

    stage1_scores: ScoreTable = build_score_table(documents, {f: typing_probs[f] for f in flavors}, doc_sims)
    stage1 = FeatureExtractor(kb, store, stage=1, flavors=flavors, settings=settings.features)
    stage1_features = stage1.extract(documents, stage1_scores)
    stage1_ranked = rank_candidates(stage1_model, stage1_features)
    stage1_predictions = top_predictions(stage1_ranked)
    logger.info("stage_completed", stage=1, mentions=len(stage1_predictions))
    result = TwoStageResult(stage1_features, stage1_ranked, stage1_predictions)
    if stage2_model is None:
        return result

    entity_probs = entity_typing_probabilities(
        corpus, candidate_sets, stage1_predictions, entity_model, entity_clustering,
        settings.corpus.context_mentions,
    )
    stage2_scores = build_score_table(
        documents,
        {**{f: typing_probs[f] for f in flavors}, ClusterFlavor.ENTITY: entity_probs},
        doc_sims,
        rank_probabilities(stage1_ranked),
    )
    stage2 = FeatureExtractor(kb, store, stage=2, flavors=flavors, settings=settings.features,
                              entity_table=entity_table)
    result.stage2_features = stage2.extract(documents, stage2_scores)
    result.stage2_ranked = rank_candidates(stage2_model, result.stage2_features)
    result.stage2_predictions = top_predictions(result.stage2_ranked)
    logger.info("stage_completed", stage=2, mentions=len(result.stage2_predictions))
    return result
