"""Ranking features.

Every (mention, candidate) pair gets a fixed-layout vector made of local
slots (edit distance, entity frequency, surface and entity types, typing
probabilities), mention-level slots comparing siblings, document-level
typing maxima and, in the second stage, slots derived from the first-stage
ranking probabilities.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog

from ..config.constants import STAGE_ONE_FLAVORS, ClusterFlavor, CoarseType, SurfaceFormType
from ..config.settings import FeatureSettings
from ..connectors.ranking_files import KEY_COLUMNS, LABEL_COLUMN
from ..connectors.surface_forms import SurfaceFormStore
from ..core.exceptions import ContractError, ValidationError
from ..core.models import (
    CandidateMatch,
    CandidateScores,
    EmbeddingTable,
    Entity,
    KnowledgeBase,
    MentionCandidates,
)
from ..utils.helpers import safe_log
from .surface_types import ENTITY_TYPE_ORDER, SURFACE_TYPE_ORDER, entity_type_binary, surface_type_binary

logger = structlog.get_logger(__name__)

# mention key → entity id → scores
ScoreTable = Mapping[str, Mapping[str, CandidateScores]]


def _slot(flavor: ClusterFlavor) -> str:
    return flavor.value.lower()


def stage_flavors(stage: int, flavors: Sequence[ClusterFlavor]) -> List[ClusterFlavor]:
    """Typing flavors of a stage in slot order; Entity only exists in stage 2."""
    if stage not in (1, 2):
        raise ValidationError(f"Unknown ranking stage: {stage}", field="stage", value=stage)
    chosen = [f for f in STAGE_ONE_FLAVORS if f in flavors]
    if stage == 2:
        chosen.append(ClusterFlavor.ENTITY)
    return chosen


def _flavor_slots(flavors: Sequence[ClusterFlavor]) -> List[str]:
    slots = [f"typing_prob_{_slot(f)}" for f in flavors]
    slots += [f"max_diff_typing_prob_{_slot(f)}" for f in flavors]
    slots += [f"max_typing_prob_in_doc_{_slot(f)}" for f in flavors]
    return slots


def feature_layout(
    stage: int,
    flavors: Sequence[ClusterFlavor] = STAGE_ONE_FLAVORS,
    raw_doc_similarity: bool = False,
) -> List[str]:
    """Slot names of a stage.

    The stage-2 layout is the stage-1 layout followed by the Entity typing
    slots, ``max_ranking_score`` and ``max_cos_sim_in_context``.
    """
    stage_flavors(stage, flavors)
    first = stage_flavors(1, flavors)
    layout = ["sf_edit_distance", "entity_log_freq"]
    layout += [f"sf_type_{t.value}" for t in SURFACE_TYPE_ORDER]
    layout += [f"entity_type_{t.value}" for t in ENTITY_TYPE_ORDER]
    if raw_doc_similarity:
        layout.append("doc_similarity")
    layout += ["avg_sf_edit_distance", "max_diff_sf_log_freq", "max_diff_doc_similarity"]
    layout += _flavor_slots(first)
    if stage == 2:
        layout += _flavor_slots([ClusterFlavor.ENTITY])
        layout += ["max_ranking_score", "max_cos_sim_in_context"]
    return layout


def max_diff(values: Sequence[float], entity_ids: Sequence[str]) -> np.ndarray:
    """Distance of every candidate to the best sibling.

    The max (highest value, then smallest entity id) gets ``own − second``;
    every other candidate gets ``max − own``; a singleton gets 0.

    Examples:
        >>> max_diff([10.0, 7.0, 3.0], ["a", "b", "c"]).tolist()
        [3.0, 3.0, 7.0]
    """
    values = np.asarray(values, dtype=np.float64)
    result = np.zeros(len(values))
    if len(values) < 2:
        return result
    order = sorted(range(len(values)), key=lambda i: (-values[i], entity_ids[i]))
    top = order[0]
    result[:] = values[top] - values
    result[top] = values[top] - values[order[1]]
    return result


@dataclass
class _Row:
    mention: MentionCandidates
    candidate: CandidateMatch
    scores: CandidateScores


def _safe_cosine(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> float:
    if a is None or b is None:
        return 0.0
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


class FeatureExtractor:
    """Builds feature vectors for one stage.

    Args:
        kb: Knowledge base (frequency and coarse type)
        store: Surface form store (frequency of the matched form)
        stage: 1 or 2
        flavors: Stage-1 typing flavors in use
        settings: top-N x M window and the raw doc-similarity switch
        entity_table: Entity vectors for ``max_cos_sim_in_context`` (stage 2)
    """

    def __init__(
        self,
        kb: KnowledgeBase,
        store: SurfaceFormStore,
        stage: int = 1,
        flavors: Sequence[ClusterFlavor] = STAGE_ONE_FLAVORS,
        settings: Optional[FeatureSettings] = None,
        entity_table: Optional[EmbeddingTable] = None,
    ) -> None:
        if stage == 1 and ClusterFlavor.ENTITY in flavors:
            raise ContractError("Entity typing probabilities are not available in stage 1",
                                operation="features")
        self.kb = kb
        self.store = store
        self.stage = stage
        self.flavors = stage_flavors(stage, flavors)
        self.settings = settings or FeatureSettings()
        self.entity_table = entity_table
        self.layout = feature_layout(stage, flavors, self.settings.raw_doc_similarity)

    def _entity(self, entity_id: str) -> Entity:
        entity = self.kb.get(entity_id)
        return entity if entity is not None else Entity(entity_id, coarse_type=CoarseType.MISC)

    def _entity_frequency(self, entity_id: str) -> int:
        entity = self.kb.get(entity_id)
        if entity is not None and entity.frequency > 0:
            return entity.frequency
        return self.store.entity_frequency(entity_id)

    def _sf_frequency(self, candidate: CandidateMatch) -> int:
        record = self.store.get(candidate.entity_id, candidate.best_sf)
        return record.frequency if record is not None else 0

    def _typing_prob(self, row: _Row, flavor: ClusterFlavor) -> float:
        probability = row.scores.typing_probs.get(flavor)
        if probability is None:
            raise ContractError(
                f"No {flavor.value} typing probability for {row.candidate.entity_id} "
                f"at mention {row.mention.key}",
                operation="features",
            )
        return float(probability)

    def compute_local(self, row: _Row) -> Dict[str, float]:
        """Slots that depend on one candidate only."""
        candidate = row.candidate
        slots: Dict[str, float] = {
            "sf_edit_distance": float(candidate.edit_distance),
            "entity_log_freq": safe_log(self._entity_frequency(candidate.entity_id)),
        }
        for name, value in zip(SURFACE_TYPE_ORDER, surface_type_binary(candidate.sf_types)):
            slots[f"sf_type_{name.value}"] = value
        for name, value in zip(ENTITY_TYPE_ORDER, entity_type_binary(self._entity(candidate.entity_id))):
            slots[f"entity_type_{name.value}"] = value
        for flavor in self.flavors:
            slots[f"typing_prob_{_slot(flavor)}"] = self._typing_prob(row, flavor)
        if self.settings.raw_doc_similarity:
            slots["doc_similarity"] = row.scores.doc_sim
        return slots

    def compute_mention_level(self, rows: Sequence[_Row]) -> List[Dict[str, float]]:
        """Slots comparing the candidates of one mention."""
        if not rows:
            return []
        ids = [r.candidate.entity_id for r in rows]
        average_edit = float(np.mean([r.candidate.edit_distance for r in rows]))
        columns = {
            "max_diff_sf_log_freq": max_diff([safe_log(self._sf_frequency(r.candidate)) for r in rows], ids),
            "max_diff_doc_similarity": max_diff([r.scores.doc_sim for r in rows], ids),
        }
        for flavor in self.flavors:
            columns[f"max_diff_typing_prob_{_slot(flavor)}"] = max_diff(
                [self._typing_prob(r, flavor) for r in rows], ids
            )
        return [
            {"avg_sf_edit_distance": average_edit, **{name: float(col[i]) for name, col in columns.items()}}
            for i in range(len(rows))
        ]

    def compute_document_level(self, mentions: Sequence[Sequence[_Row]]) -> List[List[Dict[str, float]]]:
        """Per flavor, the max typing probability of the same entity anywhere in the document."""
        best: Dict[Tuple[str, ClusterFlavor], float] = {}
        for rows in mentions:
            for row in rows:
                for flavor in self.flavors:
                    key = (row.candidate.entity_id, flavor)
                    best[key] = max(best.get(key, 0.0), self._typing_prob(row, flavor))
        return [
            [
                {f"max_typing_prob_in_doc_{_slot(f)}": best[(row.candidate.entity_id, f)] for f in self.flavors}
                for row in rows
            ]
            for rows in mentions
        ]

    def compute_second_stage(self, mentions: Sequence[Sequence[_Row]]) -> List[List[Dict[str, float]]]:
        """``max_ranking_score`` and ``max_cos_sim_in_context``.

        Raises:
            ContractError: If a candidate lacks its first-stage ranking probability
        """
        for rows in mentions:
            for row in rows:
                if row.scores.rank_prob is None:
                    raise ContractError(
                        f"Stage-2 features need rank probabilities; missing for "
                        f"{row.candidate.entity_id} at mention {row.mention.key}",
                        operation="features",
                    )

        top_n, window = self.settings.top_n, self.settings.window_m
        ranked = [
            sorted(rows, key=lambda r: (-r.scores.rank_prob, r.candidate.entity_id))[:top_n]
            for rows in mentions
        ]

        def vector(entity_id: str) -> Optional[np.ndarray]:
            return self.entity_table.get(entity_id) if self.entity_table is not None else None

        result: List[List[Dict[str, float]]] = []
        for i, rows in enumerate(mentions):
            out: List[Dict[str, float]] = []
            for row in rows:
                entity_id = row.candidate.entity_id
                previous = [
                    r.scores.rank_prob for j in range(i) for r in mentions[j] if r.candidate.entity_id == entity_id
                ]
                if previous:
                    ranking = max(previous)
                else:
                    future = [
                        r.scores.rank_prob
                        for j in range(i + 1, len(mentions))
                        for r in mentions[j]
                        if r.candidate.entity_id == entity_id and SurfaceFormType.WIKI_ID in r.candidate.sf_types
                    ]
                    ranking = max(future) if future else 0.0

                own = vector(entity_id)
                context = -np.inf
                for j in range(max(0, i - window), min(len(mentions), i + window + 1)):
                    if j == i:
                        continue
                    for other in ranked[j]:
                        value = _safe_cosine(own, vector(other.candidate.entity_id)) * self._typing_prob(
                            other, ClusterFlavor.ENTITY
                        )
                        context = max(context, value)
                # 0 only when no neighbour has candidates
                context = float(context) if np.isfinite(context) else 0.0
                out.append({"max_ranking_score": float(ranking), "max_cos_sim_in_context": context})
            result.append(out)
        return result

    def extract_document(
        self,
        mentions: Sequence[MentionCandidates],
        scores: ScoreTable,
        golds: Optional[Mapping[str, Optional[str]]] = None,
    ) -> List[Dict[str, object]]:
        """Feature rows of every (mention, candidate) pair of one document."""
        rows = [
            [_Row(m, c, scores.get(m.key, {}).get(c.entity_id, CandidateScores())) for c in m.candidates]
            for m in mentions
        ]
        document_slots = self.compute_document_level(rows)
        second = self.compute_second_stage(rows) if self.stage == 2 else [[{} for _ in r] for r in rows]

        records: List[Dict[str, object]] = []
        for m_rows, doc_slots, stage_slots in zip(rows, document_slots, second):
            mention_slots = self.compute_mention_level(m_rows)
            for row, ms, ds, ss in zip(m_rows, mention_slots, doc_slots, stage_slots):
                slots = {**self.compute_local(row), **ms, **ds, **ss}
                gold = golds.get(row.mention.key) if golds is not None else row.mention.mention.gold_entity
                record: Dict[str, object] = {
                    "doc_id": row.mention.doc_id,
                    "mention_index": row.mention.index,
                    "entity_id": row.candidate.entity_id,
                }
                record.update({name: slots[name] for name in self.layout})
                record[LABEL_COLUMN] = int(gold is not None and gold == row.candidate.entity_id)
                records.append(record)
        return records

    def extract(
        self,
        documents: Sequence[Sequence[MentionCandidates]],
        scores: ScoreTable,
    ) -> pd.DataFrame:
        """Feature table over documents; columns are keys, the layout, then ``label``."""
        records: List[Dict[str, object]] = []
        for mentions in documents:
            records.extend(self.extract_document(mentions, scores))
        df = pd.DataFrame(records, columns=KEY_COLUMNS + self.layout + [LABEL_COLUMN])
        if df[self.layout].isna().any().any():
            raise ValidationError("Feature table holds NaN values", field="features")
        logger.info("features_extracted", stage=self.stage, rows=len(df), slots=len(self.layout))
        return df
