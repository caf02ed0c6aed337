"""Candidate generation.

Stage one retrieves surfaces sharing enough character trigrams with the
mention and keeps those close in edit distance or differing by few words.
Stage two widens each mention's set with the candidates of mentions whose
surface contains it and with frequently cooccurring entities whose surfaces
contain the mention. Candidates are then scored and cut to the top N.
"""

from collections import Counter
from dataclasses import replace
from typing import AbstractSet, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import structlog

from ..config.constants import (
    GOLD_RECALL_CUTS,
    JARO_WINKLER_WEIGHT,
    OCCURRENCE_WEIGHT,
    Provenance,
)
from ..config.settings import CandgenSettings
from ..core.models import CandidateMatch, Document, KnowledgeBase, Mention
from ..connectors.cooccurrence import CooccurrenceTable
from ..connectors.surface_forms import SurfaceFormStore
from ..utils.helpers import safe_divide, tokens_contain
from .string_metrics import jaro_winkler_distance, levenshtein, trigrams, word_diff
from .surface_types import surface_form_types

logger = structlog.get_logger(__name__)

CandidateSets = Dict[Tuple[str, int], List[CandidateMatch]]


class TrigramIndex:
    """Character trigram postings over every surface of a store.

    Attributes:
        surfaces: Indexed surfaces; postings refer to positions in this list
        postings: trigram → positions of the surfaces containing it
    """

    def __init__(self, store: SurfaceFormStore) -> None:
        self.store = store
        self.surfaces: List[str] = store.surfaces()
        self.postings: Dict[str, Set[int]] = {}
        for position, surface in enumerate(self.surfaces):
            for gram in trigrams(surface):
                self.postings.setdefault(gram, set()).add(position)

    def search(self, query: str, threshold: float) -> List[str]:
        """Surfaces whose trigram overlap with the query is at least ``threshold``."""
        query_grams = trigrams(query)
        if not query_grams:
            return []
        shared: Counter = Counter()
        for gram in query_grams:
            shared.update(self.postings.get(gram, ()))
        needed = threshold * len(query_grams)
        return [self.surfaces[p] for p, count in sorted(shared.items()) if count >= needed - 1e-12]

    def __len__(self) -> int:
        return len(self.surfaces)


def build_index(store: SurfaceFormStore) -> TrigramIndex:
    index = TrigramIndex(store)
    logger.info("trigram_index_built", surfaces=len(index), trigrams=len(index.postings))
    return index


def accepts_surface(
    query: str,
    surface: str,
    edit_ratio: float,
    min_words: int,
    max_word_diff: int,
) -> Tuple[bool, int]:
    """Edit-distance or word-overlap acceptance of one surface; returns (accepted, edit)."""
    edit = levenshtein(surface, query)
    if edit <= edit_ratio * len(query):
        return True, edit
    accepted = len(surface.split()) >= min_words and word_diff(surface, query) <= max_word_diff
    return accepted, edit


def get_candidates_for_mention(
    index: TrigramIndex,
    query: str,
    T: float = 0.60,
    E: float = 0.25,
    W: int = 2,
    D: int = 1,
) -> List[CandidateMatch]:
    """Stage-one candidates of a query, one per entity, sorted by entity id.

    ``best_sf`` is the accepted surface of the entity closest to the query
    (smallest edit distance, then lexicographic).
    """
    best: Dict[str, Tuple[int, str]] = {}
    for surface in index.search(query, T):
        accepted, edit = accepts_surface(query, surface, E, W, D)
        if not accepted:
            continue
        for entity_id in index.store.entities_for(surface):
            if entity_id not in best or (edit, surface) < best[entity_id]:
                best[entity_id] = (edit, surface)
    return [
        CandidateMatch(entity_id=entity_id, best_sf=surface, edit_distance=edit)
        for entity_id, (edit, surface) in sorted(best.items())
    ]


def best_surface(store: SurfaceFormStore, entity_id: str, query: str) -> Tuple[str, int]:
    """Surface of an entity closest to the query (edit distance, then lexicographic)."""
    scored = [(levenshtein(surface, query), surface) for surface in store.surfaces_for(entity_id)]
    if not scored:
        return entity_id.replace("_", " "), levenshtein(entity_id.replace("_", " "), query)
    edit, surface = min(scored)
    return surface, edit


def _surface_contains(container: str, contained: str) -> bool:
    return tokens_contain(container.split(" "), contained.split(" "))


def expand_document_candidates(
    candidate_sets: Sequence[List[CandidateMatch]],
    mentions: Sequence[Mention],
    cooccurrence: Optional[CooccurrenceTable],
    store: SurfaceFormStore,
    top_r: int = 20,
) -> List[List[CandidateMatch]]:
    """Stage-two expansion of a document's candidate sets.

    Containment: if mention a's surface occurs (token-wise) inside mention b's
    surface, b's candidates join a. Cooccurrence: the top-R neighbors of every
    other mention's candidates join a when one of their surfaces contains a's
    surface. Both read the stage-one sets; the result is a superset of them.
    """
    expanded: List[List[CandidateMatch]] = []
    for a, mention in enumerate(mentions):
        current = list(candidate_sets[a])
        present = {c.entity_id for c in current}

        def add(entity_id: str, provenance: Provenance) -> None:
            surface, edit = best_surface(store, entity_id, mention.surface)
            current.append(CandidateMatch(entity_id, surface, edit, provenance=provenance))
            present.add(entity_id)

        containing = sorted({
            c.entity_id
            for b, other in enumerate(mentions)
            if b != a and _surface_contains(other.surface, mention.surface)
            for c in candidate_sets[b]
        } - present)
        for entity_id in containing:
            add(entity_id, Provenance.CONTAINMENT)

        if cooccurrence is not None and top_r > 0:
            seeds = {c.entity_id for b in range(len(mentions)) if b != a for c in candidate_sets[b]}
            neighbors = sorted({n for e in seeds for n in cooccurrence.top(e, top_r)} - present)
            for entity_id in neighbors:
                if any(_surface_contains(s, mention.surface) for s in store.surfaces_for(entity_id)):
                    add(entity_id, Provenance.COOCCURRENCE)
        expanded.append(current)
    return expanded


def generation_score(entity_frequency: int, occurrences: int, jw_distance: float) -> float:
    """``frequency + occurrences·100 − jaro_winkler_distance·10000``."""
    return entity_frequency + occurrences * OCCURRENCE_WEIGHT - jw_distance * JARO_WINKLER_WEIGHT


def document_occurrences(candidate_sets: Iterable[Sequence[CandidateMatch]]) -> Counter:
    """Number of mentions of a document whose candidate set holds each entity."""
    counts: Counter = Counter()
    for candidates in candidate_sets:
        counts.update({c.entity_id for c in candidates})
    return counts


def score_and_cut(
    candidates: Sequence[CandidateMatch],
    mention: Mention,
    occurrences: Mapping[str, int],
    store: SurfaceFormStore,
    top_n: int = 100,
) -> List[CandidateMatch]:
    """Score candidates, sort by score (desc) then entity id and keep ``top_n``."""
    scored = [
        replace(
            c,
            gen_score=generation_score(
                store.entity_frequency(c.entity_id),
                occurrences.get(c.entity_id, 0),
                jaro_winkler_distance(mention.surface, c.best_sf),
            ),
        )
        for c in candidates
    ]
    scored.sort(key=lambda c: (-c.gen_score, c.entity_id))
    return scored[:top_n]


def gold_recall(
    candidate_sets: Mapping[Tuple[str, int], Sequence[CandidateMatch]],
    golds: Mapping[Tuple[str, int], Optional[str]],
    top_n: Optional[int] = None,
) -> float:
    """Percentage of non-NIL golds found among the first ``top_n`` candidates."""
    total = hits = 0
    for key, gold in golds.items():
        if not gold:
            continue
        total += 1
        candidates = candidate_sets.get(key, [])
        if top_n is not None:
            candidates = candidates[:top_n]
        hits += any(c.entity_id == gold for c in candidates)
    return 100.0 * safe_divide(hits, total)


def mine_cooccurrence(corpus: Iterable[Document]) -> CooccurrenceTable:
    """Count, for every ordered entity pair, the documents mentioning both."""
    table = CooccurrenceTable()
    documents = 0
    for document in corpus:
        entities = sorted({m.gold_entity for m in document.mentions if m.gold_entity})
        for entity_id in entities:
            for neighbor_id in entities:
                if neighbor_id != entity_id:
                    table.add(entity_id, neighbor_id)
        documents += 1
    logger.info("cooccurrence_mined", documents=documents, rows=len(table))
    return table


class CandidateGenerator:
    """Both generation stages, scoring and surface typing for whole documents."""

    def __init__(
        self,
        store: SurfaceFormStore,
        kb: Optional[KnowledgeBase] = None,
        cooccurrence: Optional[CooccurrenceTable] = None,
        settings: Optional[CandgenSettings] = None,
        first_names: AbstractSet[str] = frozenset(),
        surnames: AbstractSet[str] = frozenset(),
    ) -> None:
        self.store = store
        self.kb = kb
        self.cooccurrence = cooccurrence
        self.settings = settings or CandgenSettings()
        self.first_names = first_names
        self.surnames = surnames
        self.index = build_index(store)
        self._cache: Dict[str, List[CandidateMatch]] = {}

    def stage_one(self, query: str) -> List[CandidateMatch]:
        if query not in self._cache:
            s = self.settings
            self._cache[query] = get_candidates_for_mention(
                self.index, query, s.trigram_threshold, s.edit_ratio, s.min_words, s.max_word_diff
            )
        return list(self._cache[query])

    def _with_types(self, candidate: CandidateMatch) -> CandidateMatch:
        entity = self.kb.get(candidate.entity_id) if self.kb is not None else None
        if entity is None:
            return candidate
        record = self.store.get(candidate.entity_id, candidate.best_sf)
        flags = record.flags if record is not None else frozenset()
        types = surface_form_types(candidate.best_sf, entity, flags, self.first_names, self.surnames)
        return replace(candidate, sf_types=types)

    def generate_document(
        self,
        document: Document,
    ) -> Tuple[List[List[CandidateMatch]], List[List[CandidateMatch]]]:
        """Returns (final top-N sets, scored uncut stage-one sets) per mention."""
        stage1 = [self.stage_one(m.surface) for m in document.mentions]
        expanded = expand_document_candidates(
            stage1, document.mentions, self.cooccurrence, self.store, self.settings.coocc_top_r
        )
        occurrences = document_occurrences(expanded)
        final = [
            [self._with_types(c) for c in score_and_cut(candidates, mention, occurrences, self.store,
                                                        self.settings.top_n)]
            for candidates, mention in zip(expanded, document.mentions)
        ]
        stage1_occurrences = document_occurrences(stage1)
        ranked_stage1 = [
            score_and_cut(candidates, mention, stage1_occurrences, self.store, len(candidates))
            for candidates, mention in zip(stage1, document.mentions)
        ]
        return final, ranked_stage1

    def generate(self, corpus: Iterable[Document]) -> Tuple[CandidateSets, CandidateSets]:
        """Candidate sets of every mention keyed by (doc_id, mention index)."""
        final_sets: CandidateSets = {}
        stage1_sets: CandidateSets = {}
        for document in corpus:
            final, stage1 = self.generate_document(document)
            for index, (candidates, first) in enumerate(zip(final, stage1)):
                final_sets[(document.doc_id, index)] = candidates
                stage1_sets[(document.doc_id, index)] = first
        return final_sets, stage1_sets


def recall_table(
    final_sets: CandidateSets,
    stage1_sets: CandidateSets,
    golds: Mapping[Tuple[str, int], Optional[str]],
    cuts: Sequence[int] = GOLD_RECALL_CUTS,
) -> Dict[str, float]:
    """Gold recall without expansion (uncut and at every N) and after the final cut.

    ``stage1_sets`` must be ranked by generation score, as
    :meth:`CandidateGenerator.generate` returns them.
    """
    table = {"stage1": gold_recall(stage1_sets, golds)}
    table.update({f"stage1_N={n}": gold_recall(stage1_sets, golds, n) for n in cuts})
    table.update({f"N={n}": gold_recall(final_sets, golds, n) for n in cuts})
    return table
