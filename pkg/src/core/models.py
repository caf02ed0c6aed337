"""Domain types shared across the toolkit.

Entities and surface form records describe the knowledge base, documents
and mentions describe annotated text, and the remaining types carry the
intermediate results of typing, candidate generation and ranking.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..config.constants import (
    MENTION_KEY_SEPARATOR,
    ClusterFlavor,
    CoarseType,
    ContextFormat,
    MentionSource,
    Provenance,
    SurfaceFlag,
    SurfaceFormType,
)
from .exceptions import ValidationError


@dataclass
class Entity:
    """A knowledge base entry.

    Attributes:
        id: Wikipedia-style identifier (underscores allowed)
        synsets: Retained synset labels after wikicat replacement
        coarse_type: Coarse type resolved through the type mapping
        frequency: Total surface form dataset count
        cluster_types: Cluster id per clustering flavor
    """
    id: str
    synsets: Tuple[str, ...] = ()
    coarse_type: CoarseType = CoarseType.MISC
    frequency: int = 0
    cluster_types: Dict[ClusterFlavor, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("Entity id cannot be empty", field="id", value=self.id)
        if self.frequency < 0:
            raise ValidationError(
                f"Entity frequency must be >= 0: {self.id}",
                field="frequency",
                value=self.frequency,
            )


class KnowledgeBase:
    """Entities indexed by id, in file order."""

    def __init__(self, entities: Sequence[Entity] = ()) -> None:
        self._entities: Dict[str, Entity] = {}
        for entity in entities:
            self.add(entity)

    def add(self, entity: Entity) -> None:
        """Add an entity, rejecting duplicate ids."""
        if entity.id in self._entities:
            raise ValidationError(f"Duplicate entity id: {entity.id}", field="id", value=entity.id)
        self._entities[entity.id] = entity

    def get(self, entity_id: str) -> Optional[Entity]:
        return self._entities.get(entity_id)

    def __getitem__(self, entity_id: str) -> Entity:
        return self._entities[entity_id]

    def __contains__(self, entity_id: object) -> bool:
        return entity_id in self._entities

    def __iter__(self) -> Iterator[Entity]:
        return iter(self._entities.values())

    def __len__(self) -> int:
        return len(self._entities)

    def ids(self) -> List[str]:
        return list(self._entities)


@dataclass(frozen=True)
class SurfaceFormRecord:
    """One (entity, surface) row of the surface form dataset."""
    entity_id: str
    surface: str
    frequency: int
    flags: FrozenSet[SurfaceFlag] = frozenset()

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ValidationError(
                f"Surface form frequency must be >= 1: {self.entity_id}/{self.surface}",
                field="frequency",
                value=self.frequency,
            )


@dataclass(frozen=True)
class Mention:
    """An annotated span over one sentence.

    Attributes:
        sentence_index: Index of the sentence holding the span
        start: First token of the span
        end: One past the last token of the span
        surface: Span tokens joined by single spaces
        gold_entity: Gold entity id; None for NIL
        source: Manual annotation or auto-annotation
    """
    sentence_index: int
    start: int
    end: int
    surface: str
    gold_entity: Optional[str] = None
    source: MentionSource = MentionSource.MANUAL

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValidationError(
                f"Mention span must be non-empty: [{self.start}, {self.end})",
                field="token_span",
                value=(self.start, self.end),
            )

    @property
    def token_span(self) -> Tuple[int, int]:
        return self.start, self.end

    @property
    def position(self) -> Tuple[int, int, int]:
        return self.sentence_index, self.start, self.end

    def overlaps(self, other: "Mention") -> bool:
        return (
            self.sentence_index == other.sentence_index
            and self.start < other.end
            and other.start < self.end
        )


@dataclass
class Document:
    """A pre-tokenized document with its mentions in document order."""
    doc_id: str
    sentences: List[List[str]]
    mentions: List[Mention] = field(default_factory=list)

    def validate(self) -> None:
        """Check span bounds, surface consistency, order and non-overlap.

        Raises:
            ValidationError: If any mention breaks the document invariants
        """
        previous: Optional[Mention] = None
        for mention in self.mentions:
            if not 0 <= mention.sentence_index < len(self.sentences):
                raise ValidationError(
                    f"{self.doc_id}: mention sentence out of range: {mention.sentence_index}",
                    field="sentence_index",
                    value=mention.sentence_index,
                )
            tokens = self.sentences[mention.sentence_index]
            if mention.start < 0 or mention.end > len(tokens):
                raise ValidationError(
                    f"{self.doc_id}: mention span outside sentence: {mention.token_span}",
                    field="token_span",
                    value=mention.token_span,
                )
            if " ".join(tokens[mention.start:mention.end]) != mention.surface:
                raise ValidationError(
                    f"{self.doc_id}: mention surface does not match its tokens: {mention.surface}",
                    field="surface",
                    value=mention.surface,
                )
            if previous is not None:
                if previous.overlaps(mention):
                    raise ValidationError(
                        f"{self.doc_id}: overlapping mentions: {previous.surface} / {mention.surface}",
                        field="token_span",
                        value=mention.token_span,
                    )
                if mention.position < previous.position:
                    raise ValidationError(
                        f"{self.doc_id}: mentions out of document order",
                        field="mentions",
                    )
            previous = mention

    def mention_key(self, index: int) -> str:
        return mention_key(self.doc_id, index)


def mention_key(doc_id: str, index: int) -> str:
    """Key identifying a mention across artifact files."""
    return f"{doc_id}{MENTION_KEY_SEPARATOR}{index}"


def split_mention_key(key: str) -> Tuple[str, int]:
    """Inverse of ``mention_key``."""
    doc_id, _, index = key.rpartition(MENTION_KEY_SEPARATOR)
    if not doc_id or not index.isdigit():
        raise ValidationError(f"Malformed mention key: {key}", field="mention_key", value=key)
    return doc_id, int(index)


@dataclass(frozen=True)
class ContextWindow:
    """Left context, mention surface and right context in one format."""
    left: Tuple[str, ...]
    surface: Tuple[str, ...]
    right: Tuple[str, ...]
    format: ContextFormat


@dataclass(frozen=True)
class TypingInstance:
    """A distant-supervision typing example; label None for inference rows."""
    context: ContextWindow
    label: Optional[int]
    entity_id: str
    mention_key: str = ""


@dataclass
class Clustering:
    """Entity (or token) to cluster id map for one flavor."""
    flavor: ClusterFlavor
    k: int
    assignment: Dict[str, int]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"Cluster count must be positive: {self.k}", field="k", value=self.k)
        if not self.assignment:
            raise ValidationError("Clustering has no assigned items", field="assignment")
        for token, cluster_id in self.assignment.items():
            if not 0 <= cluster_id < self.k:
                raise ValidationError(
                    f"Cluster id {cluster_id} of {token} outside [0, {self.k})",
                    field="assignment",
                    value=cluster_id,
                )

    def cluster_of(self, entity_id: str) -> Optional[int]:
        return self.assignment.get(entity_id)

    def __contains__(self, entity_id: object) -> bool:
        return entity_id in self.assignment

    def members(self) -> Dict[int, List[str]]:
        groups: Dict[int, List[str]] = {}
        for token, cluster_id in self.assignment.items():
            groups.setdefault(cluster_id, []).append(token)
        return groups


@dataclass
class CandidateMatch:
    """A candidate entity for one mention.

    Attributes:
        entity_id: Candidate entity
        best_sf: Closest surface form of the entity to the mention surface
        edit_distance: Levenshtein distance between best_sf and the mention surface
        sf_types: Surface form types of best_sf
        gen_score: Candidate generation score
        provenance: How the candidate was found
    """
    entity_id: str
    best_sf: str
    edit_distance: int
    sf_types: FrozenSet[SurfaceFormType] = frozenset()
    gen_score: float = 0.0
    provenance: Provenance = Provenance.DIRECT

    def __post_init__(self) -> None:
        if self.edit_distance < 0:
            raise ValidationError("Edit distance must be >= 0", field="edit_distance",
                                  value=self.edit_distance)


@dataclass
class CandidateScores:
    """Model outputs attached to one (mention, candidate) pair."""
    typing_probs: Dict[ClusterFlavor, float] = field(default_factory=dict)
    rank_prob: Optional[float] = None
    doc_sim: float = 0.0


@dataclass
class MentionCandidates:
    """A document mention with its ranked candidate list."""
    doc_id: str
    index: int
    mention: Mention
    candidates: List[CandidateMatch] = field(default_factory=list)

    @property
    def key(self) -> str:
        return mention_key(self.doc_id, self.index)

    def entity_ids(self) -> List[str]:
        return [c.entity_id for c in self.candidates]


@dataclass(frozen=True)
class Prediction:
    """Final decision for one mention; entity None means abstain."""
    doc_id: str
    mention_index: int
    entity_id: Optional[str]
    score: float


GoldMap = Mapping[Tuple[str, int], Optional[str]]


class EmbeddingTable:
    """Token to dense vector map with a fixed dimensionality.

    Attributes:
        tokens: Vocabulary in row order
        vectors: ``len(tokens) x dim`` float64 matrix
        metadata: Training parameters (mode, window, epochs, seed, ...)
    """

    def __init__(
        self,
        tokens: Sequence[str],
        vectors: np.ndarray,
        metadata: Optional[Mapping[str, object]] = None,
    ) -> None:
        matrix = np.asarray(vectors, dtype=np.float64)
        if not tokens:
            raise ValidationError("Embedding table vocabulary is empty", field="tokens")
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise ValidationError(
                f"Embedding matrix shape {matrix.shape} does not match {len(tokens)} tokens",
                field="vectors",
            )
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("Embedding table holds NaN or Inf components", field="vectors")
        self.tokens: List[str] = list(tokens)
        self.vectors = matrix
        self.metadata: Dict[str, object] = dict(metadata or {})
        self.index: Dict[str, int] = {token: i for i, token in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValidationError("Embedding table has duplicate tokens", field="tokens")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.index

    def vector(self, token: str) -> np.ndarray:
        return self.vectors[self.index[token]]

    def get(self, token: str) -> Optional[np.ndarray]:
        row = self.index.get(token)
        return None if row is None else self.vectors[row]

    def subset(self, tokens: Sequence[str]) -> "EmbeddingTable":
        """Rows for the given tokens that exist in the table, in table order."""
        wanted = set(tokens)
        kept = [token for token in self.tokens if token in wanted]
        rows = [self.index[token] for token in kept]
        return EmbeddingTable(kept, self.vectors[rows], self.metadata)
