"""Context representations, embedding training inputs and typing datasets.

Three views of a mention's surroundings:

* WC: the words of the mention's sentence left and right of the span
* SFC: the surface words of up to N neighboring mentions per side
* EC: the entity ids of up to N neighboring mentions per side

The builders below turn an annotated corpus into SGNS streams and pairs for
every embedding table, and into distant-supervision typing datasets labeled
with cluster ids.
"""

import math
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import structlog

from ..config.constants import (
    CLUSTER_TOKEN_TEMPLATE,
    CONTEXT_MENTIONS,
    EXCLUDED_SYNSETS,
    FLAVOR_FORMATS,
    MAX_SENTENCE_WORDS,
    MIN_SENTENCE_WORDS,
    NIL_ENTITY,
    ClusterFlavor,
    ContextFormat,
)
from ..core.models import Clustering, ContextWindow, Document, KnowledgeBase, TypingInstance
from ..connectors.cooccurrence import CooccurrenceTable
from ..connectors.surface_forms import SurfaceFormStore

logger = structlog.get_logger(__name__)

Pair = Tuple[str, str]


def cluster_token(cluster_id: int) -> str:
    """Special token standing for a cluster id in embedding streams."""
    return CLUSTER_TOKEN_TEMPLATE.format(k=cluster_id)


def format_for(flavor: ClusterFlavor) -> ContextFormat:
    """Context format consumed by the typing model of a flavor."""
    return FLAVOR_FORMATS[flavor]


def _neighbor_indices(
    count: int,
    index: int,
    limit: int,
    eligible: Optional[Sequence[bool]] = None,
) -> Tuple[List[int], List[int]]:
    """Nearest ``limit`` eligible mention indices on each side, in document order."""
    left: List[int] = []
    for j in range(index - 1, -1, -1):
        if len(left) == limit:
            break
        if eligible is None or eligible[j]:
            left.append(j)
    right: List[int] = []
    for j in range(index + 1, count):
        if len(right) == limit:
            break
        if eligible is None or eligible[j]:
            right.append(j)
    return left[::-1], right


def _surface_words(document: Document, indices: Sequence[int]) -> Tuple[str, ...]:
    return tuple(word for j in indices for word in document.mentions[j].surface.split(" "))


def extract_context(
    document: Document,
    mention_index: int,
    context_format: ContextFormat,
    context_mentions: int = CONTEXT_MENTIONS,
    entity_ids: Optional[Sequence[Optional[str]]] = None,
) -> ContextWindow:
    """Context window of one mention.

    Args:
        document: Document holding the mention
        mention_index: Index of the mention in ``document.mentions``
        context_format: WC, SFC or EC
        context_mentions: Neighbor mentions per side for SFC/EC
        entity_ids: Per-mention entity ids overriding the gold ids for EC
            (stage-1 predictions at inference time); None entries are skipped

    Returns:
        ContextWindow whose surface is the mention's own tokens
    """
    mention = document.mentions[mention_index]
    surface = tuple(mention.surface.split(" "))

    if context_format is ContextFormat.WC:
        tokens = document.sentences[mention.sentence_index]
        return ContextWindow(tuple(tokens[:mention.start]), surface, tuple(tokens[mention.end:]),
                             context_format)

    if context_format is ContextFormat.SFC:
        left, right = _neighbor_indices(len(document.mentions), mention_index, context_mentions)
        return ContextWindow(
            _surface_words(document, left), surface, _surface_words(document, right), context_format
        )

    ids = list(entity_ids) if entity_ids is not None else [m.gold_entity for m in document.mentions]
    eligible = [entity_id is not None and entity_id != NIL_ENTITY for entity_id in ids]
    left, right = _neighbor_indices(len(document.mentions), mention_index, context_mentions, eligible)
    return ContextWindow(tuple(ids[j] for j in left), surface, tuple(ids[j] for j in right),
                         context_format)


# ---------------------------------------------------------------------------
# Embedding inputs
# ---------------------------------------------------------------------------

def _render_document(document: Document, render_mention) -> List[str]:
    by_sentence: Dict[int, List] = {}
    for mention in document.mentions:
        by_sentence.setdefault(mention.sentence_index, []).append(mention)
    stream: List[str] = []
    for index, tokens in enumerate(document.sentences):
        cursor = 0
        for mention in by_sentence.get(index, ()):
            stream.extend(tokens[cursor:mention.start])
            stream.extend(render_mention(mention))
            cursor = mention.end
        stream.extend(tokens[cursor:])
    return stream


def build_wc_training_stream(corpus: Iterable[Document]) -> List[List[str]]:
    """One stream per document with each linked mention replaced by its entity id."""
    return [
        _render_document(
            document,
            lambda m: [m.gold_entity] if m.gold_entity else m.surface.split(" "),
        )
        for document in corpus
    ]


def build_ec_training_stream(corpus: Iterable[Document]) -> List[List[str]]:
    """Per document, the ordered entity ids of its linked mentions."""
    return [[m.gold_entity for m in document.mentions if m.gold_entity] for document in corpus]


def build_sfc_pairs(
    corpus: Iterable[Document],
    context_mentions: int = CONTEXT_MENTIONS,
) -> List[Pair]:
    """``(entity, word)`` for every surface word of the neighboring mentions."""
    pairs: List[Pair] = []
    for document in corpus:
        for index, mention in enumerate(document.mentions):
            if not mention.gold_entity:
                continue
            window = extract_context(document, index, ContextFormat.SFC, context_mentions)
            pairs.extend((mention.gold_entity, word) for word in window.left + window.right)
    return pairs


def build_synset_pairs(kb: KnowledgeBase) -> List[Pair]:
    """``(entity, synset)`` for every retained synset not on the filter list."""
    return [
        (entity.id, synset)
        for entity in kb
        for synset in entity.synsets
        if synset not in EXCLUDED_SYNSETS
    ]


def build_cooccurrence_pairs(table: CooccurrenceTable, max_copies: int = 10) -> List[Pair]:
    """``(entity, neighbor)`` repeated by cooccurrence count, capped per row."""
    return [
        (entity_id, neighbor_id)
        for entity_id, neighbor_id, count in table.rows()
        for _ in range(min(count, max_copies))
    ]


def build_cluster_centric_stream(corpus: Iterable[Document], clustering: Clustering) -> List[List[str]]:
    """Surface tokens of each mention followed by its entity's cluster token."""

    def render(mention) -> List[str]:
        tokens = mention.surface.split(" ")
        cluster_id = clustering.cluster_of(mention.gold_entity) if mention.gold_entity else None
        if cluster_id is not None:
            tokens = tokens + [cluster_token(cluster_id)]
        return tokens

    return [_render_document(document, render) for document in corpus]


def sf_copy_count(frequency: int) -> int:
    """Copies of a surface word: ``max(1, round(ln f))``."""
    return max(1, int(round(math.log(frequency))))


def build_sf_word_pairs(store: SurfaceFormStore, clustering: Clustering) -> List[Pair]:
    """``(word, cluster token)`` weighted by the log frequency of each record."""
    pairs: List[Pair] = []
    for record in store:
        cluster_id = clustering.cluster_of(record.entity_id)
        if cluster_id is None:
            continue
        token = cluster_token(cluster_id)
        copies = sf_copy_count(record.frequency)
        for word in record.surface.split(" "):
            if word:
                pairs.extend([(word, token)] * copies)
    return pairs


# ---------------------------------------------------------------------------
# Typing datasets
# ---------------------------------------------------------------------------

def build_typing_dataset(
    corpus: Iterable[Document],
    clustering: Clustering,
    context_format: ContextFormat,
    context_mentions: int = CONTEXT_MENTIONS,
    min_sentence_words: int = MIN_SENTENCE_WORDS,
    max_sentence_words: int = MAX_SENTENCE_WORDS,
) -> Tuple[List[TypingInstance], Dict[str, int]]:
    """Distant-supervision typing instances labeled with cluster ids.

    Mentions whose gold entity is NIL or unclustered are skipped; WC instances
    additionally require a sentence of ``min..max`` words.

    Returns:
        (instances in document order, skipped counts by reason)
    """
    instances: List[TypingInstance] = []
    skipped = {"nil": 0, "unclustered": 0, "sentence_length": 0}
    for document in corpus:
        for index, mention in enumerate(document.mentions):
            if not mention.gold_entity:
                skipped["nil"] += 1
                continue
            label = clustering.cluster_of(mention.gold_entity)
            if label is None:
                skipped["unclustered"] += 1
                continue
            if context_format is ContextFormat.WC:
                length = len(document.sentences[mention.sentence_index])
                if not min_sentence_words <= length <= max_sentence_words:
                    skipped["sentence_length"] += 1
                    continue
            instances.append(
                TypingInstance(
                    context=extract_context(document, index, context_format, context_mentions),
                    label=label,
                    entity_id=mention.gold_entity,
                    mention_key=document.mention_key(index),
                )
            )
    logger.info(
        "typing_dataset_built",
        flavor=clustering.flavor.value,
        format=context_format.value,
        instances=len(instances),
        **{f"skipped_{reason}": count for reason, count in skipped.items()},
    )
    return instances, skipped


def build_inference_windows(
    corpus: Iterable[Document],
    context_format: ContextFormat,
    context_mentions: int = CONTEXT_MENTIONS,
    entity_ids: Optional[Dict[str, Sequence[Optional[str]]]] = None,
) -> Iterator[TypingInstance]:
    """Unlabeled windows for every mention of every document.

    Args:
        entity_ids: doc_id → per-mention ids used for EC windows instead of gold
    """
    for document in corpus:
        ids = entity_ids.get(document.doc_id) if entity_ids is not None else None
        for index, mention in enumerate(document.mentions):
            yield TypingInstance(
                context=extract_context(document, index, context_format, context_mentions, ids),
                label=None,
                entity_id=mention.gold_entity or NIL_ENTITY,
                mention_key=document.mention_key(index),
            )
