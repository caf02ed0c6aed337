"""Main titles and distant-supervision auto-annotation."""

import re
from typing import Dict, List, Tuple

import structlog

from ..config.constants import MentionSource
from ..core.models import Document, Mention

logger = structlog.get_logger(__name__)

_PARENTHESIZED = re.compile(r" ?\([^()]*\)")


def derive_main_title(entity_id: str) -> str:
    """Readable title of an entity id.

    Examples:
        >>> derive_main_title("Boston_(band)")
        'Boston'
        >>> derive_main_title("Washington,_D.C.")
        'Washington, D.C.'
    """
    return _PARENTHESIZED.sub("", entity_id.replace("_", " ")).strip()


def _find_occurrences(tokens: List[str], needle: Tuple[str, ...]) -> List[int]:
    size = len(needle)
    return [
        start
        for start in range(len(tokens) - size + 1)
        if tuple(tokens[start:start + size]) == needle
    ]


def auto_annotate(document: Document) -> Document:
    """Annotate later repeats of manually annotated surfaces.

    A surface becomes eligible once it has been annotated manually; every
    later unannotated occurrence of the exact token sequence inside one
    sentence receives the entity of the closest preceding manual annotation.
    Longer matches win over shorter overlapping ones, then the leftmost.
    NIL annotations and partial names are never propagated.

    Args:
        document: Document with manual (and possibly auto) mentions

    Returns:
        New document with the added mentions in document order
    """
    manual = sorted(
        (m for m in document.mentions if m.source is MentionSource.MANUAL and m.gold_entity),
        key=lambda m: m.position,
    )
    if not manual:
        return Document(document.doc_id, document.sentences, list(document.mentions))

    sequences: Dict[Tuple[str, ...], List[Mention]] = {}
    for mention in manual:
        sequences.setdefault(tuple(mention.surface.split(" ")), []).append(mention)

    occupied: Dict[int, List[Tuple[int, int]]] = {}
    for mention in document.mentions:
        occupied.setdefault(mention.sentence_index, []).append(mention.token_span)

    added: List[Mention] = []
    for sentence_index, tokens in enumerate(document.sentences):
        matches: List[Tuple[int, int, str]] = []
        for needle, sources in sequences.items():
            for start in _find_occurrences(tokens, needle):
                position = (sentence_index, start, start + len(needle))
                preceding = [m for m in sources if m.position < position]
                if preceding:
                    matches.append((start, start + len(needle), preceding[-1].gold_entity))
        matches.sort(key=lambda match: (-(match[1] - match[0]), match[0]))
        taken = occupied.setdefault(sentence_index, [])
        for start, end, entity_id in matches:
            if any(start < other_end and other_start < end for other_start, other_end in taken):
                continue
            taken.append((start, end))
            added.append(
                Mention(
                    sentence_index=sentence_index,
                    start=start,
                    end=end,
                    surface=" ".join(tokens[start:end]),
                    gold_entity=entity_id,
                    source=MentionSource.AUTO,
                )
            )

    mentions = sorted(document.mentions + added, key=lambda m: m.position)
    if added:
        logger.debug("auto_annotated", doc_id=document.doc_id, added=len(added))
    return Document(document.doc_id, document.sentences, mentions)
