"""Annotated corpus files.

One document per block::

    #DOC doc-1
    [[Barack_Obama|Barack Obama]] visited [[Ankara|Ankara]] .
    Later [[auto:Barack_Obama|Barack Obama]] left .

A blank line ends a block. The gold id may be ``NIL``; the ``auto:`` prefix
marks mentions added by auto-annotation.
"""

import re
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import structlog

from ..config.constants import AUTO_MARKER, DOC_HEADER_PREFIX, NIL_ENTITY, MentionSource
from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError, ValidationError
from ..core.models import Document, Mention

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

MENTION_PATTERN = re.compile(r"\[\[([^|\[\]]+)\|([^\[\]]+)\]\]")


def parse_sentence(line: str, sentence_index: int) -> Tuple[List[str], List[Mention]]:
    """Split one markup line into tokens and mentions.

    Raises:
        ValueError: On unbalanced markup or an empty mention
    """
    tokens: List[str] = []
    mentions: List[Mention] = []
    cursor = 0
    for match in MENTION_PATTERN.finditer(line):
        before = line[cursor:match.start()]
        if "[[" in before or "]]" in before:
            raise ValueError("unbalanced mention markup")
        tokens.extend(before.split())
        label, span = match.group(1).strip(), match.group(2).split()
        if not span:
            raise ValueError("mention without tokens")
        source = MentionSource.MANUAL
        if label.startswith(AUTO_MARKER):
            source = MentionSource.AUTO
            label = label[len(AUTO_MARKER):]
        start = len(tokens)
        tokens.extend(span)
        mentions.append(
            Mention(
                sentence_index=sentence_index,
                start=start,
                end=len(tokens),
                surface=" ".join(span),
                gold_entity=None if label == NIL_ENTITY else label,
                source=source,
            )
        )
        cursor = match.end()
    rest = line[cursor:]
    if "[[" in rest or "]]" in rest:
        raise ValueError("unbalanced mention markup")
    tokens.extend(rest.split())
    return tokens, mentions


def _finish(document: Optional[Document], path: str, header_line: int,
            documents: List[Document]) -> None:
    if document is None:
        return
    try:
        document.validate()
    except ValidationError as e:
        raise ParseError(path, header_line, e.message)
    documents.append(document)


def _read_documents(path: PathLike, kind: str, header_required: bool) -> List[Document]:
    documents: List[Document] = []
    seen_ids = set()
    current: Optional[Document] = None
    header_line = 0
    with artifact_reader(path, kind, header_required=header_required) as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            line = line.rstrip("\n")
            if line.startswith(DOC_HEADER_PREFIX):
                _finish(current, str(path), header_line, documents)
                doc_id = line[len(DOC_HEADER_PREFIX):].strip()
                if not doc_id:
                    raise ParseError(str(path), line_number, "document without id")
                if doc_id in seen_ids:
                    raise ParseError(str(path), line_number, f"duplicate document id '{doc_id}'")
                seen_ids.add(doc_id)
                current, header_line = Document(doc_id=doc_id, sentences=[]), line_number
                continue
            if not line.strip():
                _finish(current, str(path), header_line, documents)
                current = None
                continue
            if current is None:
                raise ParseError(str(path), line_number, f"text outside a {DOC_HEADER_PREFIX.strip()} block")
            try:
                tokens, mentions = parse_sentence(line, len(current.sentences))
            except ValueError as e:
                raise ParseError(str(path), line_number, str(e))
            current.sentences.append(tokens)
            current.mentions.extend(mentions)
    _finish(current, str(path), header_line, documents)
    return documents


def parse_corpus(path: PathLike) -> List[Document]:
    """Parse a raw corpus file (header optional).

    Raises:
        ParseError: On broken markup, duplicate document ids or invalid spans
    """
    documents = _read_documents(path, "corpus_input", header_required=False)
    logger.info(
        "corpus_parsed",
        path=str(path),
        documents=len(documents),
        mentions=sum(len(d.mentions) for d in documents),
    )
    return documents


def read_corpus(path: PathLike) -> List[Document]:
    """Read an annotated corpus artifact written by ``write_corpus``."""
    return _read_documents(path, "corpus", header_required=True)


def render_sentence(document: Document, sentence_index: int) -> str:
    """Inverse of ``parse_sentence`` for one sentence of a document."""
    tokens = document.sentences[sentence_index]
    mentions = [m for m in document.mentions if m.sentence_index == sentence_index]
    parts: List[str] = []
    cursor = 0
    for mention in mentions:
        parts.extend(tokens[cursor:mention.start])
        label = mention.gold_entity or NIL_ENTITY
        if mention.source is MentionSource.AUTO:
            label = AUTO_MARKER + label
        parts.append(f"[[{label}|{mention.surface}]]")
        cursor = mention.end
    parts.extend(tokens[cursor:])
    return " ".join(parts)


def write_corpus(documents: Iterable[Document], path: PathLike) -> int:
    """Write documents as a corpus artifact; returns the document count."""
    count = 0
    with artifact_writer(path, "corpus") as handle:
        for document in documents:
            handle.write(f"{DOC_HEADER_PREFIX}{document.doc_id}\n")
            for index in range(len(document.sentences)):
                handle.write(render_sentence(document, index) + "\n")
            handle.write("\n")
            count += 1
    return count
