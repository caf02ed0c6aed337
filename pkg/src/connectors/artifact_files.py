"""Readers and writers for the intermediate pipeline artifacts.

Embedding tables, clusterings, token streams, training pairs and typing
datasets. Every writer emits the versioned artifact header first.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from ..config.constants import ClusterFlavor, ContextFormat
from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError, ValidationError
from ..core.models import Clustering, ContextWindow, EmbeddingTable, TypingInstance

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

UNLABELED = "-"
FIELD_SEPARATOR = "|"
# Stand-in for a literal "|" token inside typing dataset fields
ESCAPED_SEPARATOR = "¦"


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

def write_embeddings(table: EmbeddingTable, path: PathLike) -> None:
    """Write ``vocab dim`` then one ``token v1 ... vdim`` row per token (6 decimals)."""
    meta = {key: value for key, value in table.metadata.items() if " " not in str(value)}
    with artifact_writer(path, "embeddings", **meta) as handle:
        handle.write(f"{len(table)} {table.dim}\n")
        for token, row in zip(table.tokens, table.vectors):
            handle.write(token + " " + " ".join(f"{value:.6f}" for value in row) + "\n")
    logger.info("embeddings_written", path=str(path), vocab=len(table), dim=table.dim)


def read_embeddings(path: PathLike) -> EmbeddingTable:
    """Inverse of ``write_embeddings``.

    Raises:
        ParseError: On a size line mismatch or a row of the wrong width
    """
    with artifact_reader(path, "embeddings") as (handle, meta, offset):
        size_line = handle.readline().split()
        if len(size_line) != 2:
            raise ParseError(str(path), 1 + offset, "expected 'vocab_size dim'")
        vocab_size, dim = int(size_line[0]), int(size_line[1])
        tokens: List[str] = []
        rows = np.zeros((vocab_size, dim), dtype=np.float64)
        for line_number, line in enumerate(handle, start=2 + offset):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ParseError(str(path), line_number, f"expected token and {dim} values")
            if len(tokens) >= vocab_size:
                raise ParseError(str(path), line_number, "more rows than declared")
            rows[len(tokens)] = [float(value) for value in parts[1:]]
            tokens.append(parts[0])
    if len(tokens) != vocab_size:
        raise ParseError(str(path), 1 + offset, f"declared {vocab_size} rows, found {len(tokens)}")
    meta.pop("kind", None)
    return EmbeddingTable(tokens, rows, meta)


# ---------------------------------------------------------------------------
# Clusterings
# ---------------------------------------------------------------------------

def write_clustering(clustering: Clustering, path: PathLike) -> None:
    """Write ``#flavor k`` then ``token \\t cluster_id`` rows sorted by token."""
    with artifact_writer(path, "clustering", flavor=clustering.flavor.value, k=clustering.k) as handle:
        handle.write(f"#{clustering.flavor.value} {clustering.k}\n")
        for token in sorted(clustering.assignment):
            handle.write(f"{token}\t{clustering.assignment[token]}\n")


def read_clustering(path: PathLike) -> Clustering:
    with artifact_reader(path, "clustering") as (handle, _, offset):
        first = handle.readline().rstrip("\n")
        parts = first.lstrip("#").split(" ")
        if not first.startswith("#") or len(parts) != 2:
            raise ParseError(str(path), 1 + offset, "expected '#flavor k'")
        try:
            flavor, k = ClusterFlavor(parts[0]), int(parts[1])
        except ValueError as e:
            raise ParseError(str(path), 1 + offset, str(e))
        assignment: Dict[str, int] = {}
        for line_number, line in enumerate(handle, start=2 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) != 2 or not columns[1].lstrip("-").isdigit():
                raise ParseError(str(path), line_number, "expected 'token \\t cluster_id'")
            assignment[columns[0]] = int(columns[1])
    try:
        return Clustering(flavor=flavor, k=k, assignment=assignment)
    except ValidationError as e:
        raise ParseError(str(path), 1 + offset, e.message)


# ---------------------------------------------------------------------------
# Streams and pairs
# ---------------------------------------------------------------------------

def write_stream(stream: Iterable[Sequence[str]], path: PathLike, **meta: object) -> int:
    """One document per line, space-separated tokens; returns the line count."""
    count = 0
    with artifact_writer(path, "stream", **meta) as handle:
        for tokens in stream:
            handle.write(" ".join(tokens) + "\n")
            count += 1
    return count


def read_stream(path: PathLike) -> List[List[str]]:
    with artifact_reader(path, "stream") as (handle, _, _offset):
        return [line.split() for line in handle]


def write_pairs(pairs: Iterable[Tuple[str, str]], path: PathLike, **meta: object) -> int:
    """``target \\t context`` per line; returns the pair count."""
    count = 0
    with artifact_writer(path, "pairs", **meta) as handle:
        for target, context in pairs:
            handle.write(f"{target}\t{context}\n")
            count += 1
    return count


def read_pairs(path: PathLike) -> List[Tuple[str, str]]:
    pairs: List[Tuple[str, str]] = []
    with artifact_reader(path, "pairs") as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) != 2 or not columns[0] or not columns[1]:
                raise ParseError(str(path), line_number, "expected 'target \\t context'")
            pairs.append((columns[0], columns[1]))
    return pairs


# ---------------------------------------------------------------------------
# Typing datasets
# ---------------------------------------------------------------------------

def _join_field(tokens: Sequence[str]) -> str:
    return " ".join(token.replace(FIELD_SEPARATOR, ESCAPED_SEPARATOR) for token in tokens)


def format_typing_row(instance: TypingInstance) -> str:
    label = UNLABELED if instance.label is None else str(instance.label)
    window = instance.context
    body = FIELD_SEPARATOR.join(
        _join_field(part) for part in (window.left, window.surface, window.right)
    )
    row = f"{label}\t{instance.entity_id}\t{body}"
    if instance.mention_key:
        row += f"\t{instance.mention_key}"
    return row


def write_typing_dataset(
    instances: Iterable[TypingInstance],
    path: PathLike,
    flavor: ClusterFlavor,
    context_format: ContextFormat,
) -> int:
    """Write ``label \\t entity_id \\t left|surface|right [\\t mention_key]`` rows."""
    count = 0
    with artifact_writer(path, "typing_dataset", flavor=flavor.value,
                         format=context_format.value) as handle:
        for instance in instances:
            handle.write(format_typing_row(instance) + "\n")
            count += 1
    return count


def read_typing_dataset(
    path: PathLike,
) -> Tuple[List[TypingInstance], ClusterFlavor, ContextFormat]:
    """Inverse of ``write_typing_dataset``.

    Returns:
        (instances, flavor, context format) taken from the header
    """
    instances: List[TypingInstance] = []
    with artifact_reader(path, "typing_dataset") as (handle, meta, offset):
        try:
            flavor = ClusterFlavor(meta.get("flavor", ""))
            context_format = ContextFormat(meta.get("format", ""))
        except ValueError as e:
            raise ParseError(str(path), offset, f"bad typing dataset header: {e}")
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) not in (3, 4):
                raise ParseError(str(path), line_number, "expected 3 or 4 tab-separated columns")
            fields = columns[2].split(FIELD_SEPARATOR)
            if len(fields) != 3:
                raise ParseError(str(path), line_number, "expected 'left|surface|right'")
            label: Optional[int] = None
            if columns[0] != UNLABELED:
                if not columns[0].isdigit():
                    raise ParseError(str(path), line_number, f"bad label '{columns[0]}'")
                label = int(columns[0])
            left, surface, right = (tuple(field.split()) for field in fields)
            instances.append(
                TypingInstance(
                    context=ContextWindow(left, surface, right, context_format),
                    label=label,
                    entity_id=columns[1],
                    mention_key=columns[3] if len(columns) == 4 else "",
                )
            )
    return instances, flavor, context_format


def pairs_source(path: PathLike) -> str:
    """The ``source`` recorded in a pairs header ('' when absent)."""
    with artifact_reader(path, "pairs") as (_handle, meta, _offset):
        return meta.get("source", "")
