"""Versioned artifact headers.

Every file written by a subcommand starts with one header line::

    #ned-artifact v1 kind=<kind> [key=value ...]

Readers check the kind and version before parsing the body. Input files in
the ingestion formats (KB, type mapping, surface forms, corpus) may omit the
header.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import IO, Dict, Iterator, Optional, Tuple, Union

import structlog

from ..config.constants import ARTIFACT_MAGIC, ARTIFACT_PRODUCERS, ARTIFACT_VERSION
from .exceptions import ArtifactVersionError, MissingArtifactError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def format_header(kind: str, **meta: object) -> str:
    """Render the header line (without trailing newline)."""
    parts = [ARTIFACT_MAGIC, f"v{ARTIFACT_VERSION}", f"kind={kind}"]
    parts.extend(f"{key}={value}" for key, value in sorted(meta.items()))
    return " ".join(parts)


def parse_header(line: str, kind: str, path: str) -> Dict[str, str]:
    """Validate a header line and return its key=value metadata.

    Raises:
        ArtifactVersionError: On missing magic, wrong version or wrong kind
    """
    parts = line.rstrip("\n").split(" ")
    if len(parts) < 3 or parts[0] != ARTIFACT_MAGIC:
        raise ArtifactVersionError(f"{path}: missing artifact header", path=path)
    if parts[1] != f"v{ARTIFACT_VERSION}":
        raise ArtifactVersionError(
            f"{path}: artifact version {parts[1]} not supported (expected v{ARTIFACT_VERSION})",
            path=path,
        )
    meta = dict(part.split("=", 1) for part in parts[2:] if "=" in part)
    if meta.get("kind") != kind:
        raise ArtifactVersionError(
            f"{path}: expected a '{kind}' artifact, found '{meta.get('kind')}'",
            path=path,
        )
    return meta


def require_artifact(path: PathLike, kind: str) -> Path:
    """Return ``path`` if it exists, else name the subcommand producing it.

    Raises:
        MissingArtifactError: If the file does not exist
    """
    resolved = Path(path)
    if not resolved.exists():
        raise MissingArtifactError(str(resolved), producer=ARTIFACT_PRODUCERS.get(kind))
    return resolved


@contextmanager
def artifact_writer(path: PathLike, kind: str, **meta: object) -> Iterator[IO[str]]:
    """Open ``path`` for writing with the header already in place."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_header(kind, **meta) + "\n")
        yield handle
    logger.debug("artifact_written", path=str(target), kind=kind)


@contextmanager
def artifact_reader(
    path: PathLike,
    kind: str,
    header_required: bool = True,
) -> Iterator[Tuple[IO[str], Dict[str, str], int]]:
    """Open an artifact, validate its header and yield the positioned handle.

    Yields:
        (handle, header metadata, number of lines consumed by the header)
    """
    source = require_artifact(path, kind)
    with open(source, encoding="utf-8", newline="\n") as handle:
        first = handle.readline()
        if first.startswith(ARTIFACT_MAGIC):
            yield handle, parse_header(first, kind, str(source)), 1
        elif header_required:
            raise ArtifactVersionError(f"{source}: missing artifact header", path=str(source))
        else:
            handle.seek(0)
            yield handle, {}, 0


def write_binary_artifact(path: PathLike, kind: str, payload: bytes, **meta: object) -> None:
    """Write a header line followed by an opaque binary payload."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "wb") as handle:
        handle.write((format_header(kind, **meta) + "\n").encode("utf-8"))
        handle.write(payload)


def read_binary_artifact(path: PathLike, kind: str) -> Tuple[Dict[str, str], bytes]:
    """Inverse of ``write_binary_artifact``."""
    source = require_artifact(path, kind)
    with open(source, "rb") as handle:
        first = handle.readline().decode("utf-8", errors="replace")
        meta = parse_header(first, kind, str(source))
        return meta, handle.read()


def optional_path(value: Optional[PathLike]) -> Optional[Path]:
    return Path(value) if value else None
