"""Knowledge base and type mapping files.

KB input lines are ``entity_id \\t synset1,synset2,... \\t frequency`` with an
optional fourth column of ``wikicat_label=hypernym`` pairs separated by
semicolons. The type mapping is ``synset_or_type \\t coarse type``.
"""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import structlog

from ..config.constants import COARSE_TYPE_PRIORITY, WIKICAT_PREFIX, CoarseType
from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError, ValidationError
from ..core.models import Entity, KnowledgeBase

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

_MAPPABLE_TYPES = {t.value: t for t in CoarseType if t is not CoarseType.MISC}


def parse_type_mapping(path: PathLike) -> Dict[str, CoarseType]:
    """Read the synset to coarse type mapping.

    Args:
        path: TSV file ``synset_or_type \\t {Person|Organization|Location|SportsTeam}``

    Returns:
        Mapping from synset label to coarse type

    Raises:
        ParseError: On a malformed line or an unknown type name
    """
    mapping: Dict[str, CoarseType] = {}
    with artifact_reader(path, "type_mapping", header_required=False) as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 2 or not columns[0]:
                raise ParseError(str(path), line_number, "expected 2 tab-separated columns")
            coarse = _MAPPABLE_TYPES.get(columns[1].strip())
            if coarse is None:
                raise ParseError(str(path), line_number, f"unknown coarse type '{columns[1]}'")
            mapping[columns[0].strip()] = coarse
    logger.info("type_mapping_loaded", path=str(path), entries=len(mapping))
    return mapping


def _parse_hypernyms(cell: str, path: str, line_number: int) -> Dict[str, str]:
    hypernyms: Dict[str, str] = {}
    for pair in filter(None, (part.strip() for part in cell.split(";"))):
        label, sep, hypernym = pair.partition("=")
        if not sep or not label or not hypernym:
            raise ParseError(path, line_number, f"malformed hypernym pair '{pair}'")
        hypernyms[label] = hypernym
    return hypernyms


def replace_wikicat(synsets: Sequence[str], hypernyms: Mapping[str, str]) -> Tuple[str, ...]:
    """Replace ``wikicat_`` synsets by their hypernym, dropping unmapped ones.

    Order is kept and duplicates created by the replacement are removed.
    """
    retained: List[str] = []
    for synset in synsets:
        if synset.startswith(WIKICAT_PREFIX):
            synset = hypernyms.get(synset, "")
        if synset and synset not in retained:
            retained.append(synset)
    return tuple(retained)


def resolve_coarse_type(synsets: Sequence[str], type_mapping: Mapping[str, CoarseType]) -> CoarseType:
    """Coarse type of an entity; unknown synsets are ignored and Misc is the default."""
    found = {type_mapping[s] for s in synsets if s in type_mapping}
    for coarse in COARSE_TYPE_PRIORITY:
        if coarse in found:
            return coarse
    return CoarseType.MISC


def parse_kb(
    path: PathLike,
    type_mapping: Optional[Mapping[str, CoarseType]] = None,
) -> List[Entity]:
    """Parse the KB input file.

    Args:
        path: KB TSV file
        type_mapping: Synset to coarse type mapping (empty → every entity is Misc)

    Returns:
        One Entity per non-blank line, in file order

    Raises:
        ParseError: On a malformed line or a duplicate id, naming the line
    """
    type_mapping = type_mapping or {}
    entities: List[Entity] = []
    seen: Dict[str, int] = {}
    with artifact_reader(path, "kb_input", header_required=False) as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) not in (3, 4) or not columns[0]:
                raise ParseError(str(path), line_number, "expected 3 or 4 tab-separated columns")
            entity_id = columns[0]
            if entity_id in seen:
                raise ParseError(
                    str(path), line_number,
                    f"duplicate entity id '{entity_id}' (first seen at line {seen[entity_id]})",
                )
            try:
                frequency = int(columns[2])
            except ValueError:
                raise ParseError(str(path), line_number, f"frequency is not an integer: '{columns[2]}'")
            if frequency < 0:
                raise ParseError(str(path), line_number, f"negative frequency {frequency}")
            hypernyms = _parse_hypernyms(columns[3], str(path), line_number) if len(columns) == 4 else {}
            raw_synsets = [s.strip() for s in columns[1].split(",") if s.strip()]
            synsets = replace_wikicat(raw_synsets, hypernyms)
            entities.append(
                Entity(
                    id=entity_id,
                    synsets=synsets,
                    coarse_type=resolve_coarse_type(synsets, type_mapping),
                    frequency=frequency,
                )
            )
            seen[entity_id] = line_number
    logger.info("kb_parsed", path=str(path), entities=len(entities))
    return entities


def write_kb(kb: KnowledgeBase, path: PathLike) -> None:
    """Write the ingested KB artifact (synsets already resolved)."""
    with artifact_writer(path, "kb", entities=len(kb)) as handle:
        for entity in kb:
            handle.write(
                f"{entity.id}\t{','.join(entity.synsets)}\t{entity.frequency}\t{entity.coarse_type.value}\n"
            )


def read_kb(path: PathLike) -> KnowledgeBase:
    """Read the ingested KB artifact written by ``write_kb``."""
    kb = KnowledgeBase()
    with artifact_reader(path, "kb") as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) != 4:
                raise ParseError(str(path), line_number, "expected 4 tab-separated columns")
            try:
                kb.add(
                    Entity(
                        id=columns[0],
                        synsets=tuple(s for s in columns[1].split(",") if s),
                        frequency=int(columns[2]),
                        coarse_type=CoarseType(columns[3]),
                    )
                )
            except (ValueError, ValidationError) as e:
                raise ParseError(str(path), line_number, str(e))
    return kb


def load_lexicon(path: Optional[PathLike]) -> frozenset:
    """One name per line; a missing path gives an empty lexicon."""
    if not path:
        return frozenset()
    with artifact_reader(path, "lexicon", header_required=False) as (handle, _, _offset):
        return frozenset(line.strip() for line in handle if line.strip())
