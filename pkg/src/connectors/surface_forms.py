"""Surface form dataset.

Input rows are ``entity_id \\t surface \\t frequency \\t flags`` where flags is
a concatenation of ``R`` (redirect) and ``D`` (disambiguation), possibly empty.
"""

from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

import structlog

from ..config.constants import SurfaceFlag
from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError, ValidationError
from ..core.models import SurfaceFormRecord

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


class SurfaceFormStore:
    """Multimap between surfaces and entities.

    Duplicate (entity, surface) rows are merged by summing frequencies and
    taking the union of flags. Lookups are exact (case-sensitive).
    """

    def __init__(self, records: Iterable[SurfaceFormRecord] = ()) -> None:
        self._records: Dict[Tuple[str, str], SurfaceFormRecord] = {}
        self._by_surface: Dict[str, List[str]] = {}
        self._by_entity: Dict[str, List[str]] = {}
        for record in records:
            self.add(record)

    def add(self, record: SurfaceFormRecord) -> SurfaceFormRecord:
        """Insert a record, merging with an existing (entity, surface) row."""
        key = (record.entity_id, record.surface)
        existing = self._records.get(key)
        if existing is not None:
            record = SurfaceFormRecord(
                entity_id=record.entity_id,
                surface=record.surface,
                frequency=existing.frequency + record.frequency,
                flags=existing.flags | record.flags,
            )
        else:
            self._by_surface.setdefault(record.surface, []).append(record.entity_id)
            self._by_entity.setdefault(record.entity_id, []).append(record.surface)
        self._records[key] = record
        return record

    def get(self, entity_id: str, surface: str) -> Optional[SurfaceFormRecord]:
        return self._records.get((entity_id, surface))

    def entities_for(self, surface: str) -> List[str]:
        """Entities having exactly this surface."""
        return list(self._by_surface.get(surface, ()))

    def surfaces_for(self, entity_id: str) -> List[str]:
        """Surfaces of an entity in insertion order."""
        return list(self._by_entity.get(entity_id, ()))

    def records_for(self, entity_id: str) -> List[SurfaceFormRecord]:
        return [self._records[(entity_id, s)] for s in self._by_entity.get(entity_id, ())]

    def entity_frequency(self, entity_id: str) -> int:
        """Total count of an entity over all its surfaces."""
        return sum(r.frequency for r in self.records_for(entity_id))

    def surfaces(self) -> List[str]:
        """Distinct surfaces in insertion order."""
        return list(self._by_surface)

    def entity_ids(self) -> List[str]:
        return list(self._by_entity)

    def __iter__(self) -> Iterator[SurfaceFormRecord]:
        return iter(self._records.values())

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, surface: object) -> bool:
        return surface in self._by_surface


def parse_flags(cell: str) -> FrozenSet[SurfaceFlag]:
    """``"RD"`` → {REDIRECT, DISAMBIGUATION}; unknown letters raise ValueError."""
    return frozenset(SurfaceFlag(ch) for ch in cell.strip())


def format_flags(flags: FrozenSet[SurfaceFlag]) -> str:
    return "".join(flag.value for flag in SurfaceFlag if flag in flags)


def _read_records(path: PathLike, kind: str, header_required: bool) -> SurfaceFormStore:
    store = SurfaceFormStore()
    with artifact_reader(path, kind, header_required=header_required) as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) == 3:
                columns.append("")
            if len(columns) != 4 or not columns[0] or not columns[1]:
                raise ParseError(str(path), line_number, "expected 4 tab-separated columns")
            try:
                frequency = int(columns[2])
                flags = parse_flags(columns[3])
                store.add(SurfaceFormRecord(columns[0], columns[1], frequency, flags))
            except ValidationError as e:
                raise ParseError(str(path), line_number, e.message)
            except ValueError as e:
                raise ParseError(str(path), line_number, f"bad frequency or flags: {e}")
    return store


def parse_surface_forms(path: PathLike) -> SurfaceFormStore:
    """Parse the surface form input file.

    Raises:
        ParseError: On a malformed row or a frequency ≤ 0
    """
    store = _read_records(path, "surface_forms_input", header_required=False)
    logger.info("surface_forms_parsed", path=str(path), records=len(store),
                surfaces=len(store.surfaces()))
    return store


def write_surface_forms(store: SurfaceFormStore, path: PathLike) -> None:
    with artifact_writer(path, "surface_forms", records=len(store)) as handle:
        for record in store:
            handle.write(
                f"{record.entity_id}\t{record.surface}\t{record.frequency}\t{format_flags(record.flags)}\n"
            )


def read_surface_forms(path: PathLike) -> SurfaceFormStore:
    """Read the merged store written by ``write_surface_forms``."""
    return _read_records(path, "surface_forms", header_required=True)
