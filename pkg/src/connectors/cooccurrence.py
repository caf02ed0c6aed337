"""Entity cooccurrence table (``entity_id \\t neighbor_id \\t count``)."""

from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError

PathLike = Union[str, Path]


class CooccurrenceTable:
    """Directed neighbor counts; ``top`` orders by count desc then id."""

    def __init__(self) -> None:
        self._counts: Dict[str, Dict[str, int]] = {}

    def add(self, entity_id: str, neighbor_id: str, count: int = 1) -> None:
        row = self._counts.setdefault(entity_id, {})
        row[neighbor_id] = row.get(neighbor_id, 0) + count

    def count(self, entity_id: str, neighbor_id: str) -> int:
        return self._counts.get(entity_id, {}).get(neighbor_id, 0)

    def neighbors(self, entity_id: str) -> Dict[str, int]:
        return dict(self._counts.get(entity_id, {}))

    def top(self, entity_id: str, limit: int) -> List[str]:
        """The ``limit`` most frequent neighbors of an entity."""
        if limit <= 0:
            return []
        row = self._counts.get(entity_id, {})
        ranked = sorted(row.items(), key=lambda item: (-item[1], item[0]))
        return [neighbor for neighbor, _ in ranked[:limit]]

    def rows(self) -> Iterator[Tuple[str, str, int]]:
        """All rows sorted by entity then neighbor."""
        for entity_id in sorted(self._counts):
            for neighbor_id, count in sorted(self._counts[entity_id].items()):
                yield entity_id, neighbor_id, count

    def __len__(self) -> int:
        return sum(len(row) for row in self._counts.values())

    def __contains__(self, entity_id: object) -> bool:
        return entity_id in self._counts


def write_cooccurrence(table: CooccurrenceTable, path: PathLike) -> None:
    with artifact_writer(path, "cooccurrence", rows=len(table)) as handle:
        for entity_id, neighbor_id, count in table.rows():
            handle.write(f"{entity_id}\t{neighbor_id}\t{count}\n")


def read_cooccurrence(path: PathLike, header_required: bool = False) -> CooccurrenceTable:
    """Read a cooccurrence file; externally mined files may omit the header."""
    table = CooccurrenceTable()
    with artifact_reader(path, "cooccurrence", header_required=header_required) as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 3:
                raise ParseError(str(path), line_number, "expected 3 tab-separated columns")
            try:
                count = int(columns[2])
            except ValueError:
                raise ParseError(str(path), line_number, f"count is not an integer: '{columns[2]}'")
            if count < 1:
                raise ParseError(str(path), line_number, f"count must be positive: {count}")
            table.add(columns[0], columns[1], count)
    return table
