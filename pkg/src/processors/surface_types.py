"""Entity types and surface form types as binary feature blocks."""

from typing import AbstractSet, FrozenSet, List

import numpy as np

from ..config.constants import CoarseType, SurfaceFlag, SurfaceFormType
from ..core.models import Entity
from .annotation import derive_main_title

ENTITY_TYPE_ORDER: List[CoarseType] = list(CoarseType)
SURFACE_TYPE_ORDER: List[SurfaceFormType] = list(SurfaceFormType)


def entity_type_binary(entity: Entity) -> np.ndarray:
    """One-hot over [Person, Organization, Location, SportsTeam, Misc]."""
    vector = np.zeros(len(ENTITY_TYPE_ORDER))
    vector[ENTITY_TYPE_ORDER.index(entity.coarse_type)] = 1.0
    return vector


def _initials(words: List[str]) -> str:
    return "".join(word[0] for word in words if word).upper()


def surface_form_types(
    best_sf: str,
    entity: Entity,
    flags: AbstractSet[SurfaceFlag] = frozenset(),
    first_names: AbstractSet[str] = frozenset(),
    surnames: AbstractSet[str] = frozenset(),
) -> FrozenSet[SurfaceFormType]:
    """Types of a surface form relative to the entity's main title.

    Examples:
        >>> from src.core.models import Entity
        >>> sorted(t.value for t in surface_form_types("ABC", Entity("American_Broadcasting_Company")))
        ['OrgAcronym']
    """
    title = derive_main_title(entity.id)
    words = title.split()
    sf_words = best_sf.split()
    types = set()

    if best_sf == title:
        types.add(SurfaceFormType.WIKI_ID)
    if SurfaceFlag.REDIRECT in flags:
        types.add(SurfaceFormType.REDIRECT)
    if SurfaceFlag.DISAMBIGUATION in flags:
        types.add(SurfaceFormType.DISAMBIGUATION)
    if entity.coarse_type is CoarseType.PERSON:
        if best_sf in first_names:
            types.add(SurfaceFormType.FIRST_NAME)
        if best_sf in surnames:
            types.add(SurfaceFormType.SURNAME)
    if len(words) > 1:
        if best_sf == words[0]:
            types.add(SurfaceFormType.FIRST_WORD)
        if best_sf == words[-1]:
            types.add(SurfaceFormType.LAST_WORD)
        if 1 < len(sf_words) < len(words):
            if sf_words == words[:len(sf_words)]:
                types.add(SurfaceFormType.PREFIX_PHRASE)
            if sf_words == words[-len(sf_words):]:
                types.add(SurfaceFormType.SUFFIX_PHRASE)
        compact = best_sf.replace(".", "")
        if compact.isupper() and compact == _initials(words):
            types.add(SurfaceFormType.ORG_ACRONYM)
    if "," in title:
        before = title.split(",", 1)[0].strip()
        if before and best_sf == before:
            types.add(SurfaceFormType.BEFORE_COMMA)
    return frozenset(types)


def surface_type_binary(types: AbstractSet[SurfaceFormType]) -> np.ndarray:
    """Multi-hot over the eleven surface form types."""
    return np.array([1.0 if t in types else 0.0 for t in SURFACE_TYPE_ORDER])
