"""Shared fixtures: a tiny KB, surface form store and three-document corpus."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.config import CoarseType, Settings, SurfaceFlag
from src.connectors.surface_forms import SurfaceFormStore
from src.core.models import Document, Entity, KnowledgeBase, Mention, SurfaceFormRecord


def make_mention(tokens, sentence_index, start, end, gold):
    return Mention(sentence_index, start, end, " ".join(tokens[start:end]), gold)


@pytest.fixture
def settings() -> Settings:
    return Settings()


@pytest.fixture
def mini_kb() -> KnowledgeBase:
    return KnowledgeBase([
        Entity("Paris", ("wordnet_city_108524735",), CoarseType.LOCATION, 120),
        Entity("Paris_Hilton", ("wordnet_person_100007846",), CoarseType.PERSON, 40),
        Entity("Paris_Saint-Germain_F.C.", ("wordnet_club_108227214",), CoarseType.SPORTS_TEAM, 60),
        Entity("France", ("wordnet_country_108544813",), CoarseType.LOCATION, 200),
        Entity("Hilton_Hotels", ("wordnet_company_108058098",), CoarseType.ORGANIZATION, 30),
    ])


@pytest.fixture
def mini_store() -> SurfaceFormStore:
    rows = [
        ("Paris", "Paris", 100, frozenset()),
        ("Paris_Hilton", "Paris", 10, frozenset({SurfaceFlag.DISAMBIGUATION})),
        ("Paris_Hilton", "Paris Hilton", 30, frozenset()),
        ("Paris_Saint-Germain_F.C.", "Paris", 5, frozenset()),
        ("Paris_Saint-Germain_F.C.", "PSG", 40, frozenset({SurfaceFlag.REDIRECT})),
        ("Paris_Saint-Germain_F.C.", "Paris Saint-Germain", 15, frozenset()),
        ("France", "France", 180, frozenset()),
        ("Hilton_Hotels", "Hilton", 20, frozenset()),
    ]
    return SurfaceFormStore(SurfaceFormRecord(e, s, f, flags) for e, s, f, flags in rows)


@pytest.fixture
def mini_corpus() -> list:
    s1 = "PSG won again in Paris , France".split()
    s2 = "Paris Hilton stayed at a Hilton".split()
    d1 = Document("d1", [s1, s2], [
        make_mention(s1, 0, 0, 1, "Paris_Saint-Germain_F.C."),
        make_mention(s1, 0, 4, 5, "Paris"),
        make_mention(s1, 0, 6, 7, "France"),
        make_mention(s2, 1, 0, 2, "Paris_Hilton"),
        make_mention(s2, 1, 5, 6, None),
    ])
    s3 = "Paris beat Lyon".split()
    d2 = Document("d2", [s3], [make_mention(s3, 0, 0, 1, "Paris_Saint-Germain_F.C.")])
    s4 = "France and Paris Hilton".split()
    d3 = Document("d3", [s4], [
        make_mention(s4, 0, 0, 1, "France"),
        make_mention(s4, 0, 2, 4, "Paris_Hilton"),
    ])
    for document in (d1, d2, d3):
        document.validate()
    return [d1, d2, d3]
