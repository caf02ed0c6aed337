"""Tests for the file connectors and artifact headers."""

import pytest

from src.config import CoarseType, MentionSource
from src.connectors.corpus import parse_corpus, read_corpus, write_corpus
from src.connectors.kb import parse_kb, parse_type_mapping, read_kb, write_kb
from src.connectors.ranking_files import (
    read_candidates,
    read_predictions,
    read_typing_predictions,
    write_predictions,
)
from src.core.artifacts import format_header
from src.core.exceptions import ArtifactVersionError, MissingArtifactError, ParseError
from src.core.models import KnowledgeBase, Prediction


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_corpus_reads_markup(tmp_path):
    source = write(tmp_path / "raw.txt", (
        "#DOC d1\n"
        "[[Barack_Obama|Barack Obama]] visited [[Ankara|Ankara]] .\n"
        "Later [[auto:Barack_Obama|Obama]] met [[NIL|Bob]] .\n"
        "\n"
    ))
    [document] = parse_corpus(source)
    assert document.doc_id == "d1"
    assert document.sentences[0] == ["Barack", "Obama", "visited", "Ankara", "."]
    first, _, auto, nil = document.mentions
    assert (first.start, first.end, first.surface) == (0, 2, "Barack Obama")
    assert auto.source is MentionSource.AUTO and auto.gold_entity == "Barack_Obama"
    assert nil.gold_entity is None


def test_written_corpus_reads_back(tmp_path, mini_corpus):
    path = tmp_path / "corpus.txt"
    assert write_corpus(mini_corpus, path) == 3
    assert path.read_text(encoding="utf-8").startswith(format_header("corpus"))
    documents = read_corpus(path)
    assert [d.doc_id for d in documents] == ["d1", "d2", "d3"]
    assert [m.gold_entity for m in documents[0].mentions] == [m.gold_entity for m in mini_corpus[0].mentions]


def test_broken_markup_names_the_line(tmp_path):
    source = write(tmp_path / "raw.txt", "#DOC d1\nfine line .\n[[Paris|Paris] broken\n")
    with pytest.raises(ParseError) as info:
        parse_corpus(source)
    assert info.value.line_number == 3


def test_duplicate_document_ids_fail(tmp_path):
    source = write(tmp_path / "raw.txt", "#DOC d1\na .\n\n#DOC d1\nb .\n")
    with pytest.raises(ParseError):
        parse_corpus(source)


def test_artifact_readers_require_the_header(tmp_path):
    source = write(tmp_path / "raw.txt", "#DOC d1\na .\n")
    with pytest.raises(ArtifactVersionError):
        read_corpus(source)
    wrong = write(tmp_path / "wrong.txt", format_header("kb") + "\n")
    with pytest.raises(ArtifactVersionError):
        read_corpus(wrong)
    future = write(tmp_path / "future.txt", "#ned-artifact v99 kind=corpus\n")
    with pytest.raises(ArtifactVersionError):
        read_corpus(future)


def test_missing_artifact_names_its_producer(tmp_path):
    with pytest.raises(MissingArtifactError) as info:
        read_candidates(tmp_path / "nope.tsv")
    assert info.value.producer == "candgen"
    assert "candgen" in str(info.value)


def test_parse_kb_replaces_wikicats_and_resolves_types(tmp_path):
    mapping = write(tmp_path / "types.tsv", "wordnet_person_100007846\tPerson\nwordnet_club_108227214\tSportsTeam\n")
    kb_file = write(tmp_path / "kb.tsv", (
        "Paris_Hilton\twikicat_Socialites\t40\twikicat_Socialites=wordnet_person_100007846\n"
        "PSG\twordnet_person_100007846,wordnet_club_108227214\t60\n"
        "Thing\twikicat_Unmapped\t1\n"
    ))
    hilton, psg, thing = parse_kb(kb_file, parse_type_mapping(mapping))
    assert hilton.synsets == ("wordnet_person_100007846",)
    assert hilton.coarse_type is CoarseType.PERSON
    # sports team outranks person
    assert psg.coarse_type is CoarseType.SPORTS_TEAM
    assert thing.synsets == () and thing.coarse_type is CoarseType.MISC

    path = tmp_path / "kb.artifact"
    write_kb(KnowledgeBase([hilton, psg, thing]), path)
    assert read_kb(path)["PSG"].frequency == 60


def test_parse_kb_rejects_duplicates(tmp_path):
    kb_file = write(tmp_path / "kb.tsv", "A\ts\t1\nA\ts\t2\n")
    with pytest.raises(ParseError) as info:
        parse_kb(kb_file)
    assert info.value.line_number == 2


def test_predictions_keep_abstentions(tmp_path):
    path = tmp_path / "predictions.tsv"
    write_predictions([Prediction("d", 0, "A", 0.5), Prediction("d", 1, None, 0.01)], path)
    assert [(p.entity_id, p.score) for p in read_predictions(path)] == [("A", 0.5), (None, 0.01)]


def test_typing_predictions_reject_bad_keys(tmp_path):
    path = write(tmp_path / "typing.tsv", format_header("typing_predictions", flavor="Word") + "\nnokey\t0.5\t0.5\n")
    with pytest.raises(ParseError):
        read_typing_predictions(path)
