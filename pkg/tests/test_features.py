"""Tests for ranking feature extraction."""

import math

import numpy as np
import pytest

from src.config import ClusterFlavor, SurfaceFormType
from src.config.settings import FeatureSettings
from src.core.exceptions import ContractError, ValidationError
from src.core.models import CandidateMatch, CandidateScores, EmbeddingTable, Mention, MentionCandidates
from src.processors.features import FeatureExtractor, feature_layout, max_diff
from src.processors.two_stage import build_score_table

WORD = ClusterFlavor.WORD
ENTITY = ClusterFlavor.ENTITY
WIKI = frozenset({SurfaceFormType.WIKI_ID})


def test_max_diff_values():
    assert max_diff([10.0, 7.0, 3.0], ["a", "b", "c"]).tolist() == [3.0, 3.0, 7.0]
    # tie on the max goes to the smaller entity id
    assert max_diff([5.0, 5.0, 1.0], ["b", "a", "c"]).tolist() == [0.0, 0.0, 4.0]
    assert max_diff([7.0], ["a"]).tolist() == [0.0]
    assert max_diff([], []).tolist() == []


def test_layout_sizes_and_stage_prefix():
    first = feature_layout(1, [WORD])
    second = feature_layout(2, [WORD])
    assert len(first) == 2 + len(SurfaceFormType) + 5 + 3 + 3
    assert second[:len(first)] == first
    assert second[len(first):] == [
        "typing_prob_entity", "max_diff_typing_prob_entity", "max_typing_prob_in_doc_entity",
        "max_ranking_score", "max_cos_sim_in_context",
    ]
    assert "doc_similarity" in feature_layout(1, [WORD], raw_doc_similarity=True)
    assert len(feature_layout(1)) == len(first) + 3 * 3
    with pytest.raises(ValidationError):
        feature_layout(3)


def document_mentions():
    mentions = [
        Mention(0, 0, 1, "Paris", "Paris"),
        Mention(0, 2, 3, "France", "France"),
        Mention(0, 4, 5, "Paris", "Paris"),
    ]
    return [
        MentionCandidates("d", 0, mentions[0], [
            CandidateMatch("Paris", "Paris", 0, WIKI),
            CandidateMatch("Paris_Hilton", "Paris", 0, frozenset({SurfaceFormType.DISAMBIGUATION})),
        ]),
        MentionCandidates("d", 1, mentions[1], [CandidateMatch("France", "France", 0, WIKI)]),
        MentionCandidates("d", 2, mentions[2], [CandidateMatch("Paris", "Paris", 0, WIKI)]),
    ]


def stage_scores(with_entity: bool = False):
    def scores(word, entity, rank):
        probs = {WORD: word}
        if with_entity:
            probs[ENTITY] = entity
        return CandidateScores(typing_probs=probs, rank_prob=rank if with_entity else None)

    return {
        "d::0": {"Paris": scores(0.7, 0.5, 0.8), "Paris_Hilton": scores(0.2, 0.9, 0.2)},
        "d::1": {"France": scores(0.9, 0.4, 0.6)},
        "d::2": {"Paris": scores(0.4, 0.7, 0.3)},
    }


def by_pair(df):
    return {(int(row.mention_index), row.entity_id): row for row in df.itertuples(index=False)}


def test_stage_one_hand_values(mini_kb, mini_store):
    extractor = FeatureExtractor(mini_kb, mini_store, stage=1, flavors=[WORD])
    df = extractor.extract([document_mentions()], stage_scores())
    assert list(df.columns[3:-1]) == extractor.layout
    rows = by_pair(df)
    paris, hilton, france, paris_again = rows[(0, "Paris")], rows[(0, "Paris_Hilton")], rows[(1, "France")], rows[(2, "Paris")]

    assert paris.entity_log_freq == pytest.approx(math.log(120))
    assert paris.sf_type_WikiID == 1.0 and hilton.sf_type_WikiID == 0.0
    assert hilton.sf_type_Disambiguation == 1.0
    assert paris.entity_type_Location == 1.0 and hilton.entity_type_Person == 1.0
    assert paris.typing_prob_word == pytest.approx(0.7)
    assert paris.max_diff_typing_prob_word == pytest.approx(0.5)
    assert hilton.max_diff_typing_prob_word == pytest.approx(0.5)
    assert france.max_diff_typing_prob_word == 0.0
    assert paris.max_diff_sf_log_freq == pytest.approx(math.log(10))
    assert paris.avg_sf_edit_distance == 0.0
    # the same entity elsewhere in the document
    assert paris_again.max_typing_prob_in_doc_word == pytest.approx(0.7)
    assert paris.label == 1 and hilton.label == 0 and france.label == 1


def test_stage_two_hand_values(mini_kb, mini_store):
    table = EmbeddingTable(["Paris", "France", "Paris_Hilton"], np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    extractor = FeatureExtractor(mini_kb, mini_store, stage=2, flavors=[WORD], entity_table=table)
    rows = by_pair(extractor.extract([document_mentions()], stage_scores(with_entity=True)))

    # an earlier mention of the entity wins
    assert rows[(2, "Paris")].max_ranking_score == pytest.approx(0.8)
    # otherwise a later mention with the entity under its own name
    assert rows[(0, "Paris")].max_ranking_score == pytest.approx(0.3)
    assert rows[(0, "Paris_Hilton")].max_ranking_score == 0.0
    assert rows[(1, "France")].max_cos_sim_in_context == pytest.approx(0.7)
    assert rows[(0, "Paris_Hilton")].max_cos_sim_in_context == pytest.approx(0.0)
    assert rows[(0, "Paris_Hilton")].typing_prob_entity == pytest.approx(0.9)


def test_context_window_limits_neighbours(mini_kb, mini_store):
    table = EmbeddingTable(["Paris", "France", "Paris_Hilton"], np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    settings = FeatureSettings(window_m=1, top_n=1)
    extractor = FeatureExtractor(mini_kb, mini_store, stage=2, flavors=[WORD], settings=settings, entity_table=table)
    rows = by_pair(extractor.extract([document_mentions()], stage_scores(with_entity=True)))
    # mention 2 only sees mention 1
    assert rows[(2, "Paris")].max_cos_sim_in_context == pytest.approx(0.4)


def test_missing_inputs_are_contract_errors(mini_kb, mini_store):
    with pytest.raises(ContractError):
        FeatureExtractor(mini_kb, mini_store, stage=1, flavors=[WORD, ENTITY])
    with pytest.raises(ContractError):
        FeatureExtractor(mini_kb, mini_store, stage=1, flavors=[WORD]).extract([document_mentions()], {})
    with pytest.raises(ContractError):
        FeatureExtractor(mini_kb, mini_store, stage=2, flavors=[WORD]).extract(
            [document_mentions()], stage_scores(with_entity=False)
        )


def test_context_similarity_can_be_negative(mini_kb, mini_store):
    table = EmbeddingTable(["Paris", "France", "Paris_Hilton"], np.array([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]]))
    extractor = FeatureExtractor(mini_kb, mini_store, stage=2, flavors=[WORD], entity_table=table)
    rows = by_pair(extractor.extract([document_mentions()], stage_scores(with_entity=True)))
    # every neighbour points away from France: max(-0.5, -0.9, -0.7)
    assert rows[(1, "France")].max_cos_sim_in_context == pytest.approx(-0.5)
    assert rows[(0, "Paris")].max_cos_sim_in_context == pytest.approx(0.7)


def test_context_similarity_is_zero_without_neighbours(mini_kb, mini_store):
    table = EmbeddingTable(["Paris", "France"], np.array([[1.0, 0.0], [-1.0, 0.0]]))
    extractor = FeatureExtractor(mini_kb, mini_store, stage=2, flavors=[WORD], entity_table=table)
    lonely = [document_mentions()[1]]
    scores = {"d::1": stage_scores(with_entity=True)["d::1"]}
    [row] = extractor.extract([lonely], scores).itertuples(index=False)
    assert row.max_cos_sim_in_context == 0.0


def test_missing_typing_probability_is_not_filled_with_zero(mini_kb, mini_store):
    documents = [document_mentions()]
    word_probs = {"d::0": {"Paris": 0.7, "Paris_Hilton": 0.2}, "d::1": {"France": 0.9}}
    scores = build_score_table(documents, {WORD: word_probs})
    assert scores["d::0"]["Paris"].typing_probs == {WORD: 0.7}
    assert scores["d::2"]["Paris"].typing_probs == {}
    extractor = FeatureExtractor(mini_kb, mini_store, stage=1, flavors=[WORD])
    with pytest.raises(ContractError, match="Paris at mention d::2"):
        extractor.extract(documents, scores)
