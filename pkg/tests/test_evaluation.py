"""Tests for evaluation metrics and the randomization test."""

import pytest

from src.core.exceptions import ValidationError
from src.core.models import Prediction
from src.processors.evaluation import (
    bot_f1,
    evaluation_row,
    format_report,
    gold_map,
    inkb_accuracy,
    micro_prf,
    randomization_test,
)

GOLDS = {
    ("d1", 0): "A", ("d1", 1): "B", ("d1", 2): None,
    ("d2", 0): "C", ("d2", 1): "A",
    ("d3", 0): "D",
}


def hand_predictions():
    return [
        Prediction("d1", 0, "A", 0.9),
        Prediction("d1", 1, "A", 0.6),
        Prediction("d1", 2, "E", 0.5),
        Prediction("d2", 0, None, 0.01),
        Prediction("d2", 1, "A", 0.7),
        Prediction("d3", 0, "D", 0.8),
    ]


def test_micro_scores_on_hand_fixture():
    scores = micro_prf(hand_predictions(), GOLDS)
    assert scores["precision"] == pytest.approx(0.75)
    assert scores["recall"] == pytest.approx(0.6)
    assert scores["f1"] == pytest.approx(2 / 3)


def test_bag_of_titles_f1_on_hand_fixture():
    assert bot_f1(hand_predictions(), GOLDS) == pytest.approx(0.75)


def test_inkb_accuracy_uses_top1_predictions():
    unthresholded = [p if p.entity_id else Prediction(p.doc_id, p.mention_index, "C", p.score)
                     for p in hand_predictions()]
    assert inkb_accuracy(unthresholded, GOLDS) == pytest.approx(0.8)
    assert inkb_accuracy(hand_predictions(), GOLDS) == pytest.approx(0.6)


def test_evaluation_row_collects_every_column():
    row = evaluation_row("toy", hand_predictions(), GOLDS, gold_recall={"stage1": 80.0, "100": 90.0})
    assert row["dataset"] == "toy"
    assert row["mentions"] == 5
    assert row["gold_recall_stage1"] == 80.0
    assert row["gold_recall_100"] == 90.0


def test_unknown_mention_is_rejected():
    with pytest.raises(ValidationError):
        micro_prf([Prediction("zz", 0, "A", 1.0)], GOLDS)


def test_empty_predictions_score_zero():
    scores = micro_prf([], GOLDS)
    assert scores == {"precision": 0.0, "recall": 0.0, "f1": 0.0}


def test_gold_map_excludes_nothing(mini_corpus):
    golds = gold_map(mini_corpus)
    assert len(golds) == 8
    assert golds[("d1", 4)] is None
    assert golds[("d3", 1)] == "Paris_Hilton"


def test_identical_systems_are_not_significant():
    result = randomization_test(hand_predictions(), hand_predictions(), GOLDS, rounds=200)
    assert result["difference"] == 0.0
    assert result["p_value"] == 1.0


def test_clearly_different_systems_are_significant():
    golds = {(f"d{i}", 0): f"E{i}" for i in range(20)}
    right = [Prediction(f"d{i}", 0, f"E{i}", 1.0) for i in range(20)]
    wrong = [Prediction(f"d{i}", 0, "X", 1.0) for i in range(20)]
    result = randomization_test(right, wrong, golds, rounds=1000, seed=3)
    assert result["f1_a"] == pytest.approx(1.0)
    assert result["f1_b"] == pytest.approx(0.0)
    assert result["p_value"] <= 0.01


def test_randomization_is_seeded():
    golds = {(f"d{i}", 0): f"E{i}" for i in range(10)}
    a = [Prediction(f"d{i}", 0, f"E{i}" if i % 2 else "X", 1.0) for i in range(10)]
    b = [Prediction(f"d{i}", 0, f"E{i}" if i % 3 else "X", 1.0) for i in range(10)]
    assert randomization_test(a, b, golds, rounds=500, seed=1) == randomization_test(a, b, golds, rounds=500, seed=1)
    with pytest.raises(ValidationError):
        randomization_test(a, b, golds, rounds=0)


def test_format_report_aligns_columns():
    lines = format_report([{"dataset": "a", "f1": 0.5}, {"dataset": "longer", "f1": 0.25}])
    assert lines[0].split() == ["dataset", "f1"]
    assert lines[1].split() == ["a", "0.5000"]
    assert lines[2].index("0.2500") == lines[0].index("f1")
    assert format_report([]) == []
