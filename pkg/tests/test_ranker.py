"""Tests for the feedforward ranker."""

import numpy as np
import pandas as pd
import pytest
import torch
from torch.autograd import gradcheck

from src.config.settings import RankerSettings
from src.core.exceptions import DataProcessingError, ValidationError
from src.core.models import Prediction
from src.processors.ranker import (
    RankerNetwork,
    apply_threshold,
    build_ranker,
    complete_predictions,
    downsample_negatives,
    load_ranker_model,
    rank_candidates,
    ranking_accuracy,
    save_ranker_model,
    split_dev_mentions,
    top_predictions,
    train_ranker,
)

SMALL = RankerSettings(hidden=(16, 8), dropout=(0.0, 0.0), batch_size=20, epochs=30, learning_rate=0.05)


def separable_table(seed: int, mentions: int = 100, candidates: int = 3) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    rows = []
    for m in range(mentions):
        gold = int(rng.integers(candidates))
        for c in range(candidates):
            label = int(c == gold)
            rows.append({
                "doc_id": f"doc{m // 5}",
                "mention_index": m % 5,
                "entity_id": f"E{m}_{c}",
                "f_signal": label + rng.normal(0, 0.1),
                "f_noise": rng.normal(),
                "label": label,
            })
    return pd.DataFrame(rows)


def test_ranker_learns_a_separable_table():
    model, history = train_ranker(separable_table(1), SMALL, seed=3)
    assert len(history) == SMALL.epochs
    assert ranking_accuracy(model, separable_table(2)) >= 0.99


def test_inference_is_bit_exact_and_training_is_seeded():
    train, test = separable_table(3, 30), separable_table(4, 10)
    settings = SMALL.model_copy(update={"epochs": 3})
    first, _ = train_ranker(train, settings, seed=7)
    second, _ = train_ranker(train, settings, seed=7)
    np.testing.assert_array_equal(first.predict_proba(test), first.predict_proba(test))
    np.testing.assert_array_equal(first.predict_proba(test), second.predict_proba(test))


def test_network_passes_gradcheck():
    torch.manual_seed(0)
    network = RankerNetwork(4, hidden=(5, 3), dropout=(0.0, 0.0)).double().eval()
    inputs = torch.randn(6, 4, dtype=torch.double, requires_grad=True)
    assert gradcheck(network, (inputs,), eps=1e-6, atol=1e-5)


def test_dev_early_stopping_restores_best_epoch():
    train = separable_table(5, 60)
    train_rows, dev_rows = split_dev_mentions(train, 0.2, seed=1)
    settings = SMALL.model_copy(update={"patience": 2, "epochs": 40})
    model, history = train_ranker(train_rows, settings, seed=1, dev=dev_rows)
    # history records are what ranker_epoch logs
    assert set(history[0]) == {"epoch", "train_loss", "dev_loss", "dev_accuracy"}
    best = max(record["dev_accuracy"] for record in history)
    assert ranking_accuracy(model, dev_rows) == pytest.approx(best)


def test_split_dev_keeps_mentions_together():
    table = separable_table(6, 40)
    train, dev = split_dev_mentions(table, 0.25, seed=2)
    train_keys = set(zip(train["doc_id"], train["mention_index"]))
    dev_keys = set(zip(dev["doc_id"], dev["mention_index"]))
    assert len(dev_keys) == 10
    assert not train_keys & dev_keys
    assert len(train) + len(dev) == len(table)


def test_downsample_keeps_every_positive():
    table = separable_table(7, 20, candidates=5)
    sampled = downsample_negatives(table, seed=1)
    assert (sampled["label"] == 1).sum() == 20
    assert (sampled["label"] == 0).sum() == 20


def test_rank_candidates_orders_and_breaks_ties_by_entity():
    model = build_ranker(["f"], RankerSettings(hidden=(2, 2), dropout=(0.0, 0.0)))
    table = pd.DataFrame({
        "doc_id": ["d", "d", "d"],
        "mention_index": [0, 0, 0],
        "entity_id": ["B", "A", "C"],
        "f": [0.5, 0.5, 0.5],
        "label": [0, 1, 0],
    })
    ranked = rank_candidates(model, table)
    assert ranked["entity_id"].tolist() == ["A", "B", "C"]
    top = top_predictions(ranked)
    assert [(p.doc_id, p.mention_index, p.entity_id) for p in top] == [("d", 0, "A")]


def test_missing_inputs_and_empty_training_fail():
    model = build_ranker(["f", "g"])
    with pytest.raises(ValidationError):
        model.predict_proba(pd.DataFrame({"f": [1.0]}))
    with pytest.raises(DataProcessingError):
        train_ranker(separable_table(1).iloc[0:0])


def test_threshold_is_inclusive():
    predictions = [
        Prediction("d", 0, "A", 0.03),
        Prediction("d", 1, "B", 0.0299),
        Prediction("d", 2, None, 0.0),
    ]
    result = apply_threshold(predictions, 0.03)
    assert [p.entity_id for p in result] == ["A", None, None]
    assert result[1].score == pytest.approx(0.0299)


def test_complete_predictions_abstains_on_mentions_without_candidates():
    golds = {("d", 0): "A", ("d", 1): "B", ("e", 0): None}
    completed = complete_predictions([Prediction("d", 0, "A", 0.9)], golds)
    assert {(p.doc_id, p.mention_index): p.entity_id for p in completed} == {
        ("d", 0): "A", ("d", 1): None, ("e", 0): None,
    }


def test_saved_ranker_scores_the_same(tmp_path):
    settings = SMALL.model_copy(update={"epochs": 2})
    model, _ = train_ranker(separable_table(8, 20), settings, seed=2, stage=2)
    path = tmp_path / "ranker.model"
    save_ranker_model(model, path)
    loaded = load_ranker_model(path)
    assert loaded.stage == 2
    assert loaded.columns == ["f_signal", "f_noise"]
    test = separable_table(9, 5)
    np.testing.assert_array_equal(loaded.predict_proba(test), model.predict_proba(test))
