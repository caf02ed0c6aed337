"""Tests for skip-gram training and document vectors."""

import numpy as np
import pytest

from src.core.exceptions import DataProcessingError, ValidationError
from src.core.models import Document, EmbeddingTable, Mention
from src.processors.embeddings import (
    EntityDocumentIndex,
    Vocabulary,
    compute_idf,
    cosine,
    doc_embedding,
    sgns_loss_and_grad,
    train_pair_sgns,
    train_window_sgns,
    window_pairs,
)


def test_sgns_gradient_matches_central_differences():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(4, 6))
    u_pos = rng.normal(size=(4, 6))
    u_neg = rng.normal(size=(4, 3, 6))
    _, grad_v, grad_pos, grad_neg = sgns_loss_and_grad(v, u_pos, u_neg)
    eps = 1e-6

    for array, analytic in ((v, grad_v), (u_pos, grad_pos), (u_neg, grad_neg)):
        numeric = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + eps
            plus = sgns_loss_and_grad(v, u_pos, u_neg)[0]
            array[index] = original - eps
            minus = sgns_loss_and_grad(v, u_pos, u_neg)[0]
            array[index] = original
            numeric[index] = (plus - minus) / (2 * eps)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-7)


def test_vocabulary_orders_by_count_then_token():
    vocab = Vocabulary.from_counts({"b": 2, "a": 2, "c": 5, "d": 1}, min_count=2)
    assert vocab.tokens == ["c", "a", "b"]
    assert "d" not in vocab


def test_window_pairs_stay_inside_documents():
    centers, contexts = window_pairs([np.array([0, 1]), np.array([2, 3])], window=2)
    pairs = set(zip(centers.tolist(), contexts.tolist()))
    assert pairs == {(0, 1), (1, 0), (2, 3), (3, 2)}


def test_window_training_is_deterministic():
    stream = [["paris", "france", "city"] * 4, ["hilton", "hotel", "chain"] * 4] * 10
    first = train_window_sgns(stream, dim=8, epochs=5, seed=5)
    second = train_window_sgns(stream, dim=8, epochs=5, seed=5)
    np.testing.assert_array_equal(first.vectors, second.vectors)
    assert first.metadata["mode"] == "window"
    assert set(first.tokens) == {"paris", "france", "city", "hilton", "hotel", "chain"}


def test_cooccurring_words_end_up_closer():
    rng = np.random.default_rng(11)
    groups = [["paris", "france", "city", "louvre", "seine"], ["hilton", "hotel", "chain", "suite", "lobby"]]
    stream = [[str(t) for t in rng.choice(groups[i % 2], size=8)] for i in range(200)]
    table = train_window_sgns(stream, dim=10, window=2, negatives=5, epochs=20, seed=3)

    def mean_cosine(pairs):
        return float(np.mean([cosine(table.vector(a), table.vector(b)) for a, b in pairs]))

    within = [(a, b) for group in groups for i, a in enumerate(group) for b in group[i + 1:]]
    across = [(a, b) for a in groups[0] for b in groups[1]]
    assert mean_cosine(within) > mean_cosine(across) + 0.2


def test_window_training_rejects_empty_stream():
    with pytest.raises(DataProcessingError):
        train_window_sgns([[]], dim=4)
    with pytest.raises(DataProcessingError):
        train_window_sgns([["a"]], dim=4, min_count=2)


def test_pair_training_returns_target_table():
    pairs = [("Paris", "city"), ("Paris", "france"), ("Lyon", "city")] * 20
    table = train_pair_sgns(pairs, dim=4, epochs=2, seed=1)
    assert set(table.tokens) == {"Paris", "Lyon"}
    assert table.dim == 4


def test_cosine_edge_cases():
    assert cosine(np.array([1.0, 0.0]), np.array([2.0, 0.0])) == pytest.approx(1.0)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 3.0])) == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        cosine(np.zeros(2), np.ones(2))
    with pytest.raises(ValidationError):
        cosine(np.ones(2), np.ones(3))


def test_doc_embedding_flags_unknown_documents():
    table = EmbeddingTable(["a", "b"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    vector, empty = doc_embedding(["zzz"], table)
    assert empty and not vector.any()
    vector, empty = doc_embedding(["a", "b", "b"], table)
    assert not empty
    assert np.linalg.norm(vector) == pytest.approx(1.0)
    assert vector[1] > vector[0]


def test_idf_is_smoothed():
    idf = compute_idf([["a", "b"], ["a"]])
    assert idf["a"] == pytest.approx(np.log(3 / 3) + 1)
    assert idf["b"] == pytest.approx(np.log(3 / 2) + 1)


def test_entity_document_similarity():
    table = EmbeddingTable(["red", "blue"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    s1, s2 = ["red", "X"], ["blue", "Y"]
    corpus = [Document("d", [s1, s2], [Mention(0, 1, 2, "X", "Ex"), Mention(1, 1, 2, "Y", "Ey")])]
    index = EntityDocumentIndex.build(corpus, table)
    assert len(index) == 2
    red_doc, _ = doc_embedding(["red"], table)
    assert index.similarity("Ex", red_doc) == pytest.approx(1.0)
    assert index.similarity("Ey", red_doc) == pytest.approx(0.0)
    assert index.similarity("unknown", red_doc) == 0.0
