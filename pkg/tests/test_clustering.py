"""Tests for K-means and Brown clustering."""

import itertools

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from src.config import ClusterFlavor
from src.core.exceptions import DataProcessingError, ValidationError
from src.core.models import Clustering, EmbeddingTable
from src.processors.clustering import (
    _reseed_empty,
    assign_types,
    average_mutual_information,
    brown_cluster,
    kmeans,
    lloyd,
    restrict_to_entities,
)


def three_blobs(seed: int, n: int = 600, sigma: float = 0.05):
    rng = np.random.default_rng(seed)
    means = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    truth = np.repeat(np.arange(3), n // 3)
    points = means[truth] + rng.normal(0.0, sigma, size=(n, 2))
    return points, truth


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_kmeans_recovers_separated_gaussians(seed):
    points, truth = three_blobs(seed)
    result = lloyd(points, 3, seed=seed)
    assert adjusted_rand_score(truth, result.labels) >= 0.99


def test_inertia_never_increases():
    rng = np.random.default_rng(0)
    points = rng.normal(size=(400, 4))
    result = lloyd(points, 8, seed=7, change_tolerance=0.0)
    inertias = [entry["inertia"] for entry in result.history]
    assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))
    assert result.inertia == pytest.approx(inertias[-1])


def test_lloyd_rejects_bad_k():
    points = np.zeros((3, 2))
    with pytest.raises(ValidationError):
        lloyd(points, 1)
    with pytest.raises(ValidationError):
        lloyd(points, 4)


def test_reseed_moves_costliest_point_of_shared_cluster():
    labels = np.array([0, 0, 0, 1])
    costs = np.array([1.0, 5.0, 2.0, 9.0])
    reseeded = _reseed_empty(labels, costs, 3)
    # point 3 is alone in its cluster, so point 1 moves
    assert reseeded == [2]
    assert labels.tolist() == [0, 2, 0, 1]


def test_kmeans_assigns_every_token():
    points, _ = three_blobs(11, n=30)
    table = EmbeddingTable([f"e{i}" for i in range(30)], points)
    clustering = kmeans(table, 3, seed=11, flavor=ClusterFlavor.ENTITY)
    assert clustering.flavor is ClusterFlavor.ENTITY
    assert set(clustering.assignment) == set(table.tokens)
    assert len(set(clustering.assignment.values())) == 3


def test_restrict_and_assign_types(mini_kb):
    tokens = ["Paris", "France", "the", "Hilton_Hotels"]
    table = EmbeddingTable(tokens, np.eye(4))
    restricted = restrict_to_entities(table, mini_kb)
    assert set(restricted.tokens) == {"Paris", "France", "Hilton_Hotels"}

    clustering = Clustering(ClusterFlavor.WORD, 2, {"Paris": 0, "France": 0, "Hilton_Hotels": 1})
    assign_types(clustering, mini_kb)
    assert mini_kb["Paris"].cluster_types[ClusterFlavor.WORD] == 0
    assert mini_kb["Hilton_Hotels"].cluster_types[ClusterFlavor.WORD] == 1
    assert ClusterFlavor.WORD not in mini_kb["Paris_Hilton"].cluster_types


def test_restrict_without_entities_fails(mini_kb):
    with pytest.raises(DataProcessingError):
        restrict_to_entities(EmbeddingTable(["a", "b"], np.eye(2)), mini_kb)


def exhaustive_best_ami(streams, tokens, k):
    """Best AMI over every partition of ``tokens`` into exactly ``k`` clusters."""
    best = -np.inf
    for labels in itertools.product(range(k), repeat=len(tokens)):
        if len(set(labels)) != k:
            continue
        cluster = dict(zip(tokens, labels))
        counts = np.zeros((k, k))
        for stream in streams:
            for a, b in zip(stream, stream[1:]):
                counts[cluster[a], cluster[b]] += 1
        best = max(best, average_mutual_information(counts))
    return best


def brown_ami(streams, clustering):
    counts = np.zeros((clustering.k, clustering.k))
    for stream in streams:
        for a, b in zip(stream, stream[1:]):
            counts[clustering.cluster_of(a), clustering.cluster_of(b)] += 1
    return average_mutual_information(counts)


def test_brown_groups_tokens_in_the_same_slot():
    streams = [["A", "x", "B"]] * 5
    clustering = brown_cluster(streams, 2)
    assert clustering.flavor is ClusterFlavor.BROWN
    assert clustering.cluster_of("A") == clustering.cluster_of("B")
    assert clustering.cluster_of("x") != clustering.cluster_of("A")
    assert brown_ami(streams, clustering) == pytest.approx(exhaustive_best_ami(streams, ["A", "B", "x"], 2))
    assert brown_ami(streams, clustering) == pytest.approx(np.log(2))


def test_brown_does_not_count_bigrams_across_streams():
    # joined into one stream, "B A" would link the two slots
    clustering = brown_cluster([["A", "x", "B"], ["A", "x", "B"]], 2)
    assert clustering.cluster_of("A") == clustering.cluster_of("B")


def test_brown_rejects_small_vocabulary():
    with pytest.raises(ValidationError):
        brown_cluster([["a", "b"]], 3)
    with pytest.raises(ValidationError):
        brown_cluster([["a", "b"]], 1)


def test_average_mutual_information_of_independent_counts_is_zero():
    assert average_mutual_information(np.ones((3, 3))) == pytest.approx(0.0)
    assert average_mutual_information(np.zeros((2, 2))) == 0.0
