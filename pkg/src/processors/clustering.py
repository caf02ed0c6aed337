"""Entity clustering: K-means over embedding tables and Brown clustering.

Cluster ids become cluster-based types of the entities.
"""

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from sklearn.cluster import kmeans_plusplus

from ..config.constants import ClusterFlavor
from ..core.exceptions import DataProcessingError, ValidationError
from ..core.models import Clustering, EmbeddingTable, KnowledgeBase

logger = structlog.get_logger(__name__)

INERTIA_TOLERANCE = 1e-9
DISTANCE_CHUNK = 4096
MERGE_TIE_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# K-means
# ---------------------------------------------------------------------------

@dataclass
class KMeansResult:
    """Lloyd iterations outcome with one history entry per iteration."""
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    history: List[Dict[str, float]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.history)


def _squared_distances(points: np.ndarray, centers: np.ndarray, jobs: int = 1) -> np.ndarray:
    center_norms = np.einsum("kd,kd->k", centers, centers)

    def block(start: int) -> np.ndarray:
        chunk = points[start:start + DISTANCE_CHUNK]
        d = np.einsum("nd,nd->n", chunk, chunk)[:, None] - 2.0 * chunk @ centers.T + center_norms[None, :]
        return np.maximum(d, 0.0)

    starts = range(0, len(points), DISTANCE_CHUNK)
    if jobs > 1 and len(points) > DISTANCE_CHUNK:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return np.vstack(list(pool.map(block, starts)))
    return np.vstack([block(start) for start in starts])


def _reseed_empty(labels: np.ndarray, point_costs: np.ndarray, k: int) -> List[int]:
    """Move the costliest points of non-singleton clusters into empty clusters.

    Each empty cluster, in index order, takes the single highest-cost point
    among clusters with more than one member; ties go to the lowest point
    index. The moved point's cost drops to 0 so it is not chosen again.
    This rule is recorded with the other open decisions in DESIGN.md.
    """
    reseeded: List[int] = []
    sizes = np.bincount(labels, minlength=k)
    for cluster in np.flatnonzero(sizes == 0):
        movable = np.flatnonzero(sizes[labels] > 1)
        if len(movable) == 0:
            break
        # highest cost, lowest index on ties
        chosen = movable[np.argmax(point_costs[movable])]
        sizes[labels[chosen]] -= 1
        labels[chosen] = cluster
        sizes[cluster] = 1
        point_costs[chosen] = 0.0
        reseeded.append(int(cluster))
    return reseeded


def lloyd(
    points: np.ndarray,
    k: int,
    seed: int = 13,
    max_iterations: int = 50,
    change_tolerance: float = 0.01,
    jobs: int = 1,
) -> KMeansResult:
    """K-means++ seeding followed by Lloyd iterations.

    Stops once the fraction of re-assigned points is at most
    ``change_tolerance`` or after ``max_iterations``. Inertia is checked to be
    non-increasing after every iteration.

    Raises:
        ValidationError: If ``k`` is below 2 or above the number of points
        DataProcessingError: If inertia increases between iterations
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if k < 2:
        raise ValidationError(f"k must be >= 2: {k}", field="k", value=k)
    if k > n:
        raise ValidationError(f"k={k} exceeds the {n} points to cluster", field="k", value=k)

    centers, _ = kmeans_plusplus(points, n_clusters=k, random_state=seed)
    centers = centers.astype(np.float64)
    labels = np.full(n, -1, dtype=np.int64)
    history: List[Dict[str, float]] = []
    previous_inertia = np.inf

    for iteration in range(1, max_iterations + 1):
        distances = _squared_distances(points, centers, jobs)
        new_labels = np.argmin(distances, axis=1)
        changed = float(np.mean(new_labels != labels))
        costs = distances[np.arange(n), new_labels].copy()
        reseeded = _reseed_empty(new_labels, costs, k)
        labels = new_labels

        for cluster in range(k):
            members = points[labels == cluster]
            if len(members):
                centers[cluster] = members.mean(axis=0)
        inertia = float(((points - centers[labels]) ** 2).sum())

        if inertia > previous_inertia * (1 + INERTIA_TOLERANCE) + INERTIA_TOLERANCE:
            raise DataProcessingError(
                f"K-means inertia increased at iteration {iteration}: {previous_inertia} -> {inertia}",
                operation="kmeans",
            )
        previous_inertia = inertia
        history.append({"iteration": iteration, "inertia": inertia, "changed_fraction": changed,
                        "reseeded": len(reseeded)})
        logger.info("kmeans_iteration", iteration=iteration, inertia=round(inertia, 6),
                    changed_fraction=round(changed, 6), reseeded=len(reseeded))
        if changed <= change_tolerance:
            break

    return KMeansResult(labels=labels, centers=centers, inertia=previous_inertia, history=history)


def kmeans(
    table: EmbeddingTable,
    k: int,
    seed: int = 13,
    flavor: ClusterFlavor = ClusterFlavor.WORD,
    max_iterations: int = 50,
    change_tolerance: float = 0.01,
    jobs: int = 1,
) -> Clustering:
    """Cluster every token of an embedding table into ``k`` clusters."""
    result = lloyd(table.vectors, k, seed, max_iterations, change_tolerance, jobs)
    logger.info("kmeans_completed", flavor=flavor.value, k=k, points=len(table),
                iterations=result.iterations, inertia=round(result.inertia, 6))
    return Clustering(
        flavor=flavor,
        k=k,
        assignment={token: int(label) for token, label in zip(table.tokens, result.labels)},
    )


# ---------------------------------------------------------------------------
# Brown clustering
# ---------------------------------------------------------------------------

def _mi_terms(joint: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Elementwise ``p log(p / (pl pr))`` with 0 for empty cells."""
    out = np.zeros_like(joint)
    mask = joint > 0
    denominator = np.outer(left, right)
    out[mask] = joint[mask] * np.log(joint[mask] / denominator[mask])
    return out


def average_mutual_information(counts: np.ndarray) -> float:
    """AMI of adjacent-cluster bigrams given a cluster bigram count matrix."""
    total = counts.sum()
    if total == 0:
        return 0.0
    joint = counts / total
    return float(_mi_terms(joint, joint.sum(axis=1), joint.sum(axis=0)).sum())


def merge_losses(counts: np.ndarray) -> np.ndarray:
    """AMI lost by merging each pair of clusters (upper triangle, ``inf`` elsewhere)."""
    size = len(counts)
    losses = np.full((size, size), np.inf)
    total = counts.sum()
    if total == 0:
        losses[np.triu_indices(size, 1)] = 0.0
        return losses
    joint = counts / total
    pl, pr = joint.sum(axis=1), joint.sum(axis=0)
    q = _mi_terms(joint, pl, pr)
    row_q, col_q = q.sum(axis=1), q.sum(axis=0)

    def term(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros_like(p)
        mask = p > 0
        out[mask] = p[mask] * np.log(p[mask] / (a[mask] * b[mask]))
        return out

    for a in range(size):
        for b in range(a + 1, size):
            removed = row_q[a] + row_q[b] + col_q[a] + col_q[b] - q[a, a] - q[a, b] - q[b, a] - q[b, b]
            others = np.ones(size, dtype=bool)
            others[[a, b]] = False
            pl_m, pr_m = pl[a] + pl[b], pr[a] + pr[b]
            row_m = joint[a, others] + joint[b, others]
            col_m = joint[others, a] + joint[others, b]
            self_m = joint[a, a] + joint[a, b] + joint[b, a] + joint[b, b]
            added = (
                term(row_m, np.full(len(row_m), pl_m), pr[others]).sum()
                + term(col_m, pl[others], np.full(len(col_m), pr_m)).sum()
                + term(np.array([self_m]), np.array([pl_m]), np.array([pr_m])).sum()
            )
            losses[a, b] = removed - added
    return losses


def brown_cluster(
    streams: Iterable[Sequence[str]],
    k: int,
    flavor: ClusterFlavor = ClusterFlavor.BROWN,
) -> Clustering:
    """Brown clustering with ``k`` active clusters.

    Tokens are ordered by descending frequency (then token). The first ``k``
    start as singleton clusters; every further token enters as a new cluster
    and the pair whose merge loses the least average mutual information of
    adjacent-cluster bigrams is merged, ties going to the lowest indices.
    Bigrams are counted inside each stream only.

    Raises:
        ValidationError: If ``k`` is below 2 or above the vocabulary size
        DataProcessingError: If a merge is not locally optimal
    """
    documents = [list(stream) for stream in streams]
    counts = Counter(token for doc in documents for token in doc)
    if k < 2:
        raise ValidationError(f"k must be >= 2: {k}", field="k", value=k)
    if len(counts) < k:
        raise ValidationError(
            f"Brown clustering needs at least k={k} distinct tokens, found {len(counts)}",
            field="k",
            value=k,
        )
    order = [token for token, _ in sorted(counts.items(), key=lambda item: (-item[1], item[0]))]
    token_index = {token: i for i, token in enumerate(order)}

    bigrams: Counter = Counter()
    for doc in documents:
        bigrams.update(zip((token_index[t] for t in doc[:-1]), (token_index[t] for t in doc[1:])))
    left = np.array([pair[0] for pair in bigrams], dtype=np.int64)
    right = np.array([pair[1] for pair in bigrams], dtype=np.int64)
    weight = np.array(list(bigrams.values()), dtype=np.float64)

    cluster_of = np.full(len(order), -1, dtype=np.int64)
    cluster_of[:k] = np.arange(k)
    active = k

    def cluster_counts() -> np.ndarray:
        matrix = np.zeros((active, active))
        mask = (cluster_of[left] >= 0) & (cluster_of[right] >= 0)
        np.add.at(matrix, (cluster_of[left[mask]], cluster_of[right[mask]]), weight[mask])
        return matrix

    for position in range(k, len(order)):
        cluster_of[position] = active
        active += 1
        before = cluster_counts()
        losses = merge_losses(before)
        best = losses.min()
        a, b = (int(x) for x in np.argwhere(losses <= best + MERGE_TIE_TOLERANCE)[0])
        cluster_of[cluster_of == b] = a
        cluster_of[cluster_of > b] -= 1
        active -= 1
        # the realized AMI drop must be the minimal predicted one
        realized = average_mutual_information(before) - average_mutual_information(cluster_counts())
        if abs(realized - best) > 1e-9 * max(1.0, abs(best)):
            raise DataProcessingError(
                f"Brown merge lost {realized} AMI, expected the minimum {best}",
                operation="brown_cluster",
            )

    logger.info("brown_completed", flavor=flavor.value, k=k, tokens=len(order),
                ami=round(average_mutual_information(cluster_counts()), 6))
    return Clustering(
        flavor=flavor,
        k=k,
        assignment={token: int(cluster_of[i]) for i, token in enumerate(order)},
    )


def assign_types(clustering: Clustering, kb: KnowledgeBase) -> KnowledgeBase:
    """Record each clustered entity's cluster id as its type for the flavor."""
    assigned = 0
    for entity in kb:
        cluster_id = clustering.cluster_of(entity.id)
        if cluster_id is not None:
            entity.cluster_types[clustering.flavor] = cluster_id
            assigned += 1
    logger.info("cluster_types_assigned", flavor=clustering.flavor.value, entities=assigned)
    return kb


def restrict_to_entities(table: EmbeddingTable, kb: KnowledgeBase) -> EmbeddingTable:
    """Rows of a joint word/entity table that are KB entity ids."""
    entity_ids = [entity_id for entity_id in kb.ids() if entity_id in table]
    if not entity_ids:
        raise DataProcessingError("Embedding table contains no KB entities", operation="kmeans")
    return table.subset(entity_ids)
