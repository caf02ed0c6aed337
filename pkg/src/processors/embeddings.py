"""Skip-gram with negative sampling, cosine similarity and document vectors.

Training works on integer (target, context) pairs produced either from token
streams (window mode) or given explicitly (pair mode). Parameters follow the
word2vec conventions: input vectors uniform in ``±0.5/dim``, output vectors
zero, unigram^0.75 negative sampling and a linearly decaying learning rate.
"""

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog
from tqdm import tqdm

from ..config.constants import TrainingMode
from ..core.exceptions import DataProcessingError, ValidationError
from ..core.models import Document, EmbeddingTable
from ..utils.helpers import make_rng, spawn_seeds

logger = structlog.get_logger(__name__)

LOSS_SAMPLE_SIZE = 2000
MIN_LEARNING_RATE_FACTOR = 1e-4


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sgns_loss_and_grad(
    v: np.ndarray,
    u_pos: np.ndarray,
    u_neg: np.ndarray,
) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Summed SGNS loss of a batch and its gradients.

    ``loss = Σ_b [-log σ(v_b·u_b) - Σ_k log σ(-v_b·n_bk)]``

    Args:
        v: Target vectors ``(B, d)``
        u_pos: Context vectors ``(B, d)``
        u_neg: Negative context vectors ``(B, K, d)``

    Returns:
        (loss, dL/dv, dL/du_pos, dL/du_neg)
    """
    pos_score = np.einsum("bd,bd->b", v, u_pos)
    neg_score = np.einsum("bkd,bd->bk", u_neg, v)
    loss = float(np.logaddexp(0.0, -pos_score).sum() + np.logaddexp(0.0, neg_score).sum())
    g_pos = sigmoid(pos_score) - 1.0
    g_neg = sigmoid(neg_score)
    grad_v = g_pos[:, None] * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)
    grad_pos = g_pos[:, None] * v
    grad_neg = g_neg[:, :, None] * v[:, None, :]
    return loss, grad_v, grad_pos, grad_neg


@dataclass
class Vocabulary:
    """Token ↔ id map ordered by descending count, then token."""
    tokens: List[str]
    counts: np.ndarray
    index: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.index = {token: i for i, token in enumerate(self.tokens)}

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], min_count: int = 1) -> "Vocabulary":
        kept = sorted(
            ((token, count) for token, count in counts.items() if count >= min_count),
            key=lambda item: (-item[1], item[0]),
        )
        return cls([t for t, _ in kept], np.array([c for _, c in kept], dtype=np.float64))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.index


class SkipGramTrainer:
    """Mini-batch SGD over (target, context) id pairs.

    Attributes:
        history: Mean loss on a frozen pair sample after every epoch
    """

    def __init__(
        self,
        dim: int,
        negatives: int = 5,
        epochs: int = 5,
        learning_rate: float = 0.025,
        seed: int = 13,
        batch_size: int = 64,
        jobs: int = 1,
        deterministic: bool = True,
        progress: bool = False,
    ) -> None:
        if dim < 2:
            raise ValidationError(f"Embedding dim must be >= 2: {dim}", field="dim", value=dim)
        self.dim = dim
        self.negatives = negatives
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.seed = seed
        self.batch_size = batch_size
        self.jobs = 1 if deterministic else max(1, jobs)
        self.progress = progress
        self.history: List[float] = []
        self.w_in: Optional[np.ndarray] = None
        self.w_out: Optional[np.ndarray] = None

    def _sample_loss(self, targets: np.ndarray, contexts: np.ndarray, negatives: np.ndarray) -> float:
        loss, *_ = sgns_loss_and_grad(self.w_in[targets], self.w_out[contexts], self.w_out[negatives])
        return loss / max(1, len(targets))

    def _run_batches(
        self,
        order: np.ndarray,
        targets: np.ndarray,
        contexts: np.ndarray,
        negatives: np.ndarray,
        lr_schedule: np.ndarray,
    ) -> None:
        for batch_number, start in enumerate(range(0, len(order), self.batch_size)):
            rows = order[start:start + self.batch_size]
            t, c, n = targets[rows], contexts[rows], negatives[rows]
            lr = lr_schedule[batch_number]
            _, grad_v, grad_pos, grad_neg = sgns_loss_and_grad(self.w_in[t], self.w_out[c], self.w_out[n])
            np.add.at(self.w_in, t, -lr * grad_v)
            np.add.at(self.w_out, c, -lr * grad_pos)
            np.add.at(self.w_out, n.ravel(), -lr * grad_neg.reshape(-1, self.dim))

    def fit(
        self,
        targets: np.ndarray,
        contexts: np.ndarray,
        n_targets: int,
        context_counts: np.ndarray,
    ) -> np.ndarray:
        """Train and return the target (input) matrix.

        Args:
            targets: Target id per pair
            contexts: Context id per pair
            n_targets: Size of the target vocabulary
            context_counts: Frequency of each context id (negative sampling)
        """
        if len(targets) == 0:
            raise DataProcessingError("No training pairs for SGNS", operation="sgns")
        rng = make_rng(self.seed)
        self.w_in = (rng.random((n_targets, self.dim)) - 0.5) / self.dim
        self.w_out = np.zeros((len(context_counts), self.dim))
        noise = np.power(context_counts, 0.75)
        noise = noise / noise.sum()

        sample = rng.choice(len(targets), size=min(LOSS_SAMPLE_SIZE, len(targets)), replace=False)
        sample_negatives = rng.choice(len(noise), size=(len(sample), self.negatives), p=noise)
        self.history = []

        total_batches = self.epochs * int(np.ceil(len(targets) / self.batch_size))
        decay = np.maximum(
            MIN_LEARNING_RATE_FACTOR,
            1.0 - np.arange(total_batches) / max(1, total_batches),
        ) * self.learning_rate
        batches_per_epoch = int(np.ceil(len(targets) / self.batch_size))

        epochs = range(self.epochs)
        if self.progress:
            epochs = tqdm(epochs, desc="sgns", unit="epoch")
        for epoch in epochs:
            order = rng.permutation(len(targets))
            negatives = rng.choice(len(noise), size=(len(targets), self.negatives), p=noise)
            schedule = decay[epoch * batches_per_epoch:(epoch + 1) * batches_per_epoch]
            if self.jobs == 1:
                self._run_batches(order, targets, contexts, negatives, schedule)
            else:
                self._run_sharded(order, targets, contexts, noise, schedule, epoch)
            loss = self._sample_loss(targets[sample], contexts[sample], sample_negatives)
            self.history.append(loss)
            logger.info("sgns_epoch", epoch=epoch + 1, loss=round(loss, 6), pairs=len(targets))

        if not np.all(np.isfinite(self.w_in)):
            raise DataProcessingError("SGNS diverged (non-finite vectors)", operation="sgns")
        return self.w_in

    def _run_sharded(
        self,
        order: np.ndarray,
        targets: np.ndarray,
        contexts: np.ndarray,
        noise: np.ndarray,
        schedule: np.ndarray,
        epoch: int,
    ) -> None:
        """Lock-free parallel epoch; shards share the matrices and own their RNG."""
        shards = np.array_split(order, self.jobs)
        seeds = spawn_seeds(self.seed + epoch, self.jobs)

        def work(shard_index: int) -> None:
            shard = shards[shard_index]
            shard_rng = make_rng(seeds[shard_index])
            negatives = np.zeros((len(targets), self.negatives), dtype=np.int64)
            negatives[shard] = shard_rng.choice(len(noise), size=(len(shard), self.negatives), p=noise)
            steps = int(np.ceil(len(shard) / self.batch_size))
            positions = np.linspace(0, len(schedule) - 1, num=max(1, steps)).astype(int)
            self._run_batches(shard, targets, contexts, negatives, schedule[positions])

        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            list(pool.map(work, range(self.jobs)))


def window_pairs(documents: Sequence[np.ndarray], window: int) -> Tuple[np.ndarray, np.ndarray]:
    """All (center, context) id pairs within ``window`` positions, per document."""
    centers: List[np.ndarray] = []
    contexts: List[np.ndarray] = []
    for ids in documents:
        for offset in range(1, window + 1):
            if len(ids) <= offset:
                break
            centers.extend([ids[:-offset], ids[offset:]])
            contexts.extend([ids[offset:], ids[:-offset]])
    if not centers:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train_window_sgns(
    stream: Iterable[Sequence[str]],
    dim: int = 300,
    window: int = 2,
    negatives: int = 5,
    epochs: int = 5,
    min_count: int = 1,
    seed: int = 13,
    learning_rate: float = 0.025,
    jobs: int = 1,
    deterministic: bool = True,
    progress: bool = False,
) -> EmbeddingTable:
    """Train vectors for every token of a stream from its window neighbors.

    Tokens below ``min_count`` are removed before windowing; windows never
    cross a document boundary.

    Raises:
        DataProcessingError: If the vocabulary is empty after pruning
    """
    documents = [list(doc) for doc in stream]
    if not any(documents):
        raise DataProcessingError("Token stream is empty", operation="train_window_sgns")
    vocab = Vocabulary.from_counts(Counter(t for doc in documents for t in doc), min_count)
    if not len(vocab):
        raise DataProcessingError(
            f"Vocabulary is empty after min_count={min_count}", operation="train_window_sgns"
        )
    encoded = [np.array([vocab.index[t] for t in doc if t in vocab], dtype=np.int64) for doc in documents]
    centers, contexts = window_pairs(encoded, window)
    trainer = SkipGramTrainer(dim, negatives, epochs, learning_rate, seed,
                              jobs=jobs, deterministic=deterministic, progress=progress)
    vectors = trainer.fit(centers, contexts, len(vocab), vocab.counts)
    logger.info("window_sgns_trained", vocab=len(vocab), pairs=len(centers), dim=dim)
    return EmbeddingTable(
        vocab.tokens,
        vectors,
        {"mode": TrainingMode.WINDOW.value, "window": window, "epochs": epochs, "seed": seed,
         "final_loss": round(trainer.history[-1], 6)},
    )


def train_pair_sgns(
    pairs: Iterable[Tuple[str, str]],
    dim: int = 300,
    negatives: int = 5,
    epochs: int = 5,
    seed: int = 13,
    learning_rate: float = 0.025,
    min_count: int = 1,
    jobs: int = 1,
    deterministic: bool = True,
    progress: bool = False,
) -> EmbeddingTable:
    """Train target vectors from explicit (target, context) pairs.

    Targets and contexts have separate vocabularies; the target table is
    returned.
    """
    pair_list = list(pairs)
    if not pair_list:
        raise DataProcessingError("No training pairs", operation="train_pair_sgns")
    target_vocab = Vocabulary.from_counts(Counter(t for t, _ in pair_list), min_count)
    context_vocab = Vocabulary.from_counts(Counter(c for _, c in pair_list), min_count)
    kept = [(t, c) for t, c in pair_list if t in target_vocab and c in context_vocab]
    if not kept:
        raise DataProcessingError(
            f"Vocabulary is empty after min_count={min_count}", operation="train_pair_sgns"
        )
    targets = np.array([target_vocab.index[t] for t, _ in kept], dtype=np.int64)
    contexts = np.array([context_vocab.index[c] for _, c in kept], dtype=np.int64)
    trainer = SkipGramTrainer(dim, negatives, epochs, learning_rate, seed,
                              jobs=jobs, deterministic=deterministic, progress=progress)
    vectors = trainer.fit(targets, contexts, len(target_vocab), context_vocab.counts)
    # targets that lost all their pairs to context pruning keep their random init
    logger.info("pair_sgns_trained", targets=len(target_vocab), contexts=len(context_vocab),
                pairs=len(kept), dim=dim)
    return EmbeddingTable(
        target_vocab.tokens,
        vectors,
        {"mode": TrainingMode.PAIR.value, "epochs": epochs, "seed": seed,
         "final_loss": round(trainer.history[-1], 6)},
    )


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors of equal length.

    Raises:
        ValidationError: On a dimension mismatch or a zero vector
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"Vector shapes differ: {a.shape} vs {b.shape}", field="shape")
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0:
        raise ValidationError("Cosine of a zero vector is undefined", field="vector")
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def compute_idf(documents: Iterable[Sequence[str]]) -> Dict[str, float]:
    """Smoothed inverse document frequency ``ln((1 + N) / (1 + df)) + 1``."""
    df: Counter = Counter()
    total = 0
    for tokens in documents:
        df.update(set(tokens))
        total += 1
    return {token: float(np.log((1 + total) / (1 + count)) + 1.0) for token, count in df.items()}


def doc_embedding(
    tokens: Iterable[str],
    table: EmbeddingTable,
    idf: Optional[Mapping[str, float]] = None,
) -> Tuple[np.ndarray, bool]:
    """Idf-weighted mean of in-vocabulary word vectors, L2-normalized.

    Returns:
        (vector, empty) where ``empty`` flags a document with no known word
        (the vector is then all zeros)
    """
    total = np.zeros(table.dim)
    weight = 0.0
    for token in tokens:
        row = table.index.get(token)
        if row is None:
            continue
        w = idf.get(token, 1.0) if idf is not None else 1.0
        total += w * table.vectors[row]
        weight += w
    norm = np.linalg.norm(total)
    if weight == 0 or norm == 0:
        return np.zeros(table.dim), True
    return total / norm, False


def document_tokens(document: Document) -> List[str]:
    return [token for sentence in document.sentences for token in sentence]


class EntityDocumentIndex:
    """Document vectors of entities built from the sentences that mention them.

    The bag of words of an entity is the union of all training sentences
    holding one of its gold mentions; idf comes from the same corpus.
    """

    def __init__(self, table: EmbeddingTable, idf: Mapping[str, float]) -> None:
        self.table = table
        self.idf = dict(idf)
        self._vectors: Dict[str, np.ndarray] = {}

    @classmethod
    def build(cls, corpus: Sequence[Document], table: EmbeddingTable) -> "EntityDocumentIndex":
        index = cls(table, compute_idf(document_tokens(d) for d in corpus))
        bags: Dict[str, List[str]] = {}
        for document in corpus:
            for mention in document.mentions:
                if mention.gold_entity:
                    bags.setdefault(mention.gold_entity, []).extend(
                        document.sentences[mention.sentence_index]
                    )
        for entity_id, tokens in bags.items():
            vector, empty = doc_embedding(tokens, table, index.idf)
            if not empty:
                index._vectors[entity_id] = vector
        logger.info("entity_documents_built", entities=len(index._vectors))
        return index

    def vector(self, entity_id: str) -> Optional[np.ndarray]:
        return self._vectors.get(entity_id)

    def embed(self, document: Document) -> Tuple[np.ndarray, bool]:
        return doc_embedding(document_tokens(document), self.table, self.idf)

    def similarity(self, entity_id: str, document_vector: np.ndarray) -> float:
        """cos(D_c, D_t); 0 when either side has no vector."""
        entity_vector = self._vectors.get(entity_id)
        if entity_vector is None or not np.any(document_vector):
            return 0.0
        return cosine(entity_vector, document_vector)

    def __len__(self) -> int:
        return len(self._vectors)
