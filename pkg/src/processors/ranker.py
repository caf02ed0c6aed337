"""Feedforward candidate ranker.

A two-hidden-layer network classifies each (mention, candidate) feature row
as true or false; the true-class probability ``R`` ranks the candidates of a
mention. Inputs are standardized with statistics fitted on the training rows
and stored with the model.
"""

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog
import torch
import torch.nn as nn
import torch.nn.functional as F
from sklearn.preprocessing import StandardScaler
from tqdm import tqdm

from ..config.settings import RankerSettings
from ..connectors.ranking_files import KEY_COLUMNS, LABEL_COLUMN, feature_columns
from ..core.artifacts import read_binary_artifact, write_binary_artifact
from ..core.exceptions import ArtifactError, DataProcessingError, ValidationError
from ..core.models import GoldMap, Prediction
from ..utils.helpers import safe_divide
from .evaluation import micro_prf

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

MENTION_COLUMNS = ["doc_id", "mention_index"]


class RankerNetwork(nn.Module):
    """``in → 500 → 300 → 2`` with ReLU and dropout after each hidden layer."""

    def __init__(
        self,
        input_dim: int,
        hidden: Tuple[int, int] = (500, 300),
        dropout: Tuple[float, float] = (0.1, 0.7),
    ) -> None:
        super().__init__()
        self.layers = nn.Sequential(
            nn.Linear(input_dim, hidden[0]),
            nn.ReLU(),
            nn.Dropout(dropout[0]),
            nn.Linear(hidden[0], hidden[1]),
            nn.ReLU(),
            nn.Dropout(dropout[1]),
            nn.Linear(hidden[1], 2),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.layers(x)


@dataclass
class RankerModel:
    """Network plus the input layout and standardization it was trained with."""
    network: RankerNetwork
    columns: List[str]
    mean: np.ndarray
    scale: np.ndarray
    stage: int = 1
    hidden: Tuple[int, int] = (500, 300)
    dropout: Tuple[float, float] = (0.1, 0.7)

    def transform(self, df: pd.DataFrame) -> torch.Tensor:
        missing = [c for c in self.columns if c not in df.columns]
        if missing:
            raise ValidationError(f"Feature table lacks ranker inputs: {missing}", field="columns")
        values = df[self.columns].to_numpy(dtype=np.float64)
        return torch.from_numpy((values - self.mean) / self.scale)

    def predict_proba(self, df: pd.DataFrame) -> np.ndarray:
        """True-class probability of every row; dropout disabled."""
        if df.empty:
            return np.zeros(0)
        self.network.eval()
        with torch.no_grad():
            return F.softmax(self.network(self.transform(df)), dim=1)[:, 1].numpy()


def build_ranker(
    columns: Sequence[str],
    settings: Optional[RankerSettings] = None,
    seed: int = 13,
    stage: int = 1,
) -> RankerModel:
    """Untrained double-precision ranker with identity standardization."""
    settings = settings or RankerSettings()
    torch.manual_seed(seed)
    network = RankerNetwork(len(columns), tuple(settings.hidden), tuple(settings.dropout)).double()
    return RankerModel(
        network=network,
        columns=list(columns),
        mean=np.zeros(len(columns)),
        scale=np.ones(len(columns)),
        stage=stage,
        hidden=tuple(settings.hidden),
        dropout=tuple(settings.dropout),
    )


def downsample_negatives(df: pd.DataFrame, seed: int, ratio: float = 1.0) -> pd.DataFrame:
    """Keep every positive row and ``ratio`` negatives per positive, sampled at random."""
    positives = df[df[LABEL_COLUMN] == 1]
    negatives = df[df[LABEL_COLUMN] != 1]
    keep = min(len(negatives), int(round(len(positives) * ratio)))
    sampled = negatives.sample(n=keep, random_state=seed) if keep < len(negatives) else negatives
    return pd.concat([positives, sampled]).sort_index()


def split_dev_mentions(df: pd.DataFrame, dev_fraction: float, seed: int) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Train/dev split by mention so siblings stay together."""
    mentions = df[MENTION_COLUMNS].drop_duplicates().reset_index(drop=True)
    order = np.random.default_rng(seed).permutation(len(mentions))
    dev_size = int(round(len(mentions) * dev_fraction))
    dev_keys = set(map(tuple, mentions.iloc[order[:dev_size]].itertuples(index=False)))
    in_dev = np.array([k in dev_keys for k in zip(df["doc_id"], df["mention_index"])], dtype=bool)
    return df[~in_dev], df[in_dev]


def ranking_accuracy(model: RankerModel, df: pd.DataFrame) -> float:
    """Share of mentions, among those with a gold candidate, whose top-1 is the gold."""
    if df.empty:
        return 0.0
    ranked = rank_candidates(model, df)
    top = ranked.groupby(MENTION_COLUMNS, sort=False).head(1)
    answerable = ranked.groupby(MENTION_COLUMNS, sort=False)[LABEL_COLUMN].max()
    return safe_divide(int(top[LABEL_COLUMN].sum()), int((answerable == 1).sum()))


def _loss(model: RankerModel, df: pd.DataFrame) -> float:
    model.network.eval()
    with torch.no_grad():
        logits = model.network(model.transform(df))
        labels = torch.as_tensor(df[LABEL_COLUMN].to_numpy(), dtype=torch.long)
        return float(F.cross_entropy(logits, labels))


def train_ranker(
    train: pd.DataFrame,
    settings: Optional[RankerSettings] = None,
    seed: int = 13,
    stage: int = 1,
    dev: Optional[pd.DataFrame] = None,
    progress: bool = False,
) -> Tuple[RankerModel, List[Dict[str, float]]]:
    """Cross-entropy SGD with Nesterov momentum on labeled feature rows.

    With a dev table, training stops after ``patience`` epochs without a
    better dev top-1 accuracy and the best parameters are restored.

    Returns:
        (model, per-epoch history)

    Raises:
        DataProcessingError: If the training table is empty
    """
    settings = settings or RankerSettings()
    if train.empty:
        raise DataProcessingError("Ranker training set is empty", operation="train_ranker")
    if settings.downsample:
        train = downsample_negatives(train, seed)

    columns = feature_columns(train)
    model = build_ranker(columns, settings, seed, stage)
    scaler = StandardScaler().fit(train[columns].to_numpy(dtype=np.float64))
    model.mean = scaler.mean_
    model.scale = scaler.scale_

    inputs = model.transform(train)
    labels = torch.as_tensor(train[LABEL_COLUMN].to_numpy(), dtype=torch.long)
    optimizer = torch.optim.SGD(
        model.network.parameters(),
        lr=settings.learning_rate,
        momentum=settings.momentum,
        nesterov=settings.momentum > 0,
    )
    generator = torch.Generator().manual_seed(seed)
    history: List[Dict[str, float]] = []
    best_key: Optional[Tuple[float, float]] = None
    best_state = None
    stale = 0

    epochs = range(1, settings.epochs + 1)
    if progress:
        epochs = tqdm(epochs, desc=f"ranker stage {stage}", unit="epoch")
    for epoch in epochs:
        model.network.train()
        order = torch.randperm(len(labels), generator=generator)
        total = 0.0
        for start in range(0, len(order), settings.batch_size):
            batch = order[start:start + settings.batch_size]
            optimizer.zero_grad()
            loss = F.cross_entropy(model.network(inputs[batch]), labels[batch], reduction="sum")
            (loss / len(batch)).backward()
            optimizer.step()
            total += float(loss.detach())

        record: Dict[str, float] = {"epoch": epoch, "train_loss": total / len(labels)}
        if dev is not None and not dev.empty:
            record.update(dev_loss=_loss(model, dev), dev_accuracy=ranking_accuracy(model, dev))
        history.append(record)
        logger.info("ranker_epoch", stage=stage, **record)

        if "dev_accuracy" in record:
            key = (record["dev_accuracy"], -record["dev_loss"])
            if best_key is None or key > best_key:
                best_key = key
                best_state = {k: v.detach().clone() for k, v in model.network.state_dict().items()}
                stale = 0
            else:
                stale += 1
                if stale >= settings.patience:
                    logger.info("ranker_early_stop", epoch=epoch, best_dev_accuracy=best_key[0])
                    break

    if best_state is not None:
        model.network.load_state_dict(best_state)
    model.network.eval()
    return model, history


def rank_candidates(model: RankerModel, df: pd.DataFrame) -> pd.DataFrame:
    """Attach ``R`` and order rows by mention, then R descending, then entity id."""
    ranked = df.copy()
    ranked["R"] = model.predict_proba(df)
    return ranked.sort_values(
        ["doc_id", "mention_index", "R", "entity_id"],
        ascending=[True, True, False, True],
        kind="mergesort",
    ).reset_index(drop=True)


def top_predictions(ranked: pd.DataFrame) -> List[Prediction]:
    """Top-1 candidate of every mention of a ranked table."""
    top = ranked.groupby(MENTION_COLUMNS, sort=False).head(1)
    return [
        Prediction(doc_id=row.doc_id, mention_index=int(row.mention_index),
                   entity_id=row.entity_id, score=float(row.R))
        for row in top.itertuples(index=False)
    ]


def apply_threshold(predictions: Sequence[Prediction], threshold: float = 0.03) -> List[Prediction]:
    """Abstain when the top-1 probability is below ``threshold`` (inclusive predict)."""
    return [
        p if p.entity_id is None or p.score >= threshold
        else Prediction(p.doc_id, p.mention_index, None, p.score)
        for p in predictions
    ]


def complete_predictions(predictions: Sequence[Prediction], golds: GoldMap) -> List[Prediction]:
    """Add an abstention for every gold mention without candidates."""
    seen = {(p.doc_id, p.mention_index) for p in predictions}
    missing = [Prediction(doc_id, index, None, 0.0) for (doc_id, index) in golds if (doc_id, index) not in seen]
    return list(predictions) + missing


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_ranker_model(model: RankerModel, path: PathLike) -> None:
    """Header, one JSON metadata line, then the torch state dict."""
    metadata = {
        "columns": model.columns,
        "mean": model.mean.tolist(),
        "scale": model.scale.tolist(),
        "stage": model.stage,
        "hidden": list(model.hidden),
        "dropout": list(model.dropout),
    }
    buffer = io.BytesIO()
    torch.save(model.network.state_dict(), buffer)
    payload = (json.dumps(metadata) + "\n").encode("utf-8") + buffer.getvalue()
    write_binary_artifact(path, "ranker_model", payload, stage=model.stage, inputs=len(model.columns))
    logger.info("ranker_model_saved", path=str(path), stage=model.stage)


def load_ranker_model(path: PathLike) -> RankerModel:
    """Inverse of ``save_ranker_model``.

    Raises:
        ArtifactError: On corrupt metadata or mismatching parameters
    """
    _, payload = read_binary_artifact(path, "ranker_model")
    newline = payload.find(b"\n")
    try:
        metadata = json.loads(payload[:newline].decode("utf-8"))
        hidden = tuple(metadata["hidden"])
        dropout = tuple(metadata["dropout"])
        columns = list(metadata["columns"])
    except (ValueError, KeyError, TypeError) as e:
        raise ArtifactError(f"{path}: corrupt ranker metadata: {e}", path=str(path))
    network = RankerNetwork(len(columns), hidden, dropout).double()
    state = torch.load(io.BytesIO(payload[newline + 1:]), weights_only=True)
    try:
        network.load_state_dict(state)
    except RuntimeError as e:
        raise ArtifactError(f"{path}: {e}", path=str(path))
    network.eval()
    return RankerModel(
        network=network,
        columns=columns,
        mean=np.asarray(metadata["mean"], dtype=np.float64),
        scale=np.asarray(metadata["scale"], dtype=np.float64),
        stage=int(metadata["stage"]),
        hidden=hidden,
        dropout=dropout,
    )


# ---------------------------------------------------------------------------
# Seed replication
# ---------------------------------------------------------------------------

def replicate(
    train: pd.DataFrame,
    test: pd.DataFrame,
    golds: GoldMap,
    seeds: Sequence[int],
    settings: Optional[RankerSettings] = None,
    stage: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """Retrain the ranker once per seed and score the test table.

    Returns:
        One row per seed with precision, recall and micro-F1
    """
    settings = settings or RankerSettings()
    rows = []
    seeds = list(seeds)
    iterator = tqdm(seeds, desc="replicate", unit="seed") if progress else seeds
    for seed in iterator:
        train_rows, dev_rows = split_dev_mentions(train, settings.dev_fraction, seed)
        model, _ = train_ranker(train_rows, settings, seed=seed, stage=stage, dev=dev_rows)
        predictions = apply_threshold(top_predictions(rank_candidates(model, test)), settings.threshold)
        scores = micro_prf(complete_predictions(predictions, golds), golds)
        rows.append({"seed": seed, **scores})
        logger.info("replicate_seed", seed=seed, f1=scores["f1"])
    return pd.DataFrame(rows, columns=["seed", "precision", "recall", "f1"])
