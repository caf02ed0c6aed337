"""Mention typing model.

Four input channels (left context, two views of the mention surface, right
context) are embedded, encoded separately, concatenated and mapped to a
softmax over cluster-based types. Encoders are either a mean pool followed
by an affine layer and tanh, or an LSTM (bidirectional for the surface
channels). The right context is read in reverse order so both context
encoders end next to the mention.
"""

import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.rnn import pack_padded_sequence
from tqdm import tqdm

from ..config.constants import (
    FLAVOR_FORMATS,
    MAX_CHANNEL_TOKENS,
    PAD_TOKEN,
    UNKNOWN_TOKEN,
    ClusterFlavor,
    ContextFormat,
    EncoderKind,
)
from ..config.settings import TypingSettings
from ..core.artifacts import read_binary_artifact, write_binary_artifact
from ..core.exceptions import ArtifactError, ContractError, DataProcessingError, ValidationError
from ..core.models import Clustering, EmbeddingTable, TypingInstance
from ..utils.helpers import batch_items, safe_divide

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

CONTEXT_CHANNEL = "context"
SURFACE1_CHANNEL = "surface1"
SURFACE2_CHANNEL = "surface2"


@dataclass
class TypingModelConfig:
    """Architecture of a typing model.

    Attributes:
        flavor: Clustering flavor whose cluster ids are predicted
        num_classes: Number of cluster-based types (k)
        encoder: Encoder kind for every channel
        hidden: Output width of a unidirectional encoder
        dropout: Dropout before and after the encoders
        embedding_dim: Width of every channel embedding
        surface2: Whether the second surface channel is present
        max_tokens: Tokens kept per channel
    """
    flavor: ClusterFlavor
    num_classes: int
    encoder: EncoderKind = EncoderKind.RECURRENT
    hidden: int = 600
    dropout: float = 0.5
    embedding_dim: int = 300
    surface2: bool = True
    max_tokens: int = MAX_CHANNEL_TOKENS

    def __post_init__(self) -> None:
        self.flavor = ClusterFlavor(self.flavor)
        if isinstance(self.encoder, str) and self.encoder.lower() == "cnn":
            raise ValidationError("Encoder kind 'cnn' is not supported", field="encoder", value="cnn")
        try:
            self.encoder = EncoderKind(self.encoder)
        except ValueError:
            raise ValidationError(f"Unknown encoder kind: {self.encoder}", field="encoder",
                                  value=self.encoder)
        if self.num_classes < 2:
            raise ValidationError(f"num_classes must be >= 2: {self.num_classes}",
                                  field="num_classes", value=self.num_classes)

    @property
    def context_format(self) -> ContextFormat:
        return FLAVOR_FORMATS[self.flavor]


class MeanEncoder(nn.Module):
    """Masked average of the token embeddings, then affine + tanh."""

    def __init__(self, input_dim: int, hidden: int) -> None:
        super().__init__()
        self.linear = nn.Linear(input_dim, hidden)
        self.output_dim = hidden

    def forward(self, embedded: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        mask = (torch.arange(embedded.shape[1])[None, :] < lengths[:, None]).to(embedded.dtype)
        summed = (embedded * mask[:, :, None]).sum(dim=1)
        mean = summed / lengths.clamp(min=1)[:, None].to(embedded.dtype)
        encoded = torch.tanh(self.linear(mean))
        return encoded * (lengths > 0)[:, None].to(embedded.dtype)


class RecurrentEncoder(nn.Module):
    """LSTM over the channel; the final hidden state(s) are the encoding."""

    def __init__(self, input_dim: int, hidden: int, bidirectional: bool) -> None:
        super().__init__()
        self.lstm = nn.LSTM(input_dim, hidden, batch_first=True, bidirectional=bidirectional)
        self.output_dim = hidden * (2 if bidirectional else 1)

    def forward(self, embedded: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        packed = pack_padded_sequence(embedded, lengths.clamp(min=1).cpu(), batch_first=True,
                                      enforce_sorted=False)
        _, (h_n, _) = self.lstm(packed)
        encoded = torch.cat([h_n[i] for i in range(h_n.shape[0])], dim=1)
        # empty channels encode to the zero state
        return encoded * (lengths > 0)[:, None].to(encoded.dtype)


def _make_encoder(kind: EncoderKind, input_dim: int, hidden: int, bidirectional: bool) -> nn.Module:
    if kind is EncoderKind.MEAN:
        return MeanEncoder(input_dim, hidden)
    return RecurrentEncoder(input_dim, hidden, bidirectional)


class MentionTypingNetwork(nn.Module):
    """Embeddings, four channel encoders and the softmax layer."""

    def __init__(self, config: TypingModelConfig, vocab_sizes: Mapping[str, int]) -> None:
        super().__init__()
        self.config = config
        dim = config.embedding_dim
        self.embeddings = nn.ModuleDict({
            name: nn.Embedding(size, dim, padding_idx=0) for name, size in vocab_sizes.items()
        })
        self.encoders = nn.ModuleDict({
            "left": _make_encoder(config.encoder, dim, config.hidden, bidirectional=False),
            SURFACE1_CHANNEL: _make_encoder(config.encoder, dim, config.hidden, bidirectional=True),
            "right": _make_encoder(config.encoder, dim, config.hidden, bidirectional=False),
        })
        if config.surface2:
            self.encoders[SURFACE2_CHANNEL] = _make_encoder(config.encoder, dim, config.hidden,
                                                            bidirectional=True)
        self.dropout = nn.Dropout(config.dropout)
        width = sum(encoder.output_dim for encoder in self.encoders.values())
        self.output = nn.Linear(width, config.num_classes)

    def forward(self, batch: Mapping[str, Tuple[torch.Tensor, torch.Tensor]]) -> torch.Tensor:
        """Class logits for a batch of ``channel → (ids, lengths)``."""
        encoded = []
        for name, encoder in self.encoders.items():
            ids, lengths = batch[name]
            table = CONTEXT_CHANNEL if name in ("left", "right") else name
            embedded = self.dropout(self.embeddings[table](ids))
            encoded.append(encoder(embedded, lengths))
        return self.output(self.dropout(torch.cat(encoded, dim=1)))


class ChannelVocabulary:
    """Token ids of one embedding table; 0 is padding and 1 the shared unknown."""

    def __init__(self, tokens: Sequence[str]) -> None:
        self.tokens: List[str] = [PAD_TOKEN, UNKNOWN_TOKEN] + [
            t for t in dict.fromkeys(tokens) if t not in (PAD_TOKEN, UNKNOWN_TOKEN)
        ]
        self.index: Dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.index.get(t, 1) for t in tokens]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class TypingModel:
    """A typing network with its vocabularies and class index.

    ``class_index[i]`` is the cluster id predicted by output unit ``i``; it is
    the identity over ``range(num_classes)``.
    """
    config: TypingModelConfig
    vocabularies: Dict[str, ChannelVocabulary]
    network: MentionTypingNetwork
    class_index: List[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.class_index:
            self.class_index = list(range(self.config.num_classes))

    @property
    def dtype(self) -> torch.dtype:
        return self.network.output.weight.dtype

    def _channel(self, name: str, sequences: Sequence[Sequence[str]]) -> Tuple[torch.Tensor, torch.Tensor]:
        vocab = self.vocabularies[CONTEXT_CHANNEL if name in ("left", "right") else name]
        limit = self.config.max_tokens
        encoded = []
        for tokens in sequences:
            tokens = list(tokens)
            if name == "left":
                tokens = tokens[-limit:] if limit else tokens
            elif name == "right":
                tokens = tokens[:limit][::-1]
            else:
                tokens = tokens[:limit]
            encoded.append(vocab.encode(tokens))
        width = max(1, max((len(ids) for ids in encoded), default=0))
        ids = torch.zeros((len(encoded), width), dtype=torch.long)
        for row, values in enumerate(encoded):
            if values:
                ids[row, :len(values)] = torch.tensor(values, dtype=torch.long)
        lengths = torch.tensor([len(values) for values in encoded], dtype=torch.long)
        return ids, lengths

    def encode(self, instances: Sequence[TypingInstance]) -> Dict[str, Tuple[torch.Tensor, torch.Tensor]]:
        """Tensor batch for the network.

        Raises:
            ContractError: If an instance is not in the model's context format
        """
        expected = self.config.context_format
        for instance in instances:
            if instance.context.format is not expected:
                raise ContractError(
                    f"{self.config.flavor.value} typing model expects {expected.value} windows, "
                    f"got {instance.context.format.value}",
                    operation="predict_types",
                )
        batch = {
            "left": self._channel("left", [i.context.left for i in instances]),
            SURFACE1_CHANNEL: self._channel(SURFACE1_CHANNEL, [i.context.surface for i in instances]),
            "right": self._channel("right", [i.context.right for i in instances]),
        }
        if self.config.surface2:
            batch[SURFACE2_CHANNEL] = self._channel(SURFACE2_CHANNEL, [i.context.surface for i in instances])
        return batch

    def labels(self, instances: Sequence[TypingInstance]) -> torch.Tensor:
        position = {cluster_id: i for i, cluster_id in enumerate(self.class_index)}
        values = []
        for instance in instances:
            if instance.label not in position:
                raise ValidationError(
                    f"Label {instance.label} of {instance.entity_id} outside the model's classes",
                    field="label",
                    value=instance.label,
                )
            values.append(position[instance.label])
        return torch.tensor(values, dtype=torch.long)

    def predict_proba(self, instances: Sequence[TypingInstance], batch_size: int = 512) -> np.ndarray:
        """``(n, k)`` probabilities indexed by cluster id; dropout disabled."""
        self.network.eval()
        outputs = []
        with torch.no_grad():
            for chunk in batch_items(list(instances), batch_size):
                logits = self.network(self.encode(chunk))
                outputs.append(torch.softmax(logits.double(), dim=1).numpy())
        if not outputs:
            return np.zeros((0, self.config.num_classes))
        return np.vstack(outputs)


def _init_embedding(embedding: nn.Embedding, vocab: ChannelVocabulary, table: Optional[EmbeddingTable]) -> int:
    if table is None:
        return 0
    if table.dim != embedding.embedding_dim:
        raise ValidationError(
            f"Embedding table dim {table.dim} does not match model dim {embedding.embedding_dim}",
            field="embedding_dim",
            value=table.dim,
        )
    copied = 0
    with torch.no_grad():
        for token, row in vocab.index.items():
            vector = table.get(token)
            if vector is not None and row > 1:
                embedding.weight[row] = torch.as_tensor(vector, dtype=embedding.weight.dtype)
                copied += 1
    return copied


def build_typing_model(
    config: TypingModelConfig,
    seed: int = 13,
    vocabularies: Optional[Mapping[str, Sequence[str]]] = None,
    tables: Optional[Mapping[str, Optional[EmbeddingTable]]] = None,
) -> TypingModel:
    """Instantiate a typing model.

    Args:
        config: Architecture
        seed: Initialization seed
        vocabularies: channel table name → tokens (training vocabulary)
        tables: channel table name → pretrained vectors used for
            initialization; their tokens join the vocabulary

    Raises:
        ValidationError: On an unknown encoder or an embedding dim mismatch
    """
    tables = dict(tables or {})
    vocabularies = dict(vocabularies or {})
    names = [CONTEXT_CHANNEL, SURFACE1_CHANNEL] + ([SURFACE2_CHANNEL] if config.surface2 else [])
    vocabs: Dict[str, ChannelVocabulary] = {}
    for name in names:
        table = tables.get(name)
        tokens = list(vocabularies.get(name, ())) + (list(table.tokens) if table is not None else [])
        vocabs[name] = ChannelVocabulary(tokens)

    torch.manual_seed(seed)
    network = MentionTypingNetwork(config, {name: len(v) for name, v in vocabs.items()})
    for name in names:
        copied = _init_embedding(network.embeddings[name], vocabs[name], tables.get(name))
        logger.debug("typing_embeddings_initialized", channel=name, vocab=len(vocabs[name]), pretrained=copied)
    return TypingModel(config=config, vocabularies=vocabs, network=network)


def instance_vocabularies(instances: Iterable[TypingInstance], surface2: bool = True) -> Dict[str, List[str]]:
    """Channel vocabularies observed in a dataset."""
    context: Dict[str, None] = {}
    surface: Dict[str, None] = {}
    for instance in instances:
        context.update(dict.fromkeys(instance.context.left))
        context.update(dict.fromkeys(instance.context.right))
        surface.update(dict.fromkeys(instance.context.surface))
    vocabularies = {CONTEXT_CHANNEL: list(context), SURFACE1_CHANNEL: list(surface)}
    if surface2:
        vocabularies[SURFACE2_CHANNEL] = list(surface)
    return vocabularies


def predict_types(model: TypingModel, instance: TypingInstance) -> np.ndarray:
    """Probability vector over the model's cluster ids for one window."""
    return model.predict_proba([instance])[0]


def typing_loss(model: TypingModel, instances: Sequence[TypingInstance], reduction: str = "mean") -> torch.Tensor:
    """Cross-entropy of the model on labeled instances (keeps the graph)."""
    logits = model.network(model.encode(instances))
    return F.cross_entropy(logits, model.labels(instances), reduction=reduction)


def evaluate_typing(model: TypingModel, instances: Sequence[TypingInstance], batch_size: int = 512) -> Dict[str, float]:
    """Micro-F1 (accuracy for single-label data) and mean cross-entropy per instance."""
    instances = [i for i in instances if i.label is not None]
    if not instances:
        return {"micro_f1": 0.0, "avg_loss": 0.0, "instances": 0}
    model.network.eval()
    total_loss = 0.0
    correct = 0
    with torch.no_grad():
        for chunk in batch_items(instances, batch_size):
            logits = model.network(model.encode(chunk))
            labels = model.labels(chunk)
            total_loss += float(F.cross_entropy(logits.double(), labels, reduction="sum"))
            correct += int((logits.argmax(dim=1) == labels).sum())
    return {
        "micro_f1": safe_divide(correct, len(instances)),
        "avg_loss": total_loss / len(instances),
        "instances": len(instances),
    }


def split_dev(
    instances: Sequence[TypingInstance],
    dev_fraction: float,
    seed: int,
) -> Tuple[List[TypingInstance], List[TypingInstance]]:
    """Deterministic train/dev split."""
    order = np.random.default_rng(seed).permutation(len(instances))
    dev_size = int(round(len(instances) * dev_fraction))
    dev_rows = set(order[:dev_size].tolist())
    train = [x for i, x in enumerate(instances) if i not in dev_rows]
    dev = [x for i, x in enumerate(instances) if i in dev_rows]
    return train, dev


def train_typing(
    model: TypingModel,
    train: Sequence[TypingInstance],
    settings: TypingSettings,
    dev: Sequence[TypingInstance] = (),
    seed: int = 13,
    progress: bool = False,
) -> List[Dict[str, float]]:
    """Mini-batch SGD with Nesterov momentum, gradient clipping and weight decay.

    Early stopping on dev loss restores the best parameters.

    Returns:
        Per-epoch history of train loss, dev loss and dev micro-F1

    Raises:
        DataProcessingError: If there are no labeled training instances
        ValidationError: If a label is outside the model's classes
    """
    train = [i for i in train if i.label is not None]
    if not train:
        raise DataProcessingError("Typing training set is empty", operation="train_typing")
    model.labels(train)

    optimizer = torch.optim.SGD(
        model.network.parameters(),
        lr=settings.learning_rate,
        momentum=settings.momentum,
        nesterov=settings.momentum > 0,
        weight_decay=settings.weight_decay,
    )
    generator = torch.Generator().manual_seed(seed)
    history: List[Dict[str, float]] = []
    best_loss = float("inf")
    best_state = None
    stale = 0

    epochs = range(1, settings.epochs + 1)
    if progress:
        epochs = tqdm(epochs, desc=f"typing {model.config.flavor.value}", unit="epoch")
    for epoch in epochs:
        model.network.train()
        order = torch.randperm(len(train), generator=generator).tolist()
        total = 0.0
        for start in range(0, len(order), settings.batch_size):
            chunk = [train[i] for i in order[start:start + settings.batch_size]]
            optimizer.zero_grad()
            loss = typing_loss(model, chunk, reduction="sum")
            (loss / len(chunk)).backward()
            nn.utils.clip_grad_norm_(model.network.parameters(), settings.clip)
            optimizer.step()
            total += float(loss.detach())

        record = {"epoch": epoch, "train_loss": total / len(train)}
        if dev:
            metrics = evaluate_typing(model, dev)
            record.update(dev_loss=metrics["avg_loss"], dev_micro_f1=metrics["micro_f1"])
        history.append(record)
        logger.info("typing_epoch", flavor=model.config.flavor.value, **record)

        if dev:
            if record["dev_loss"] < best_loss:
                best_loss = record["dev_loss"]
                best_state = {k: v.detach().clone() for k, v in model.network.state_dict().items()}
                stale = 0
            else:
                stale += 1
                if stale >= settings.patience:
                    logger.info("typing_early_stop", epoch=epoch, best_dev_loss=best_loss)
                    break

    if best_state is not None:
        model.network.load_state_dict(best_state)
    return history


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_typing_model(model: TypingModel, path: PathLike) -> None:
    """Header, one JSON metadata line, then the torch state dict."""
    config = asdict(model.config)
    config["flavor"] = model.config.flavor.value
    config["encoder"] = model.config.encoder.value
    metadata = {
        "config": config,
        "class_index": model.class_index,
        "vocabularies": {name: vocab.tokens for name, vocab in model.vocabularies.items()},
        "shapes": {k: list(v.shape) for k, v in model.network.state_dict().items()},
    }
    buffer = io.BytesIO()
    torch.save(model.network.state_dict(), buffer)
    payload = (json.dumps(metadata, ensure_ascii=False) + "\n").encode("utf-8") + buffer.getvalue()
    write_binary_artifact(path, "typing_model", payload, flavor=model.config.flavor.value,
                          k=model.config.num_classes, encoder=model.config.encoder.value)
    logger.info("typing_model_saved", path=str(path), flavor=model.config.flavor.value)


def load_typing_model(path: PathLike) -> TypingModel:
    """Inverse of ``save_typing_model``; parameter shapes are validated.

    Raises:
        ArtifactError: On corrupt metadata or mismatching parameter shapes
    """
    _, payload = read_binary_artifact(path, "typing_model")
    newline = payload.find(b"\n")
    try:
        metadata = json.loads(payload[:newline].decode("utf-8"))
        config = TypingModelConfig(**metadata["config"])
    except (ValueError, KeyError, TypeError) as e:
        raise ArtifactError(f"{path}: corrupt typing model metadata: {e}", path=str(path))
    vocabs = {name: ChannelVocabulary(tokens[2:]) for name, tokens in metadata["vocabularies"].items()}
    network = MentionTypingNetwork(config, {name: len(v) for name, v in vocabs.items()})
    state = torch.load(io.BytesIO(payload[newline + 1:]), weights_only=True)
    for name, shape in metadata["shapes"].items():
        if name not in state or list(state[name].shape) != shape:
            raise ArtifactError(f"{path}: parameter {name} does not match shape {shape}", path=str(path))
    try:
        network.load_state_dict(state)
    except RuntimeError as e:
        raise ArtifactError(f"{path}: {e}", path=str(path))
    network.eval()
    return TypingModel(config=config, vocabularies=vocabs, network=network,
                       class_index=list(metadata["class_index"]))


def candidate_type_probabilities(
    probabilities: Mapping[str, np.ndarray],
    clustering: Clustering,
    candidate_sets: Mapping[str, Sequence[str]],
) -> Dict[str, Dict[str, float]]:
    """``P_c`` for every candidate: the probability of its entity's cluster.

    Candidates without a cluster get 0. Mentions without a prediction get no
    row, so feature extraction names them.

    Raises:
        ContractError: If a cluster id lies outside the probability vector
    """
    result: Dict[str, Dict[str, float]] = {}
    for key, candidates in candidate_sets.items():
        probs = probabilities.get(key)
        if probs is None:
            continue
        row: Dict[str, float] = {}
        for entity_id in candidates:
            cluster_id = clustering.cluster_of(entity_id)
            if cluster_id is None:
                row[entity_id] = 0.0
            elif cluster_id >= len(probs):
                raise ContractError(
                    f"{clustering.flavor.value} cluster {cluster_id} of {entity_id} has no probability "
                    f"at mention {key} ({len(probs)} classes)",
                    operation="typing_probabilities",
                )
            else:
                row[entity_id] = float(probs[cluster_id])
        result[key] = row
    return result
