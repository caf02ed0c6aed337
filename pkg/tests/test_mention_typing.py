"""Tests for the mention typing model."""

import random

import numpy as np
import pytest
import torch
from torch.autograd import gradcheck
from torch.func import functional_call

from src.config import ClusterFlavor, ContextFormat, EncoderKind
from src.config.settings import TypingSettings
from src.core.exceptions import ContractError, DataProcessingError, ValidationError
from src.core.models import Clustering, ContextWindow, TypingInstance
from src.processors.mention_typing import (
    MeanEncoder,
    RecurrentEncoder,
    TypingModelConfig,
    build_typing_model,
    candidate_type_probabilities,
    evaluate_typing,
    instance_vocabularies,
    load_typing_model,
    save_typing_model,
    split_dev,
    train_typing,
    typing_loss,
)

FILLER = ["the", "a", "in", "at", "won", "played", "city", "game", "team", "hotel"]


def sfc_instance(rng: random.Random, label: int, index: int) -> TypingInstance:
    surface = ("alpha",) if label == 0 else ("beta",)
    window = ContextWindow(
        tuple(rng.choices(FILLER, k=rng.randint(0, 4))),
        surface,
        tuple(rng.choices(FILLER, k=rng.randint(0, 4))),
        ContextFormat.SFC,
    )
    return TypingInstance(window, label, f"E{label}", f"doc{index}::0")


def separable_dataset(seed: int, n: int):
    rng = random.Random(seed)
    return [sfc_instance(rng, i % 2, i) for i in range(n)]


def small_config(encoder: EncoderKind = EncoderKind.MEAN, surface2: bool = True) -> TypingModelConfig:
    return TypingModelConfig(flavor=ClusterFlavor.SURFACE, num_classes=2, encoder=encoder,
                             hidden=8, dropout=0.0, embedding_dim=6, surface2=surface2)


def test_encoders_pass_gradcheck():
    torch.manual_seed(0)
    embedded = torch.randn(3, 4, 5, dtype=torch.double, requires_grad=True)
    lengths = torch.tensor([4, 2, 1])
    for encoder in (MeanEncoder(5, 3), RecurrentEncoder(5, 3, bidirectional=True),
                    RecurrentEncoder(5, 3, bidirectional=False)):
        encoder = encoder.double()
        assert gradcheck(lambda x: encoder(x, lengths), (embedded,), eps=1e-6, atol=1e-5)


def window_instances():
    windows = [
        ContextWindow(("the", "city"), ("alpha",), ("won", "a", "game"), ContextFormat.SFC),
        ContextWindow(("team",), ("beta", "alpha"), ("hotel", "in"), ContextFormat.SFC),
        ContextWindow((), ("beta",), ("played",), ContextFormat.SFC),
    ]
    return [TypingInstance(w, i % 2, f"E{i}", f"d::{i}") for i, w in enumerate(windows)]


@pytest.mark.parametrize("encoder", [EncoderKind.MEAN, EncoderKind.RECURRENT])
def test_whole_network_passes_gradcheck(encoder):
    instances = window_instances()
    model = build_typing_model(small_config(encoder), seed=2, vocabularies=instance_vocabularies(instances))
    network = model.network.double()
    batch = model.encode(instances)
    names = ("embeddings.context.weight", "embeddings.surface1.weight")
    parameters = dict(network.named_parameters())
    weights = tuple(parameters[name].detach().clone().requires_grad_(True) for name in names)

    def log_probabilities(context, surface):
        logits = functional_call(network, {names[0]: context, names[1]: surface}, (batch,))
        return torch.log_softmax(logits, dim=1)

    assert gradcheck(log_probabilities, weights, eps=1e-6, atol=1e-5)


def test_right_context_is_read_from_the_far_end():
    [instance] = window_instances()[:1]
    model = build_typing_model(small_config(), seed=2, vocabularies=instance_vocabularies([instance]))
    batch = model.encode([instance])
    vocab = model.vocabularies["context"]
    assert batch["right"][0][0].tolist() == vocab.encode(["game", "a", "won"])
    assert batch["left"][0][0].tolist() == vocab.encode(["the", "city"])


def test_recurrent_encoder_is_order_sensitive():
    torch.manual_seed(1)
    embedded = torch.randn(1, 4, 5, dtype=torch.double)
    permuted = embedded[:, [2, 0, 3, 1], :]
    lengths = torch.tensor([4])
    recurrent = RecurrentEncoder(5, 3, bidirectional=True).double()
    mean = MeanEncoder(5, 3).double()
    assert not torch.allclose(recurrent(embedded, lengths), recurrent(permuted, lengths))
    torch.testing.assert_close(mean(embedded, lengths), mean(permuted, lengths))

    forward = TypingInstance(ContextWindow(("the", "city", "team"), ("alpha",), (), ContextFormat.SFC), None, "", "d::0")
    backward = TypingInstance(ContextWindow(("team", "city", "the"), ("alpha",), (), ContextFormat.SFC), None, "", "d::1")
    model = build_typing_model(small_config(EncoderKind.RECURRENT), seed=4,
                               vocabularies=instance_vocabularies([forward, backward]))
    first, second = model.predict_proba([forward, backward])
    assert not np.allclose(first, second)


@pytest.mark.parametrize("encoder", [EncoderKind.MEAN, EncoderKind.RECURRENT])
def test_probabilities_sum_to_one_with_empty_channels(encoder):
    train = separable_dataset(1, 10)
    model = build_typing_model(small_config(encoder), seed=3, vocabularies=instance_vocabularies(train))
    empty = TypingInstance(ContextWindow((), (), (), ContextFormat.SFC), None, "", "d::0")
    unknown = TypingInstance(ContextWindow(("zzz",), ("qqq",), (), ContextFormat.SFC), None, "", "d::1")
    probabilities = model.predict_proba([empty, unknown] + train)
    assert probabilities.shape == (12, 2)
    np.testing.assert_allclose(probabilities.sum(axis=1), 1.0, atol=1e-9)


def test_training_learns_a_separable_dataset():
    train = separable_dataset(2, 200)
    dev = separable_dataset(3, 40)
    settings = TypingSettings(hidden=8, dropout=0.0, learning_rate=0.1, batch_size=20, epochs=20, patience=3)
    model = build_typing_model(small_config(), seed=5, vocabularies=instance_vocabularies(train))
    history = train_typing(model, train, settings, dev, seed=5)
    assert history
    assert evaluate_typing(model, dev)["micro_f1"] >= 0.95


def test_training_is_seeded():
    train = separable_dataset(4, 40)
    settings = TypingSettings(dropout=0.0, epochs=2, batch_size=10)

    def run():
        model = build_typing_model(small_config(EncoderKind.RECURRENT), seed=9,
                                   vocabularies=instance_vocabularies(train))
        train_typing(model, train, settings, seed=9)
        return model.predict_proba(train)

    np.testing.assert_array_equal(run(), run())


def test_loss_backpropagates_to_every_channel():
    train = separable_dataset(5, 8)
    model = build_typing_model(small_config(), seed=1, vocabularies=instance_vocabularies(train))
    typing_loss(model, train).backward()
    for name in ("context", "surface1", "surface2"):
        assert model.network.embeddings[name].weight.grad is not None


def test_label_outside_classes_and_empty_training_fail():
    model = build_typing_model(small_config(), seed=1)
    bad = TypingInstance(ContextWindow((), ("x",), (), ContextFormat.SFC), 5, "E", "d::0")
    with pytest.raises(ValidationError):
        train_typing(model, [bad], TypingSettings())
    unlabeled = TypingInstance(ContextWindow((), ("x",), (), ContextFormat.SFC), None, "E", "d::0")
    with pytest.raises(DataProcessingError):
        train_typing(model, [unlabeled], TypingSettings())


def test_wrong_context_format_is_a_contract_error():
    model = build_typing_model(small_config(), seed=1)
    wc = TypingInstance(ContextWindow((), ("x",), (), ContextFormat.WC), None, "E", "d::0")
    with pytest.raises(ContractError):
        model.predict_proba([wc])


def test_config_rejects_unsupported_encoders():
    with pytest.raises(ValidationError):
        TypingModelConfig(flavor=ClusterFlavor.WORD, num_classes=2, encoder="cnn")
    with pytest.raises(ValidationError):
        TypingModelConfig(flavor=ClusterFlavor.WORD, num_classes=1)


def test_saved_model_predicts_the_same(tmp_path):
    train = separable_dataset(6, 12)
    model = build_typing_model(small_config(surface2=False), seed=2, vocabularies=instance_vocabularies(train, False))
    path = tmp_path / "surface.typing"
    save_typing_model(model, path)
    loaded = load_typing_model(path)
    assert loaded.config.flavor is ClusterFlavor.SURFACE
    assert not loaded.config.surface2
    np.testing.assert_allclose(loaded.predict_proba(train), model.predict_proba(train))


def test_split_dev_is_deterministic():
    data = separable_dataset(7, 50)
    train, dev = split_dev(data, 0.2, seed=3)
    assert len(dev) == 10 and len(train) == 40
    assert split_dev(data, 0.2, seed=3)[1] == dev


def test_candidate_type_probabilities():
    clustering = Clustering(ClusterFlavor.WORD, 3, {"A": 0, "B": 2})
    probabilities = {"d::0": np.array([0.5, 0.2, 0.3])}
    result = candidate_type_probabilities(probabilities, clustering, {"d::0": ["A", "B", "C"], "d::1": ["A"]})
    assert result["d::0"] == {"A": 0.5, "B": 0.3, "C": 0.0}
    # no prediction for d::1, so no row
    assert "d::1" not in result
    wider = Clustering(ClusterFlavor.WORD, 5, {"A": 4})
    with pytest.raises(ContractError):
        candidate_type_probabilities(probabilities, wider, {"d::0": ["A"]})
