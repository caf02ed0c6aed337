"""Mention Typing Operations - Datasets, training and prediction."""

from typing import Dict, List, Optional

import structlog

from ..config.settings import Settings
from ..connectors.artifact_files import (
    read_clustering,
    read_embeddings,
    read_typing_dataset,
    write_typing_dataset,
)
from ..connectors.corpus import read_corpus
from ..connectors.ranking_files import read_rank_scores, write_typing_predictions
from ..core.exceptions import ContractError, ValidationError
from ..core.models import EmbeddingTable, TypingInstance
from ..processors.contexts import build_inference_windows, build_typing_dataset, format_for
from ..processors.mention_typing import (
    CONTEXT_CHANNEL,
    SURFACE1_CHANNEL,
    SURFACE2_CHANNEL,
    TypingModelConfig,
    build_typing_model,
    evaluate_typing,
    instance_vocabularies,
    load_typing_model,
    save_typing_model,
    split_dev,
    train_typing,
)
from ..processors.ranker import top_predictions
from ..processors.two_stage import first_stage_entities

logger = structlog.get_logger(__name__)


def run_build_typing_data(
    settings: Settings,
    corpus_path: str,
    clustering_path: str,
    output_path: str,
) -> Dict:
    """Execute build-typing-data operation.

    The context format follows the clustering flavor (Word/Synset → WC,
    Surface/Brown → SFC, Entity → EC).
    """
    clustering = read_clustering(clustering_path)
    context_format = format_for(clustering.flavor)
    logger.info("build_typing_data_started", flavor=clustering.flavor.value, format=context_format.value)

    instances, skipped = build_typing_dataset(
        read_corpus(corpus_path),
        clustering,
        context_format,
        settings.corpus.context_mentions,
        settings.corpus.min_sentence_words,
        settings.corpus.max_sentence_words,
    )
    count = write_typing_dataset(instances, output_path, clustering.flavor, context_format)

    result = {
        "success": True,
        "flavor": clustering.flavor.value,
        "format": context_format.value,
        "instances": count,
        "skipped": skipped,
        "output_path": str(output_path),
    }
    logger.info("build_typing_data_completed", instances=count, **{f"skipped_{k}": v for k, v in skipped.items()})
    return result


def _embedding_dim(tables: Dict[str, EmbeddingTable], default: int) -> int:
    dims = {table.dim for table in tables.values()}
    if len(dims) > 1:
        raise ValidationError(f"Channel embedding tables disagree on dim: {sorted(dims)}", field="embedding_dim")
    return dims.pop() if dims else default


def run_train_typing(
    settings: Settings,
    dataset_path: str,
    clustering_path: str,
    output_path: str,
    dev_path: Optional[str] = None,
    context_embeddings: Optional[str] = None,
    surface_embeddings: Optional[str] = None,
    surface2_embeddings: Optional[str] = None,
    surface2: bool = True,
) -> Dict:
    """Execute train-typing operation.

    Args:
        settings: Application settings
        dataset_path: Typing dataset written by build-typing-data
        clustering_path: The clustering that labeled the dataset (gives k)
        output_path: Model file
        dev_path: Optional dev dataset; otherwise a seeded split of the training set
        context_embeddings: Vectors for the left/right channel tokens
        surface_embeddings: Vectors for the first surface channel (cluster-centric words)
        surface2_embeddings: Vectors for the second surface channel (surface-form words)
        surface2: Whether the model has the second surface channel

    Returns:
        Dictionary with the training history and dev metrics

    Raises:
        ContractError: If the dataset and the clustering are of different flavors
    """
    instances, flavor, context_format = read_typing_dataset(dataset_path)
    clustering = read_clustering(clustering_path)
    if clustering.flavor is not flavor:
        raise ContractError(
            f"Dataset is {flavor.value} but the clustering is {clustering.flavor.value}",
            operation="train_typing",
        )
    cfg = settings.typing
    seed = settings.runtime.seed
    logger.info("train_typing_started", flavor=flavor.value, instances=len(instances), encoder=cfg.encoder.value)

    if dev_path:
        train = instances
        dev, _, _ = read_typing_dataset(dev_path)
    else:
        train, dev = split_dev(instances, cfg.dev_fraction, seed)

    tables = {
        name: read_embeddings(path)
        for name, path in (
            (CONTEXT_CHANNEL, context_embeddings),
            (SURFACE1_CHANNEL, surface_embeddings),
            (SURFACE2_CHANNEL, surface2_embeddings if surface2 else None),
        )
        if path
    }
    config = TypingModelConfig(
        flavor=flavor,
        num_classes=clustering.k,
        encoder=cfg.encoder,
        hidden=cfg.hidden,
        dropout=cfg.dropout,
        embedding_dim=_embedding_dim(tables, settings.embeddings.dim),
        surface2=surface2,
        max_tokens=cfg.max_tokens,
    )
    model = build_typing_model(config, seed, instance_vocabularies(train, surface2), tables)
    history = train_typing(model, train, cfg, dev, seed, settings.runtime.progress)
    save_typing_model(model, output_path)

    metrics = evaluate_typing(model, dev) if dev else {}
    result = {
        "success": True,
        "flavor": flavor.value,
        "format": context_format.value,
        "train_instances": len(train),
        "dev_instances": len(dev),
        "epochs": len(history),
        "history": history,
        "dev_micro_f1": metrics.get("micro_f1"),
        "dev_avg_loss": metrics.get("avg_loss"),
        "output_path": str(output_path),
    }
    logger.info("train_typing_completed", flavor=flavor.value, epochs=len(history),
                dev_micro_f1=result["dev_micro_f1"])
    return result


def run_predict_typing(
    settings: Settings,
    model_path: str,
    output_path: str,
    dataset_path: Optional[str] = None,
    corpus_path: Optional[str] = None,
    rank_scores_path: Optional[str] = None,
) -> Dict:
    """Execute predict-typing operation.

    Windows come from a typing dataset or are built from every mention of an
    annotated corpus. EC windows from a corpus use the gold entities, or the
    top-1 entities of a stage-1 ranking when its scores are given.

    Raises:
        ValidationError: If neither input is given or a row has no mention key
        ContractError: If the dataset flavor differs from the model's
    """
    model = load_typing_model(model_path)
    flavor = model.config.flavor
    logger.info("predict_typing_started", flavor=flavor.value, model=model_path)

    instances: List[TypingInstance]
    if dataset_path:
        instances, dataset_flavor, _ = read_typing_dataset(dataset_path)
        if dataset_flavor is not flavor:
            raise ContractError(
                f"{flavor.value} typing model cannot score a {dataset_flavor.value} dataset",
                operation="predict_types",
            )
    elif corpus_path:
        corpus = read_corpus(corpus_path)
        entity_ids = None
        if rank_scores_path:
            entity_ids = first_stage_entities(corpus, top_predictions(read_rank_scores(rank_scores_path)))
        instances = list(build_inference_windows(corpus, model.config.context_format,
                                                 settings.corpus.context_mentions, entity_ids))
    else:
        raise ValidationError("predict-typing needs a dataset or a corpus", field="input")

    missing = [i for i, instance in enumerate(instances) if not instance.mention_key]
    if missing:
        raise ValidationError(f"{len(missing)} windows lack a mention key (first row {missing[0]})",
                              field="mention_key")
    probabilities = model.predict_proba(instances)
    count = write_typing_predictions(
        {instance.mention_key: probabilities[i] for i, instance in enumerate(instances)},
        output_path,
        flavor.value,
    )

    labeled = [i for i in instances if i.label is not None]
    metrics = evaluate_typing(model, labeled) if labeled else {}
    result = {
        "success": True,
        "flavor": flavor.value,
        "predictions": count,
        "micro_f1": metrics.get("micro_f1"),
        "avg_loss": metrics.get("avg_loss"),
        "output_path": str(output_path),
    }
    logger.info("predict_typing_completed", **result)
    return result
