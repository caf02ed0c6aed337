"""Representation Operations - Training streams, embeddings and clusterings."""

from pathlib import Path
from typing import Dict, Optional

import structlog

from ..config.constants import ClusterFlavor, TrainingMode
from ..config.settings import Settings
from ..connectors.artifact_files import (
    pairs_source,
    read_clustering,
    read_embeddings,
    read_pairs,
    read_stream,
    write_clustering,
    write_embeddings,
    write_pairs,
    write_stream,
)
from ..connectors.cooccurrence import read_cooccurrence
from ..connectors.corpus import read_corpus
from ..connectors.kb import read_kb
from ..connectors.surface_forms import read_surface_forms
from ..core.exceptions import ValidationError
from ..core.models import Clustering
from ..processors.clustering import brown_cluster, kmeans, restrict_to_entities
from ..processors.contexts import (
    build_cluster_centric_stream,
    build_cooccurrence_pairs,
    build_ec_training_stream,
    build_sf_word_pairs,
    build_sfc_pairs,
    build_synset_pairs,
    build_wc_training_stream,
)
from ..processors.embeddings import train_pair_sgns, train_window_sgns

logger = structlog.get_logger(__name__)

# Pair sources trained with their own iteration count
PAIR_EPOCHS = {
    "synset": "synset_epochs",
    "cooccurrence": "cooccurrence_epochs",
}


def run_build_streams(
    settings: Settings,
    corpus_path: str,
    kb_path: str,
    out_dir: str,
    cooccurrence_path: Optional[str] = None,
    clustering_path: Optional[str] = None,
    surface_forms_path: Optional[str] = None,
) -> Dict:
    """Execute build-streams operation.

    Always writes ``wc.stream``, ``ec.stream``, ``sfc.pairs`` and
    ``synset.pairs``; ``cooccurrence.pairs`` needs a cooccurrence table.
    With a Word clustering the cluster-centric ``cc.stream`` is written too,
    plus ``sf_words.pairs`` when the surface forms are given.

    Returns:
        Dictionary with the written files and their line counts
    """
    logger.info("build_streams_started", corpus=corpus_path, out_dir=out_dir)
    out = Path(out_dir)
    corpus = read_corpus(corpus_path)
    kb = read_kb(kb_path)
    context_mentions = settings.corpus.context_mentions

    written: Dict[str, int] = {}
    written["wc.stream"] = write_stream(build_wc_training_stream(corpus), out / "wc.stream", source="wc")
    written["ec.stream"] = write_stream(build_ec_training_stream(corpus), out / "ec.stream", source="ec")
    written["sfc.pairs"] = write_pairs(build_sfc_pairs(corpus, context_mentions), out / "sfc.pairs",
                                       source="sfc")
    written["synset.pairs"] = write_pairs(build_synset_pairs(kb), out / "synset.pairs", source="synset")
    if cooccurrence_path:
        table = read_cooccurrence(cooccurrence_path)
        written["cooccurrence.pairs"] = write_pairs(build_cooccurrence_pairs(table),
                                                    out / "cooccurrence.pairs", source="cooccurrence")
    if clustering_path:
        clustering = read_clustering(clustering_path)
        written["cc.stream"] = write_stream(build_cluster_centric_stream(corpus, clustering),
                                            out / "cc.stream", source="cluster_centric")
        if surface_forms_path:
            store = read_surface_forms(surface_forms_path)
            written["sf_words.pairs"] = write_pairs(build_sf_word_pairs(store, clustering),
                                                    out / "sf_words.pairs", source="sf_words")

    result = {
        "success": True,
        "out_dir": str(out),
        "files": written,
    }
    logger.info("build_streams_completed", **written)
    return result


def run_embed(
    settings: Settings,
    input_path: str,
    output_path: str,
    mode: TrainingMode = TrainingMode.WINDOW,
    epochs: Optional[int] = None,
) -> Dict:
    """Execute embed operation.

    Window mode trains on a token stream; pair mode on explicit pairs, with
    the synset and cooccurrence pair files defaulting to their own epoch
    counts.
    """
    cfg = settings.embeddings
    runtime = settings.runtime
    logger.info("embed_started", input=input_path, mode=mode.value)

    if mode is TrainingMode.WINDOW:
        epochs = epochs or cfg.epochs
        table = train_window_sgns(
            read_stream(input_path),
            dim=cfg.dim,
            window=cfg.window,
            negatives=cfg.negatives,
            epochs=epochs,
            min_count=cfg.min_count,
            seed=runtime.seed,
            learning_rate=cfg.learning_rate,
            jobs=runtime.jobs,
            deterministic=runtime.deterministic,
            progress=runtime.progress,
        )
    else:
        source = pairs_source(input_path)
        epochs = epochs or getattr(cfg, PAIR_EPOCHS.get(source, "epochs"))
        table = train_pair_sgns(
            read_pairs(input_path),
            dim=cfg.dim,
            negatives=cfg.negatives,
            epochs=epochs,
            seed=runtime.seed,
            learning_rate=cfg.learning_rate,
            min_count=cfg.min_count,
            jobs=runtime.jobs,
            deterministic=runtime.deterministic,
            progress=runtime.progress,
        )
    write_embeddings(table, output_path)

    result = {
        "success": True,
        "mode": mode.value,
        "epochs": epochs,
        "vocab": len(table),
        "dim": table.dim,
        "final_loss": table.metadata.get("final_loss"),
        "output_path": str(output_path),
    }
    logger.info("embed_completed", **result)
    return result


def _restrict(clustering: Clustering, entity_ids) -> Clustering:
    kept = {token: cid for token, cid in clustering.assignment.items() if token in entity_ids}
    if not kept:
        raise ValidationError("No clustered token is a KB entity", field="assignment")
    return Clustering(flavor=clustering.flavor, k=clustering.k, assignment=kept)


def run_cluster(
    settings: Settings,
    flavor: ClusterFlavor,
    output_path: str,
    embeddings_path: Optional[str] = None,
    stream_path: Optional[str] = None,
    kb_path: Optional[str] = None,
    k: Optional[int] = None,
) -> Dict:
    """Execute cluster operation.

    The Brown flavor clusters an entity-context stream; every other flavor
    runs K-means on an embedding table. With a KB only entity rows are
    clustered (joint word/entity tables) or kept (Brown).

    Raises:
        ValidationError: If the input matching the flavor is missing
    """
    k = k or settings.clustering.k
    logger.info("cluster_started", flavor=flavor.value, k=k)
    kb = read_kb(kb_path) if kb_path else None

    if flavor is ClusterFlavor.BROWN:
        if not stream_path:
            raise ValidationError("Brown clustering needs an entity-context stream", field="stream")
        clustering = brown_cluster(read_stream(stream_path), k, flavor)
        if kb is not None:
            clustering = _restrict(clustering, set(kb.ids()))
    else:
        if not embeddings_path:
            raise ValidationError(f"{flavor.value} clustering needs an embedding table", field="embeddings")
        table = read_embeddings(embeddings_path)
        if kb is not None:
            table = restrict_to_entities(table, kb)
        clustering = kmeans(
            table,
            k,
            seed=settings.runtime.seed,
            flavor=flavor,
            max_iterations=settings.clustering.max_iterations,
            change_tolerance=settings.clustering.change_tolerance,
            jobs=settings.runtime.jobs,
        )
    write_clustering(clustering, output_path)

    sizes = [len(members) for members in clustering.members().values()]
    result = {
        "success": True,
        "flavor": flavor.value,
        "k": clustering.k,
        "clustered": len(clustering.assignment),
        "non_empty_clusters": len(sizes),
        "largest_cluster": max(sizes),
        "output_path": str(output_path),
    }
    logger.info("cluster_completed", **result)
    return result
