"""Ranking Operations - Features, ranker training, two-stage ranking and replication."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import structlog

from ..config.constants import ClusterFlavor
from ..config.settings import Settings
from ..connectors.artifact_files import read_clustering, read_embeddings
from ..connectors.corpus import read_corpus
from ..connectors.kb import read_kb
from ..connectors.ranking_files import (
    LABEL_COLUMN,
    CandidateSets,
    read_candidates,
    read_features,
    read_rank_scores,
    read_typing_predictions,
    write_features,
    write_predictions,
    write_rank_scores,
    write_table,
)
from ..connectors.surface_forms import read_surface_forms
from ..core.exceptions import ContractError, ValidationError
from ..core.models import Document
from ..processors.embeddings import EntityDocumentIndex
from ..processors.evaluation import gold_map, micro_prf
from ..processors.features import FeatureExtractor
from ..processors.mention_typing import candidate_type_probabilities, load_typing_model
from ..processors.ranker import (
    apply_threshold,
    complete_predictions,
    load_ranker_model,
    ranking_accuracy,
    replicate,
    save_ranker_model,
    split_dev_mentions,
    top_predictions,
    train_ranker,
)
from ..processors.two_stage import (
    build_score_table,
    candidate_id_lists,
    document_similarities,
    entity_typing_probabilities,
    mention_candidates,
    rank_probabilities,
    two_stage_rank,
)
from ..utils.helpers import spawn_seeds

logger = structlog.get_logger(__name__)


def typing_probabilities(
    typing_paths: Sequence[str],
    clustering_paths: Sequence[str],
    candidate_sets: CandidateSets,
) -> Dict[ClusterFlavor, Dict[str, Dict[str, float]]]:
    """flavor → mention key → entity id → P_c, from paired predictions/clusterings.

    Raises:
        ValidationError: If the lists differ in length or a flavor repeats
        ContractError: If a pair disagrees on flavor
    """
    if len(typing_paths) != len(clustering_paths):
        raise ValidationError(
            f"{len(typing_paths)} typing prediction files for {len(clustering_paths)} clusterings",
            field="typing",
        )
    candidates = candidate_id_lists(candidate_sets)
    result: Dict[ClusterFlavor, Dict[str, Dict[str, float]]] = {}
    for typing_path, clustering_path in zip(typing_paths, clustering_paths):
        probabilities, flavor_name = read_typing_predictions(typing_path)
        clustering = read_clustering(clustering_path)
        if flavor_name != clustering.flavor.value:
            raise ContractError(
                f"{typing_path} holds {flavor_name or 'unknown'} predictions but "
                f"{clustering_path} is a {clustering.flavor.value} clustering",
                operation="features",
            )
        if clustering.flavor in result:
            raise ValidationError(f"{clustering.flavor.value} typing given twice", field="typing")
        result[clustering.flavor] = candidate_type_probabilities(probabilities, clustering, candidates)
    return result


def _document_index(
    corpus: Sequence[Document],
    word_embeddings: Optional[str],
    entity_corpus: Optional[str],
) -> Optional[EntityDocumentIndex]:
    if not word_embeddings:
        return None
    source = read_corpus(entity_corpus) if entity_corpus else corpus
    return EntityDocumentIndex.build(source, read_embeddings(word_embeddings))


def run_features(
    settings: Settings,
    corpus_path: str,
    candidates_path: str,
    kb_path: str,
    surface_forms_path: str,
    output_path: str,
    stage: int = 1,
    typing_paths: Sequence[str] = (),
    clustering_paths: Sequence[str] = (),
    word_embeddings: Optional[str] = None,
    entity_corpus: Optional[str] = None,
    rank_scores_path: Optional[str] = None,
    entity_model_path: Optional[str] = None,
    entity_clustering_path: Optional[str] = None,
    entity_embeddings: Optional[str] = None,
) -> Dict:
    """Execute features operation.

    Stage 2 reads the stage-1 rank scores of the same corpus, builds EC
    windows from their top-1 entities and runs the Entity typing model on
    them.

    Args:
        settings: Application settings
        corpus_path: Annotated corpus
        candidates_path: Candidate dump of the corpus
        kb_path: KB artifact
        surface_forms_path: Surface form artifact
        output_path: Feature dump
        stage: 1 or 2
        typing_paths: Stage-1 flavor typing predictions
        clustering_paths: Clusterings paired positionally with ``typing_paths``
        word_embeddings: Word vectors for the entity document similarity
        entity_corpus: Corpus the entity documents are built from (default: this corpus)
        rank_scores_path: Stage-1 rank scores (stage 2)
        entity_model_path: Entity typing model (stage 2)
        entity_clustering_path: Entity clustering (stage 2)
        entity_embeddings: Entity vectors for the context similarity slot (stage 2)

    Returns:
        Dictionary with operation results

    Raises:
        ContractError: If stage 2 lacks its stage-1 scores or Entity typing inputs
    """
    if stage == 2 and not (rank_scores_path and entity_model_path and entity_clustering_path):
        raise ContractError(
            "Stage-2 features need stage-1 rank scores, an Entity typing model and its clustering",
            operation="features",
        )
    logger.info("features_started", corpus=corpus_path, stage=stage, typing=list(typing_paths))

    corpus = read_corpus(corpus_path)
    candidate_sets = read_candidates(candidates_path)
    probabilities = typing_probabilities(typing_paths, clustering_paths, candidate_sets)
    if ClusterFlavor.ENTITY in probabilities:
        raise ContractError("Entity typing is computed from stage-1 rankings, not passed in",
                            operation="features")

    documents = mention_candidates(corpus, candidate_sets)
    doc_sims = document_similarities(corpus, candidate_sets,
                                     _document_index(corpus, word_embeddings, entity_corpus))
    entity_table = None
    if stage == 1:
        scores = build_score_table(documents, probabilities, doc_sims)
    else:
        ranked = read_rank_scores(rank_scores_path)
        entity_probs = entity_typing_probabilities(
            corpus,
            candidate_sets,
            top_predictions(ranked),
            load_typing_model(entity_model_path),
            read_clustering(entity_clustering_path),
            settings.corpus.context_mentions,
        )
        scores = build_score_table(
            documents,
            {**probabilities, ClusterFlavor.ENTITY: entity_probs},
            doc_sims,
            rank_probabilities(ranked),
        )
        entity_table = read_embeddings(entity_embeddings) if entity_embeddings else None

    extractor = FeatureExtractor(
        read_kb(kb_path),
        read_surface_forms(surface_forms_path),
        stage=stage,
        flavors=list(probabilities),
        settings=settings.features,
        entity_table=entity_table,
    )
    df = extractor.extract(documents, scores)
    write_features(df, output_path, stage)

    result = {
        "success": True,
        "stage": stage,
        "rows": len(df),
        "positives": int(df[LABEL_COLUMN].sum()),
        "slots": len(extractor.layout),
        "output_path": str(output_path),
    }
    logger.info("features_completed", **result)
    return result


def run_train_ranker(
    settings: Settings,
    features_path: str,
    output_path: str,
    dev_path: Optional[str] = None,
) -> Dict:
    """Execute train-ranker operation.

    Without a dev feature file a seeded share of the training mentions is
    held out for early stopping.
    """
    train, stage = read_features(features_path)
    seed = settings.runtime.seed
    logger.info("train_ranker_started", features=features_path, stage=stage, rows=len(train))

    if dev_path:
        dev, dev_stage = read_features(dev_path)
        if dev_stage != stage:
            raise ContractError(f"Dev features are stage {dev_stage}, training features stage {stage}",
                                operation="train_ranker")
    else:
        train, dev = split_dev_mentions(train, settings.ranker.dev_fraction, seed)

    model, history = train_ranker(train, settings.ranker, seed, stage, dev, settings.runtime.progress)
    save_ranker_model(model, output_path)

    result = {
        "success": True,
        "stage": stage,
        "train_rows": len(train),
        "dev_rows": len(dev),
        "epochs": len(history),
        "dev_accuracy": ranking_accuracy(model, dev) if not dev.empty else None,
        "history": history,
        "output_path": str(output_path),
    }
    logger.info("train_ranker_completed", stage=stage, epochs=len(history), dev_accuracy=result["dev_accuracy"])
    return result


def run_rank(
    settings: Settings,
    corpus_path: str,
    candidates_path: str,
    kb_path: str,
    surface_forms_path: str,
    stage1_model_path: str,
    out_dir: str,
    typing_paths: Sequence[str] = (),
    clustering_paths: Sequence[str] = (),
    word_embeddings: Optional[str] = None,
    entity_corpus: Optional[str] = None,
    stage2_model_path: Optional[str] = None,
    entity_model_path: Optional[str] = None,
    entity_clustering_path: Optional[str] = None,
    entity_embeddings: Optional[str] = None,
) -> Dict:
    """Execute rank operation.

    Writes per-stage rank scores and top-1 predictions, the final thresholded
    ``predictions.tsv`` and the unthresholded ``predictions.top1.tsv``. Gold
    mentions without candidates appear as abstentions in both.

    Returns:
        Dictionary with written paths and, for annotated corpora, micro scores
    """
    logger.info("rank_started", corpus=corpus_path, two_stage=stage2_model_path is not None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    corpus = read_corpus(corpus_path)
    candidate_sets = read_candidates(candidates_path)
    result_stages = two_stage_rank(
        corpus,
        candidate_sets,
        read_kb(kb_path),
        read_surface_forms(surface_forms_path),
        typing_probabilities(typing_paths, clustering_paths, candidate_sets),
        load_ranker_model(stage1_model_path),
        settings,
        doc_index=_document_index(corpus, word_embeddings, entity_corpus),
        stage2_model=load_ranker_model(stage2_model_path) if stage2_model_path else None,
        entity_model=load_typing_model(entity_model_path) if entity_model_path else None,
        entity_clustering=read_clustering(entity_clustering_path) if entity_clustering_path else None,
        entity_table=read_embeddings(entity_embeddings) if entity_embeddings else None,
    )

    files: Dict[str, str] = {}
    write_rank_scores(result_stages.stage1_ranked, out / "stage1.scores.tsv", stage=1)
    write_predictions(result_stages.stage1_predictions, out / "stage1.predictions.tsv", stage=1)
    files["stage1_scores"] = str(out / "stage1.scores.tsv")
    files["stage1_predictions"] = str(out / "stage1.predictions.tsv")
    if result_stages.stage2_ranked is not None:
        write_rank_scores(result_stages.stage2_ranked, out / "stage2.scores.tsv", stage=2)
        write_predictions(result_stages.stage2_predictions, out / "stage2.predictions.tsv", stage=2)
        files["stage2_scores"] = str(out / "stage2.scores.tsv")
        files["stage2_predictions"] = str(out / "stage2.predictions.tsv")

    golds = gold_map(corpus)
    threshold = settings.ranker.threshold
    top1 = complete_predictions(result_stages.predictions, golds)
    final = complete_predictions(apply_threshold(result_stages.predictions, threshold), golds)
    write_predictions(final, out / "predictions.tsv", threshold=threshold)
    write_predictions(top1, out / "predictions.top1.tsv")
    files["predictions"] = str(out / "predictions.tsv")
    files["predictions_top1"] = str(out / "predictions.top1.tsv")

    scores = micro_prf(final, golds) if any(g is not None for g in golds.values()) else {}
    result = {
        "success": True,
        "stages": 2 if result_stages.stage2_ranked is not None else 1,
        "mentions": len(final),
        "abstentions": sum(1 for p in final if p.entity_id is None),
        "threshold": threshold,
        "files": files,
        **scores,
    }
    logger.info("rank_completed", stages=result["stages"], mentions=result["mentions"],
                abstentions=result["abstentions"], f1=scores.get("f1"))
    return result


def run_replicate(
    settings: Settings,
    train_features: str,
    test_features: str,
    corpus_path: str,
    seeds: int = 20,
    output_path: Optional[str] = None,
) -> Dict:
    """Execute replicate operation: retrain the ranker per seed, report mean ± sd.

    Seeds derive from the runtime seed, so a rerun repeats the same table.
    """
    train, stage = read_features(train_features)
    test, test_stage = read_features(test_features)
    if test_stage != stage:
        raise ContractError(f"Test features are stage {test_stage}, training features stage {stage}",
                            operation="replicate")
    logger.info("replicate_started", stage=stage, seeds=seeds)

    table = replicate(
        train,
        test,
        gold_map(read_corpus(corpus_path)),
        spawn_seeds(settings.runtime.seed, seeds),
        settings.ranker,
        stage,
        settings.runtime.progress,
    )
    if output_path:
        write_table(table, output_path, "replication", stage=stage)

    summary: Dict[str, float] = {}
    for column in ("precision", "recall", "f1"):
        summary[f"{column}_mean"] = float(table[column].mean())
        summary[f"{column}_sd"] = float(table[column].std(ddof=1)) if len(table) > 1 else 0.0
    rows: List[Dict] = table.to_dict(orient="records")
    result = {"success": True, "stage": stage, "seeds": len(rows), "rows": rows,
              "output_path": output_path, **summary}
    logger.info("replicate_completed", stage=stage, seeds=len(rows), **summary)
    return result
