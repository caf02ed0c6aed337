"""End-to-end run over the synthetic fixture."""

from pathlib import Path

import pytest

from src.config import ClusterFlavor, TrainingMode, get_settings
from src.connectors.corpus import read_corpus
from src.connectors.ranking_files import read_predictions
from src.operations import (
    run_build_streams,
    run_build_typing_data,
    run_candgen,
    run_cluster,
    run_embed,
    run_evaluate,
    run_features,
    run_ingest,
    run_mine_coocc,
    run_predict_typing,
    run_rank,
    run_synth_fixture,
    run_train_ranker,
    run_train_typing,
)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def work(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("pipeline")


def test_two_stage_pipeline(work):
    fixture = work / "fixture"
    data = work / "data"
    run_synth_fixture(get_settings(), str(fixture), seed=13, train_docs=60, test_docs=15)
    settings = get_settings(fixture / "config.ini", {"embeddings": {"epochs": 3, "cooccurrence_epochs": 3},
                                                     "typing": {"epochs": 5},
                                                     "ranker": {"epochs": 15}})

    ingested = run_ingest(settings, str(fixture / "kb.tsv"), str(fixture / "surface_forms.tsv"), str(data),
                          [str(fixture / "train.txt"), str(fixture / "test.txt")], str(fixture / "types.tsv"))
    kb, store = ingested["kb_path"], ingested["surface_forms_path"]
    train, test = str(data / "train.corpus"), str(data / "test.corpus")
    assert ingested["corpora"][0]["auto_mentions"] > 0
    run_mine_coocc(settings, [train], str(data / "cooccurrence.tsv"))
    streams = run_build_streams(settings, train, kb, str(data / "streams"), str(data / "cooccurrence.tsv"))
    assert streams["files"]["sfc.pairs"] > 0

    # Surface typing for stage 1, Entity typing for stage 2
    run_embed(settings, str(data / "streams" / "sfc.pairs"), str(data / "surface.vec"), TrainingMode.PAIR)
    run_embed(settings, str(data / "streams" / "ec.stream"), str(data / "entity.vec"), TrainingMode.WINDOW)
    surface_clusters, entity_clusters = str(data / "surface.clusters"), str(data / "entity.clusters")
    run_cluster(settings, ClusterFlavor.SURFACE, surface_clusters, str(data / "surface.vec"), kb_path=kb)
    run_cluster(settings, ClusterFlavor.ENTITY, entity_clusters, str(data / "entity.vec"), kb_path=kb)

    for flavor, clusters in (("surface", surface_clusters), ("entity", entity_clusters)):
        built = run_build_typing_data(settings, train, clusters, str(data / f"{flavor}.dataset"))
        assert built["instances"] > 0
        trained = run_train_typing(settings, str(data / f"{flavor}.dataset"), clusters, str(data / f"{flavor}.typing"))
        assert trained["epochs"] >= 1
    for name, corpus in (("train", train), ("test", test)):
        predicted = run_predict_typing(settings, str(data / "surface.typing"), str(data / f"{name}.surface.probs"),
                                       corpus_path=corpus)
        assert predicted["predictions"] == sum(len(d.mentions) for d in read_corpus(corpus))

    recall_paths = {}
    for name, corpus in (("train", train), ("test", test)):
        generated = run_candgen(settings, corpus, kb, store, str(data / f"{name}.candidates"),
                                cooccurrence_path=str(data / "cooccurrence.tsv"),
                                first_names_path=str(fixture / "first_names.txt"),
                                surnames_path=str(fixture / "surnames.txt"))
        assert 50.0 < generated["gold_recall"]["stage1"] <= 100.0
        recall_paths[name] = generated["recall_path"]

    typing = dict(typing_paths=[str(data / "train.surface.probs")], clustering_paths=[surface_clusters])
    run_features(settings, train, str(data / "train.candidates"), kb, store, str(data / "train.f1"), stage=1, **typing)
    stage1 = run_train_ranker(settings, str(data / "train.f1"), str(data / "stage1.ranker"))
    assert stage1["stage"] == 1

    # stage-1 scores of the training corpus feed the stage-2 features
    run_rank(settings, train, str(data / "train.candidates"), kb, store, str(data / "stage1.ranker"),
             str(data / "train.ranked"), **typing)
    run_features(settings, train, str(data / "train.candidates"), kb, store, str(data / "train.f2"), stage=2,
                 rank_scores_path=str(data / "train.ranked" / "stage1.scores.tsv"),
                 entity_model_path=str(data / "entity.typing"), entity_clustering_path=entity_clusters, **typing)
    assert run_train_ranker(settings, str(data / "train.f2"), str(data / "stage2.ranker"))["stage"] == 2

    test_typing = dict(typing_paths=[str(data / "test.surface.probs")], clustering_paths=[surface_clusters])
    ranked = run_rank(settings, test, str(data / "test.candidates"), kb, store, str(data / "stage1.ranker"),
                      str(data / "test.ranked"), stage2_model_path=str(data / "stage2.ranker"),
                      entity_model_path=str(data / "entity.typing"), entity_clustering_path=entity_clusters,
                      **test_typing)
    assert ranked["stages"] == 2
    test_mentions = sum(len(d.mentions) for d in read_corpus(test))
    assert ranked["mentions"] == test_mentions
    predictions = read_predictions(ranked["files"]["predictions"])
    assert len(predictions) == test_mentions

    evaluated = run_evaluate(settings, test, ranked["files"]["predictions"], str(work / "test.eval"),
                             unthresholded_path=ranked["files"]["predictions_top1"],
                             recall_path=recall_paths["test"])
    row = evaluated["row"]
    assert 0.0 <= row["precision"] <= 1.0
    assert row["f1"] > 0.3
    assert row["inkb_accuracy"] >= row["recall"]
    assert "gold_recall_stage1" in row
