"""Cluster-typing NED toolkit - CLI Entry Point.

This module provides the command-line interface of the entity disambiguation
pipeline. Every subcommand reads explicit artifact paths and writes explicit
artifact paths; nothing is cached behind the user's back.

Pipeline:
    ingest → mine-coocc → build-streams → embed → cluster → agccs / select-combo
    → build-typing-data → train-typing → predict-typing → candgen → features
    → train-ranker → rank → evaluate / randtest / report

Example:
    $ python main.py synth-fixture work/fixture
    $ python main.py --config work/fixture/config.ini ingest work/fixture/kb.tsv \\
        work/fixture/surface_forms.tsv work/data --corpus work/fixture/train.txt
    $ python main.py candgen work/data/train.corpus work/data/kb.tsv \\
        work/data/surface_forms.tsv work/train.candidates --T 0.6 --N 100
"""

import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional

# Ensure src is in path
sys.path.insert(0, str(Path(__file__).parent))

import typer
from rich.console import Console
from rich.table import Table

from src.config import ClusterFlavor, Settings, TrainingMode, get_settings
from src.operations import (
    run_agccs,
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
    run_randtest,
    run_rank,
    run_replicate,
    run_report,
    run_select_combo,
    run_synth_fixture,
    run_train_ranker,
    run_train_typing,
    run_validate_config,
)
from src.utils import get_logger, setup_file_logging

# Initialize Typer app
app = typer.Typer(
    name="ned",
    help="Cluster-based mention typing for named entity disambiguation",
    rich_markup_mode="rich",
    no_args_is_help=True,
)

# Initialize console for rich output
console = Console()


def _settings(ctx: typer.Context, overrides: Optional[Mapping[str, Mapping[str, object]]] = None) -> Settings:
    """Settings from the global options plus per-command overrides."""
    state = ctx.obj or {}
    merged: Dict[str, Dict[str, object]] = {k: dict(v) for k, v in state.get("overrides", {}).items()}
    for section, values in (overrides or {}).items():
        merged.setdefault(section, {}).update(values)
    return get_settings(state.get("config"), merged)


def _summary(title: str, rows: Mapping[str, object]) -> None:
    console.print(f"\n[bold green]{title}[/bold green]")
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green")
    for name, value in rows.items():
        table.add_row(name, f"{value:.4f}" if isinstance(value, float) else str(value))
    console.print(table)


def _fail(logger, command: str, error: Exception) -> None:
    logger.error(f"{command}_command_failed", error=str(error), error_type=type(error).__name__)
    console.print(f"[bold red]Error: {error}[/bold red]")
    raise typer.Exit(1)


@app.callback()
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="INI file with [section] key = value"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for every stochastic step"),
    deterministic: Optional[bool] = typer.Option(
        None,
        "--deterministic/--parallel",
        help="Single-threaded reproducible training, or parallel workers",
    ),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", min=1, help="Worker cap"),
    progress: Optional[bool] = typer.Option(None, "--progress/--no-progress", help="tqdm progress bars"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose file logging"),
) -> None:
    """Cluster-typing NED toolkit CLI.

    Technical logs go to logs/ned.log (or [runtime] log_file).
    """
    overrides = {
        "runtime": {
            "seed": seed,
            "deterministic": deterministic,
            "jobs": jobs,
            "progress": progress,
            "log_level": "DEBUG" if verbose else None,
        }
    }
    ctx.obj = {"config": config, "overrides": overrides}
    try:
        runtime = get_settings(config, overrides).runtime
    except Exception as e:
        console.print(f"[bold red]Error: {e}[/bold red]")
        raise typer.Exit(1)
    setup_file_logging(log_file=runtime.log_file, level=runtime.log_level)


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------

@app.command()
def ingest(
    ctx: typer.Context,
    kb: Path = typer.Argument(..., help="KB TSV: id, synsets, frequency, wikicat=synset mapping"),
    surface_forms: Path = typer.Argument(..., help="Surface form TSV: id, surface, frequency, flags"),
    out_dir: Path = typer.Argument(..., help="Output directory for the artifacts"),
    corpus: List[Path] = typer.Option([], "--corpus", help="Raw corpus in [[id|surface]] markup (repeatable)"),
    types: Optional[Path] = typer.Option(None, "--types", help="Synset to coarse type mapping"),
    annotate: bool = typer.Option(True, "--annotate/--no-annotate", help="Auto-annotate repeated surfaces"),
) -> None:
    """[bold green]Parse raw KB, surface forms and corpora[/bold green]."""
    logger = get_logger(__name__)
    logger.info("ingest_command_started", kb=str(kb), corpora=len(corpus))
    try:
        result = run_ingest(_settings(ctx), str(kb), str(surface_forms), str(out_dir),
                            [str(p) for p in corpus], str(types) if types else None, annotate)
        _summary("Ingest:", {"Entities": result["entities"], "Surface forms": result["surface_forms"]})
        if result["corpora"]:
            table = Table(show_header=True, header_style="bold magenta")
            for column in ("Corpus", "Documents", "Manual", "Auto", "Unknown golds"):
                table.add_column(column, style="cyan" if column == "Corpus" else "green")
            for c in result["corpora"]:
                table.add_row(c["output_path"], str(c["documents"]), str(c["manual_mentions"]),
                              str(c["auto_mentions"]), str(c["unknown_golds"]))
            console.print(table)
        logger.info("ingest_command_completed")
    except Exception as e:
        _fail(logger, "ingest", e)


@app.command("mine-coocc")
def mine_coocc(
    ctx: typer.Context,
    corpora: List[Path] = typer.Argument(..., help="Annotated corpus artifacts"),
    output: Path = typer.Option(..., "--output", "-o", help="Cooccurrence table"),
) -> None:
    """Count entity pairs sharing a document."""
    logger = get_logger(__name__)
    logger.info("mine_coocc_command_started", corpora=len(corpora))
    try:
        result = run_mine_coocc(_settings(ctx), [str(p) for p in corpora], str(output))
        _summary("Cooccurrence:", {"Documents": result["documents"], "Rows": result["rows"]})
        logger.info("mine_coocc_command_completed")
    except Exception as e:
        _fail(logger, "mine_coocc", e)


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

@app.command("build-streams")
def build_streams(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated training corpus"),
    kb: Path = typer.Argument(..., help="KB artifact"),
    out_dir: Path = typer.Argument(..., help="Output directory"),
    cooccurrence: Optional[Path] = typer.Option(None, "--cooccurrence", help="Cooccurrence table"),
    clustering: Optional[Path] = typer.Option(None, "--clustering", help="Word clustering (cluster-centric stream)"),
    surface_forms: Optional[Path] = typer.Option(None, "--surface-forms", help="Surface forms (surface word pairs)"),
) -> None:
    """Write SGNS training streams and pair files."""
    logger = get_logger(__name__)
    logger.info("build_streams_command_started", corpus=str(corpus))
    try:
        result = run_build_streams(
            _settings(ctx), str(corpus), str(kb), str(out_dir),
            str(cooccurrence) if cooccurrence else None,
            str(clustering) if clustering else None,
            str(surface_forms) if surface_forms else None,
        )
        _summary("Streams:", result["files"])
        logger.info("build_streams_command_completed")
    except Exception as e:
        _fail(logger, "build_streams", e)


@app.command()
def embed(
    ctx: typer.Context,
    input_path: Path = typer.Argument(..., help="Stream or pairs file"),
    output: Path = typer.Option(..., "--output", "-o", help="Embedding table"),
    mode: TrainingMode = typer.Option(TrainingMode.WINDOW, "--mode", help="window or pair"),
    dim: Optional[int] = typer.Option(None, "--dim", help="Vector size"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Passes over the data"),
) -> None:
    """[bold blue]Train skip-gram negative-sampling vectors[/bold blue]."""
    logger = get_logger(__name__)
    logger.info("embed_command_started", input=str(input_path), mode=mode.value)
    try:
        settings = _settings(ctx, {"embeddings": {"dim": dim}})
        result = run_embed(settings, str(input_path), str(output), mode, epochs)
        _summary("Embeddings:", {"Vocabulary": result["vocab"], "Dim": result["dim"],
                                 "Epochs": result["epochs"], "Final loss": result["final_loss"]})
        logger.info("embed_command_completed")
    except Exception as e:
        _fail(logger, "embed", e)


@app.command()
def cluster(
    ctx: typer.Context,
    flavor: ClusterFlavor = typer.Argument(..., help="Word, Surface, Entity, Synset or Brown"),
    output: Path = typer.Option(..., "--output", "-o", help="Clustering file"),
    embeddings: Optional[Path] = typer.Option(None, "--embeddings", help="Embedding table (K-means flavors)"),
    stream: Optional[Path] = typer.Option(None, "--stream", help="Entity-context stream (Brown)"),
    kb: Optional[Path] = typer.Option(None, "--kb", help="Keep KB entities only"),
    k: Optional[int] = typer.Option(None, "--k", "-k", min=1, help="Number of clusters"),
) -> None:
    """Cluster the entity space."""
    logger = get_logger(__name__)
    logger.info("cluster_command_started", flavor=flavor.value, k=k)
    try:
        result = run_cluster(_settings(ctx), flavor, str(output),
                             str(embeddings) if embeddings else None,
                             str(stream) if stream else None,
                             str(kb) if kb else None, k)
        _summary(f"{flavor.value} clustering:", {
            "k": result["k"],
            "Clustered": result["clustered"],
            "Non-empty clusters": result["non_empty_clusters"],
            "Largest cluster": result["largest_cluster"],
        })
        logger.info("cluster_command_completed")
    except Exception as e:
        _fail(logger, "cluster", e)


# ---------------------------------------------------------------------------
# Clustering selection
# ---------------------------------------------------------------------------

@app.command()
def agccs(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    candidates: Path = typer.Argument(..., help="Candidate dump of the corpus"),
    clusterings: List[Path] = typer.Argument(..., help="Clusterings to score"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="AGCCS table"),
) -> None:
    """Average gold-candidate cluster separation per clustering."""
    logger = get_logger(__name__)
    logger.info("agccs_command_started", clusterings=len(clusterings))
    try:
        result = run_agccs(_settings(ctx), str(corpus), str(candidates),
                           [str(p) for p in clusterings], str(output) if output else None)
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Clustering", style="cyan")
        table.add_column("Flavor", style="cyan")
        table.add_column("k", style="green")
        table.add_column("AGCCS", style="green")
        for row in result["rows"]:
            table.add_row(row["clustering"], row["flavor"], str(row["k"]), f"{row['agccs']:.4f}")
        console.print(table)
        logger.info("agccs_command_completed")
    except Exception as e:
        _fail(logger, "agccs", e)


@app.command("select-combo")
def select_combo(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    candidates: Path = typer.Argument(..., help="Candidate dump of the corpus"),
    typing: List[Path] = typer.Option(..., "--typing", help="Typing predictions (repeatable)"),
    clustering: List[Path] = typer.Option(..., "--clustering", help="Clustering of each --typing, same order"),
    top: Optional[int] = typer.Option(None, "--top", min=1, help="Combinations to keep"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Combination table"),
) -> None:
    """Rank clustering combinations by typing penalty."""
    logger = get_logger(__name__)
    logger.info("select_combo_command_started", options=len(typing))
    try:
        result = run_select_combo(_settings(ctx), str(corpus), str(candidates),
                                  [str(p) for p in typing], [str(p) for p in clustering],
                                  str(output) if output else None, top)
        rows = result["combinations"]
        if rows:
            table = Table(show_header=True, header_style="bold magenta")
            for column in rows[0]:
                table.add_column(column, style="green" if column in ("rank", "penalty") else "cyan")
            for row in rows:
                table.add_row(*(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row.values()))
            console.print(table)
        logger.info("select_combo_command_completed")
    except Exception as e:
        _fail(logger, "select_combo", e)


# ---------------------------------------------------------------------------
# Mention typing
# ---------------------------------------------------------------------------

@app.command("build-typing-data")
def build_typing_data(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    clustering: Path = typer.Argument(..., help="Clustering giving the labels"),
    output: Path = typer.Option(..., "--output", "-o", help="Typing dataset"),
) -> None:
    """Label mention windows with the cluster of their gold entity."""
    logger = get_logger(__name__)
    logger.info("build_typing_data_command_started", corpus=str(corpus))
    try:
        result = run_build_typing_data(_settings(ctx), str(corpus), str(clustering), str(output))
        _summary("Typing dataset:", {"Flavor": result["flavor"], "Format": result["format"],
                                     "Instances": result["instances"],
                                     **{f"Skipped ({k})": v for k, v in result["skipped"].items()}})
        logger.info("build_typing_data_command_completed")
    except Exception as e:
        _fail(logger, "build_typing_data", e)


@app.command("train-typing")
def train_typing(
    ctx: typer.Context,
    dataset: Path = typer.Argument(..., help="Typing dataset"),
    clustering: Path = typer.Argument(..., help="Clustering that labeled the dataset"),
    output: Path = typer.Option(..., "--output", "-o", help="Typing model"),
    dev: Optional[Path] = typer.Option(None, "--dev", help="Dev dataset"),
    context_embeddings: Optional[Path] = typer.Option(None, "--context-embeddings"),
    surface_embeddings: Optional[Path] = typer.Option(None, "--surface-embeddings"),
    surface2_embeddings: Optional[Path] = typer.Option(None, "--surface2-embeddings"),
    surface2: bool = typer.Option(True, "--surface2/--no-surface2", help="Second surface channel"),
    encoder: Optional[str] = typer.Option(None, "--encoder", help="mean or recurrent"),
    epochs: Optional[int] = typer.Option(None, "--epochs", min=1),
) -> None:
    """[bold blue]Train a mention typing model[/bold blue]."""
    logger = get_logger(__name__)
    logger.info("train_typing_command_started", dataset=str(dataset))
    try:
        settings = _settings(ctx, {"typing": {"encoder": encoder, "epochs": epochs}})
        result = run_train_typing(
            settings, str(dataset), str(clustering), str(output),
            str(dev) if dev else None,
            str(context_embeddings) if context_embeddings else None,
            str(surface_embeddings) if surface_embeddings else None,
            str(surface2_embeddings) if surface2_embeddings else None,
            surface2,
        )
        _summary("Typing model:", {
            "Flavor": result["flavor"],
            "Train instances": result["train_instances"],
            "Dev instances": result["dev_instances"],
            "Epochs": result["epochs"],
            "Dev micro-F1": result["dev_micro_f1"],
        })
        logger.info("train_typing_command_completed")
    except Exception as e:
        _fail(logger, "train_typing", e)


@app.command("predict-typing")
def predict_typing(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Typing model"),
    output: Path = typer.Option(..., "--output", "-o", help="Typing predictions"),
    dataset: Optional[Path] = typer.Option(None, "--dataset", help="Typing dataset to score"),
    corpus: Optional[Path] = typer.Option(None, "--corpus", help="Corpus whose every mention is scored"),
    rank_scores: Optional[Path] = typer.Option(None, "--rank-scores", help="Stage-1 scores (EC windows)"),
) -> None:
    """Cluster probabilities for every mention."""
    logger = get_logger(__name__)
    logger.info("predict_typing_command_started", model=str(model))
    try:
        result = run_predict_typing(_settings(ctx), str(model), str(output),
                                    str(dataset) if dataset else None,
                                    str(corpus) if corpus else None,
                                    str(rank_scores) if rank_scores else None)
        _summary("Typing predictions:", {"Flavor": result["flavor"], "Mentions": result["predictions"],
                                         "Micro-F1": result["micro_f1"]})
        logger.info("predict_typing_command_completed")
    except Exception as e:
        _fail(logger, "predict_typing", e)


# ---------------------------------------------------------------------------
# Candidates and ranking
# ---------------------------------------------------------------------------

@app.command()
def candgen(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    kb: Path = typer.Argument(..., help="KB artifact"),
    surface_forms: Path = typer.Argument(..., help="Surface form artifact"),
    output: Path = typer.Argument(..., help="Candidate dump"),
    cooccurrence: Optional[Path] = typer.Option(None, "--cooccurrence", help="Cooccurrence table"),
    first_names: Optional[Path] = typer.Option(None, "--first-names", help="First-name lexicon"),
    surnames: Optional[Path] = typer.Option(None, "--surnames", help="Surname lexicon"),
    t: Optional[float] = typer.Option(None, "--T", help="Trigram similarity threshold"),
    e: Optional[float] = typer.Option(None, "--E", help="Edit distance ratio"),
    w: Optional[int] = typer.Option(None, "--W", help="Minimum words for containment"),
    d: Optional[int] = typer.Option(None, "--D", help="Maximum word difference"),
    n: Optional[int] = typer.Option(None, "--N", help="Final candidates per mention"),
    r: Optional[int] = typer.Option(None, "--coocc-top-R", help="Cooccurring entities per anchor"),
) -> None:
    """[bold green]Generate candidate entities per mention[/bold green]."""
    logger = get_logger(__name__)
    logger.info("candgen_command_started", corpus=str(corpus))
    try:
        # keyed by alias so they replace the INI letters
        settings = _settings(ctx, {"candgen": {"T": t, "E": e, "W": w, "D": d, "N": n, "coocc_top_r": r}})
        result = run_candgen(settings, str(corpus), str(kb), str(surface_forms), str(output),
                             str(cooccurrence) if cooccurrence else None,
                             str(first_names) if first_names else None,
                             str(surnames) if surnames else None)
        _summary("Candidates:", {
            "Mentions": result["mentions"],
            "Candidates": result["candidates"],
            "Mentions without candidates": result["empty_mentions"],
            **{f"Gold recall {cut} (%)": value for cut, value in result["gold_recall"].items()},
        })
        logger.info("candgen_command_completed")
    except Exception as e:
        _fail(logger, "candgen", e)


@app.command()
def features(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    candidates: Path = typer.Argument(..., help="Candidate dump"),
    kb: Path = typer.Argument(..., help="KB artifact"),
    surface_forms: Path = typer.Argument(..., help="Surface form artifact"),
    output: Path = typer.Option(..., "--output", "-o", help="Feature dump"),
    stage: int = typer.Option(1, "--stage", min=1, max=2),
    typing: List[Path] = typer.Option([], "--typing", help="Typing predictions (repeatable)"),
    clustering: List[Path] = typer.Option([], "--clustering", help="Clustering of each --typing"),
    word_embeddings: Optional[Path] = typer.Option(None, "--word-embeddings"),
    entity_corpus: Optional[Path] = typer.Option(None, "--entity-corpus", help="Corpus for entity documents"),
    rank_scores: Optional[Path] = typer.Option(None, "--rank-scores", help="Stage-1 scores (stage 2)"),
    entity_model: Optional[Path] = typer.Option(None, "--entity-model", help="Entity typing model (stage 2)"),
    entity_clustering: Optional[Path] = typer.Option(None, "--entity-clustering"),
    entity_embeddings: Optional[Path] = typer.Option(None, "--entity-embeddings"),
) -> None:
    """Build ranking features for one stage."""
    logger = get_logger(__name__)
    logger.info("features_command_started", corpus=str(corpus), stage=stage)
    try:
        result = run_features(
            _settings(ctx), str(corpus), str(candidates), str(kb), str(surface_forms), str(output),
            stage, [str(p) for p in typing], [str(p) for p in clustering],
            str(word_embeddings) if word_embeddings else None,
            str(entity_corpus) if entity_corpus else None,
            str(rank_scores) if rank_scores else None,
            str(entity_model) if entity_model else None,
            str(entity_clustering) if entity_clustering else None,
            str(entity_embeddings) if entity_embeddings else None,
        )
        _summary(f"Stage {stage} features:", {"Rows": result["rows"], "Positives": result["positives"],
                                               "Slots": result["slots"]})
        logger.info("features_command_completed")
    except Exception as e:
        _fail(logger, "features", e)


@app.command("train-ranker")
def train_ranker(
    ctx: typer.Context,
    features_path: Path = typer.Argument(..., help="Training feature dump"),
    output: Path = typer.Option(..., "--output", "-o", help="Ranker model"),
    dev: Optional[Path] = typer.Option(None, "--dev", help="Dev feature dump"),
    epochs: Optional[int] = typer.Option(None, "--epochs", min=1),
    downsample: Optional[bool] = typer.Option(None, "--downsample/--no-downsample"),
) -> None:
    """[bold blue]Train a candidate ranker[/bold blue]."""
    logger = get_logger(__name__)
    logger.info("train_ranker_command_started", features=str(features_path))
    try:
        settings = _settings(ctx, {"ranker": {"epochs": epochs, "downsample": downsample}})
        result = run_train_ranker(settings, str(features_path), str(output), str(dev) if dev else None)
        _summary(f"Stage {result['stage']} ranker:", {
            "Train rows": result["train_rows"],
            "Dev rows": result["dev_rows"],
            "Epochs": result["epochs"],
            "Dev accuracy": result["dev_accuracy"],
        })
        logger.info("train_ranker_command_completed")
    except Exception as e:
        _fail(logger, "train_ranker", e)


@app.command()
def rank(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus"),
    candidates: Path = typer.Argument(..., help="Candidate dump"),
    kb: Path = typer.Argument(..., help="KB artifact"),
    surface_forms: Path = typer.Argument(..., help="Surface form artifact"),
    stage1_model: Path = typer.Argument(..., help="Stage-1 ranker"),
    out_dir: Path = typer.Option(..., "--out-dir", "-o", help="Directory for scores and predictions"),
    typing: List[Path] = typer.Option([], "--typing", help="Typing predictions (repeatable)"),
    clustering: List[Path] = typer.Option([], "--clustering", help="Clustering of each --typing"),
    word_embeddings: Optional[Path] = typer.Option(None, "--word-embeddings"),
    entity_corpus: Optional[Path] = typer.Option(None, "--entity-corpus"),
    stage2_model: Optional[Path] = typer.Option(None, "--stage2-model", help="Stage-2 ranker"),
    entity_model: Optional[Path] = typer.Option(None, "--entity-model"),
    entity_clustering: Optional[Path] = typer.Option(None, "--entity-clustering"),
    entity_embeddings: Optional[Path] = typer.Option(None, "--entity-embeddings"),
    threshold: Optional[float] = typer.Option(None, "--threshold", help="Abstain below this probability"),
) -> None:
    """[bold green]Disambiguate a corpus with one or two stages[/bold green]."""
    logger = get_logger(__name__)
    logger.info("rank_command_started", corpus=str(corpus), two_stage=stage2_model is not None)
    try:
        settings = _settings(ctx, {"ranker": {"threshold": threshold}})
        result = run_rank(
            settings, str(corpus), str(candidates), str(kb), str(surface_forms), str(stage1_model),
            str(out_dir), [str(p) for p in typing], [str(p) for p in clustering],
            str(word_embeddings) if word_embeddings else None,
            str(entity_corpus) if entity_corpus else None,
            str(stage2_model) if stage2_model else None,
            str(entity_model) if entity_model else None,
            str(entity_clustering) if entity_clustering else None,
            str(entity_embeddings) if entity_embeddings else None,
        )
        rows: Dict[str, object] = {
            "Stages": result["stages"],
            "Mentions": result["mentions"],
            "Abstentions": result["abstentions"],
        }
        for name in ("precision", "recall", "f1"):
            if name in result:
                rows[name.capitalize()] = result[name]
        _summary("Ranking:", rows)
        logger.info("rank_command_completed")
    except Exception as e:
        _fail(logger, "rank", e)


@app.command()
def replicate(
    ctx: typer.Context,
    train_features: Path = typer.Argument(..., help="Training feature dump"),
    test_features: Path = typer.Argument(..., help="Test feature dump"),
    corpus: Path = typer.Argument(..., help="Test corpus with golds"),
    seeds: int = typer.Option(20, "--seeds", min=1, help="Number of retrainings"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Per-seed table"),
) -> None:
    """Retrain the ranker over seeds and report mean ± sd."""
    logger = get_logger(__name__)
    logger.info("replicate_command_started", seeds=seeds)
    try:
        result = run_replicate(_settings(ctx), str(train_features), str(test_features), str(corpus),
                               seeds, str(output) if output else None)
        _summary(f"Replication over {result['seeds']} seeds:", {
            name.capitalize(): f"{result[name + '_mean']:.4f} ± {result[name + '_sd']:.4f}"
            for name in ("precision", "recall", "f1")
        })
        logger.info("replicate_command_completed")
    except Exception as e:
        _fail(logger, "replicate", e)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@app.command()
def evaluate(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus with golds"),
    predictions: Path = typer.Argument(..., help="Final predictions"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Evaluation table"),
    dataset: Optional[str] = typer.Option(None, "--dataset", help="Row label"),
    unthresholded: Optional[Path] = typer.Option(None, "--unthresholded", help="Top-1 predictions (InKB)"),
    recall: Optional[Path] = typer.Option(None, "--recall", help="Gold recall table from candgen"),
) -> None:
    """Micro P/R/F1, BoT-F1 and InKB accuracy."""
    logger = get_logger(__name__)
    logger.info("evaluate_command_started", predictions=str(predictions))
    try:
        result = run_evaluate(_settings(ctx), str(corpus), str(predictions),
                              str(output) if output else None, dataset,
                              str(unthresholded) if unthresholded else None,
                              str(recall) if recall else None)
        _summary("Evaluation:", result["row"])
        logger.info("evaluate_command_completed")
    except Exception as e:
        _fail(logger, "evaluate", e)


@app.command()
def randtest(
    ctx: typer.Context,
    corpus: Path = typer.Argument(..., help="Annotated corpus with golds"),
    predictions_a: Path = typer.Argument(..., help="System A predictions"),
    predictions_b: Path = typer.Argument(..., help="System B predictions"),
    rounds: Optional[int] = typer.Option(None, "--rounds", min=1, help="Shuffles"),
) -> None:
    """Paired approximate randomization test on micro-F1."""
    logger = get_logger(__name__)
    logger.info("randtest_command_started", a=str(predictions_a), b=str(predictions_b))
    try:
        result = run_randtest(_settings(ctx), str(corpus), str(predictions_a), str(predictions_b), rounds)
        _summary("Randomization test:", {"F1 A": result["f1_a"], "F1 B": result["f1_b"],
                                         "Difference": result["difference"], "Rounds": result["rounds"],
                                         "p-value": result["p_value"]})
        logger.info("randtest_command_completed")
    except Exception as e:
        _fail(logger, "randtest", e)


@app.command()
def report(
    ctx: typer.Context,
    reports: List[Path] = typer.Argument(..., help="Evaluation tables"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Merged evaluation table"),
) -> None:
    """Merge evaluation tables into one text table."""
    logger = get_logger(__name__)
    logger.info("report_command_started", reports=len(reports))
    try:
        result = run_report(_settings(ctx), [str(p) for p in reports], str(output) if output else None)
        for line in result["lines"]:
            console.print(line, highlight=False)
        logger.info("report_command_completed")
    except Exception as e:
        _fail(logger, "report", e)


# ---------------------------------------------------------------------------
# Utilities
# ---------------------------------------------------------------------------

@app.command("synth-fixture")
def synth_fixture(
    ctx: typer.Context,
    out_dir: Path = typer.Argument(..., help="Output directory"),
    train_docs: int = typer.Option(200, "--train-docs", min=1),
    test_docs: int = typer.Option(50, "--test-docs", min=1),
) -> None:
    """Write the synthetic KB and corpora used by the end-to-end test."""
    logger = get_logger(__name__)
    logger.info("synth_fixture_command_started", out_dir=str(out_dir))
    try:
        settings = _settings(ctx)
        result = run_synth_fixture(settings, str(out_dir), settings.runtime.seed, train_docs, test_docs)
        _summary("Synthetic fixture:", {
            "Entities": result["entities"],
            "Train documents": result["train_documents"],
            "Test documents": result["test_documents"],
            "Train mentions": result["train_mentions"],
            "Test mentions": result["test_mentions"],
        })
        logger.info("synth_fixture_command_completed")
    except Exception as e:
        _fail(logger, "synth_fixture", e)


@app.command("validate-config")
def validate_config(ctx: typer.Context) -> None:
    """Print the effective settings."""
    logger = get_logger(__name__)
    logger.info("validate_config_command_started")
    try:
        result = run_validate_config(_settings(ctx))
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        for name, value in result["settings"].items():
            table.add_row(name, str(value))
        console.print(table)
        logger.info("validate_config_command_completed")
    except Exception as e:
        _fail(logger, "validate_config", e)


if __name__ == "__main__":
    app()
