"""Evaluation Operations - Scores, significance and report tables."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd
import structlog

from ..config.settings import Settings
from ..connectors.corpus import read_corpus
from ..connectors.ranking_files import read_predictions, read_report, read_table, write_report
from ..processors.evaluation import evaluation_row, format_report, gold_map, randomization_test

logger = structlog.get_logger(__name__)


def run_evaluate(
    settings: Settings,
    corpus_path: str,
    predictions_path: str,
    output_path: Optional[str] = None,
    dataset: Optional[str] = None,
    unthresholded_path: Optional[str] = None,
    recall_path: Optional[str] = None,
) -> Dict:
    """Execute evaluate operation.

    Args:
        settings: Application settings
        corpus_path: Annotated corpus holding the gold entities
        predictions_path: Final (thresholded) predictions
        output_path: Optional evaluation table
        dataset: Row label (default: the corpus file stem)
        unthresholded_path: Top-1 predictions for InKB accuracy
        recall_path: Gold-recall table written by candgen

    Returns:
        Dictionary holding the report row
    """
    dataset = dataset or Path(corpus_path).stem
    logger.info("evaluate_started", dataset=dataset, predictions=predictions_path)

    golds = gold_map(read_corpus(corpus_path))
    recall = None
    if recall_path:
        table, _ = read_table(recall_path, "recall")
        recall = {str(row.cut): float(row.gold_recall) for row in table.itertuples(index=False)}
    row = evaluation_row(
        dataset,
        read_predictions(predictions_path),
        golds,
        unthresholded=read_predictions(unthresholded_path) if unthresholded_path else None,
        gold_recall=recall,
    )
    if output_path:
        write_report([row], output_path)

    result = {"success": True, "row": row, "output_path": output_path}
    logger.info("evaluate_completed", **{k: v for k, v in row.items() if not k.startswith("gold_recall")})
    return result


def run_randtest(
    settings: Settings,
    corpus_path: str,
    predictions_a: str,
    predictions_b: str,
    rounds: Optional[int] = None,
) -> Dict:
    """Execute randtest operation: paired approximate randomization on micro-F1."""
    rounds = rounds or settings.evaluation.rounds
    logger.info("randtest_started", a=predictions_a, b=predictions_b, rounds=rounds)

    outcome = randomization_test(
        read_predictions(predictions_a),
        read_predictions(predictions_b),
        gold_map(read_corpus(corpus_path)),
        rounds=rounds,
        seed=settings.runtime.seed,
    )

    result = {"success": True, "rounds": rounds, **outcome}
    logger.info("randtest_completed", **result)
    return result


def run_report(
    settings: Settings,
    report_paths: Sequence[str],
    output_path: Optional[str] = None,
) -> Dict:
    """Execute report operation: merge evaluation tables into one aligned table."""
    logger.info("report_started", reports=list(report_paths))
    frame = pd.concat([read_report(path) for path in report_paths], ignore_index=True)
    # tables from different runs may lack gold-recall columns
    frame = frame.astype(object).where(frame.notna(), "")
    rows: List[Dict] = frame.to_dict(orient="records")
    if output_path:
        write_report(rows, output_path)

    result = {"success": True, "rows": rows, "lines": format_report(rows), "output_path": output_path}
    logger.info("report_completed", rows=len(rows))
    return result
