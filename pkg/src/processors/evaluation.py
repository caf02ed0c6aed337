"""Evaluation metrics and significance testing.

NIL gold mentions are excluded everywhere. An abstained mention (prediction
entity None) is a missed gold but not a prediction.
"""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..core.exceptions import ValidationError
from ..core.models import Document, GoldMap, Prediction
from ..utils.helpers import harmonic_mean, safe_divide

logger = structlog.get_logger(__name__)

Key = Tuple[str, int]


def gold_map(corpus: Iterable[Document]) -> Dict[Key, Optional[str]]:
    """(doc_id, mention index) → gold entity (None for NIL)."""
    return {
        (document.doc_id, index): mention.gold_entity
        for document in corpus
        for index, mention in enumerate(document.mentions)
    }


def _index(predictions: Iterable[Prediction], golds: GoldMap) -> Dict[Key, Optional[str]]:
    indexed: Dict[Key, Optional[str]] = {}
    for p in predictions:
        key = (p.doc_id, p.mention_index)
        if key not in golds:
            raise ValidationError(
                f"Prediction for unknown mention {p.doc_id}::{p.mention_index}",
                field="prediction",
                value=key,
            )
        indexed[key] = p.entity_id
    return indexed


def micro_prf(predictions: Iterable[Prediction], golds: GoldMap) -> Dict[str, float]:
    """Micro precision, recall and F1 over non-NIL gold mentions.

    Raises:
        ValidationError: If a prediction refers to a mention absent from the golds
    """
    predicted = _index(predictions, golds)
    total = made = correct = 0
    for key, gold in golds.items():
        if gold is None:
            continue
        total += 1
        entity_id = predicted.get(key)
        if entity_id is None:
            continue
        made += 1
        correct += entity_id == gold
    precision = safe_divide(correct, made)
    recall = safe_divide(correct, total)
    return {"precision": precision, "recall": recall, "f1": harmonic_mean(precision, recall)}


def bot_f1(predictions: Iterable[Prediction], golds: GoldMap) -> float:
    """Bag-of-titles F1: per-document entity sets, then micro aggregation."""
    predicted = _index(predictions, golds)
    gold_sets: Dict[str, set] = {}
    predicted_sets: Dict[str, set] = {}
    for (doc_id, index), gold in golds.items():
        if gold is None:
            continue
        gold_sets.setdefault(doc_id, set()).add(gold)
        entity_id = predicted.get((doc_id, index))
        if entity_id is not None:
            predicted_sets.setdefault(doc_id, set()).add(entity_id)
    overlap = sum(len(gold_sets[d] & predicted_sets.get(d, set())) for d in gold_sets)
    precision = safe_divide(overlap, sum(len(s) for s in predicted_sets.values()))
    recall = safe_divide(overlap, sum(len(s) for s in gold_sets.values()))
    return harmonic_mean(precision, recall)


def inkb_accuracy(predictions: Iterable[Prediction], golds: GoldMap) -> float:
    """Share of non-NIL golds whose top-1 prediction is the gold.

    Pass un-thresholded predictions; an abstention counts as wrong.
    """
    predicted = _index(predictions, golds)
    scored = [(key, gold) for key, gold in golds.items() if gold is not None]
    return safe_divide(sum(predicted.get(key) == gold for key, gold in scored), len(scored))


def _outcomes(predictions: Sequence[Prediction], golds: GoldMap, keys: Sequence[Key]) -> Tuple[np.ndarray, np.ndarray]:
    """(made, correct) boolean vectors over the given gold keys."""
    predicted = _index(predictions, golds)
    made = np.array([predicted.get(k) is not None for k in keys])
    correct = np.array([predicted.get(k) is not None and predicted.get(k) == golds[k] for k in keys])
    return made, correct


def _f1(correct: np.ndarray, made: np.ndarray, total: int) -> np.ndarray:
    """Vectorized micro-F1, ``2·tp / (predictions + golds)``, over the last axis."""
    tp = correct.sum(axis=-1)
    denominator = made.sum(axis=-1) + total
    return np.where(denominator > 0, 2.0 * tp / np.maximum(denominator, 1), 0.0)


def randomization_test(
    outputs_a: Sequence[Prediction],
    outputs_b: Sequence[Prediction],
    golds: GoldMap,
    rounds: int = 10_000,
    seed: int = 13,
    chunk: int = 1000,
) -> Dict[str, float]:
    """Paired approximate randomization test on micro-F1.

    Each round swaps the two systems' outputs per mention with probability
    0.5; ``p = (count(|Δ| ≥ |Δ_observed|) + 1) / (rounds + 1)``.

    Returns:
        Observed F1 of both systems, their difference and the p-value
    """
    if rounds < 1:
        raise ValidationError("Randomization rounds must be >= 1", field="rounds", value=rounds)
    keys = [key for key, gold in golds.items() if gold is not None]
    made_a, correct_a = _outcomes(outputs_a, golds, keys)
    made_b, correct_b = _outcomes(outputs_b, golds, keys)
    total = len(keys)

    f1_a = float(_f1(correct_a, made_a, total))
    f1_b = float(_f1(correct_b, made_b, total))
    observed = abs(f1_a - f1_b)

    rng = np.random.default_rng(seed)
    extreme = 0
    remaining = rounds
    while remaining > 0:
        size = min(chunk, remaining)
        swap = rng.random((size, total)) < 0.5
        shuffled_a = _f1(np.where(swap, correct_b, correct_a), np.where(swap, made_b, made_a), total)
        shuffled_b = _f1(np.where(swap, correct_a, correct_b), np.where(swap, made_a, made_b), total)
        extreme += int(np.sum(np.abs(shuffled_a - shuffled_b) >= observed - 1e-12))
        remaining -= size

    p_value = (extreme + 1) / (rounds + 1)
    logger.info("randomization_test", rounds=rounds, f1_a=f1_a, f1_b=f1_b, p_value=p_value)
    return {"f1_a": f1_a, "f1_b": f1_b, "difference": f1_a - f1_b, "p_value": p_value}


def evaluation_row(
    dataset: str,
    predictions: Sequence[Prediction],
    golds: GoldMap,
    unthresholded: Optional[Sequence[Prediction]] = None,
    gold_recall: Optional[Mapping[str, float]] = None,
) -> Dict[str, object]:
    """One report row: P, R, F1, BoT-F1, InKB accuracy and gold recall columns."""
    scores = micro_prf(predictions, golds)
    row: Dict[str, object] = {
        "dataset": dataset,
        "precision": scores["precision"],
        "recall": scores["recall"],
        "f1": scores["f1"],
        "bot_f1": bot_f1(predictions, golds),
        "inkb_accuracy": inkb_accuracy(unthresholded if unthresholded is not None else predictions, golds),
        "mentions": sum(1 for g in golds.values() if g is not None),
    }
    for name, value in (gold_recall or {}).items():
        row[f"gold_recall_{name}"] = value
    return row


def format_report(rows: Sequence[Mapping[str, object]]) -> List[str]:
    """Aligned text table of report rows."""
    if not rows:
        return []
    columns = list(rows[0].keys())
    cells = [[f"{row.get(c, ''):.4f}" if isinstance(row.get(c), float) else str(row.get(c, ''))
              for c in columns] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in cells]
    return lines
