"""Candidate dumps, feature tables, scores, predictions and reports.

Tabular artifacts are written through pandas with the artifact header as
the first line; entity ids are always read back as strings (``NA`` and
``NIL`` are valid tokens, never missing values).
"""

from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from ..config.constants import NIL_ENTITY, Provenance, SurfaceFormType
from ..core.artifacts import artifact_reader, artifact_writer
from ..core.exceptions import ParseError, ValidationError
from ..core.models import CandidateMatch, Prediction, mention_key, split_mention_key

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

CandidateSets = Dict[Tuple[str, int], List[CandidateMatch]]

KEY_COLUMNS = ["doc_id", "mention_index", "entity_id"]
LABEL_COLUMN = "label"
_STRING_COLUMNS = {"doc_id": str, "entity_id": str, "predicted": str, "dataset": str}


def _write_frame(df: pd.DataFrame, path: PathLike, kind: str, **meta: object) -> None:
    with artifact_writer(path, kind, **meta) as handle:
        df.to_csv(handle, sep="\t", index=False, float_format="%.6f", lineterminator="\n")


def _read_frame(path: PathLike, kind: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    with artifact_reader(path, kind) as (handle, meta, _offset):
        df = pd.read_csv(handle, sep="\t", dtype=_STRING_COLUMNS, keep_default_na=False)
    return df, meta


# ---------------------------------------------------------------------------
# Candidate dump
# ---------------------------------------------------------------------------

def write_candidates(candidate_sets: CandidateSets, path: PathLike, **meta: object) -> int:
    """Write ``doc_id mention_index entity_id best_sf edit gen_score provenance sf_types``.

    Mentions are written in (doc order as given, mention index) order; candidate
    order inside a mention is preserved.
    """
    rows = 0
    with artifact_writer(path, "candidates", **meta) as handle:
        for (doc_id, index), candidates in candidate_sets.items():
            for c in candidates:
                sf_types = ",".join(t.value for t in SurfaceFormType if t in c.sf_types)
                handle.write(
                    f"{doc_id}\t{index}\t{c.entity_id}\t{c.best_sf}\t{c.edit_distance}\t"
                    f"{c.gen_score:.6f}\t{c.provenance.value}\t{sf_types}\n"
                )
                rows += 1
    return rows


def read_candidates(path: PathLike) -> CandidateSets:
    candidate_sets: CandidateSets = {}
    with artifact_reader(path, "candidates") as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) not in (7, 8):
                raise ParseError(str(path), line_number, "expected 7 or 8 tab-separated columns")
            try:
                sf_types = frozenset(
                    SurfaceFormType(t) for t in (columns[7].split(",") if len(columns) == 8 else []) if t
                )
                match = CandidateMatch(
                    entity_id=columns[2],
                    best_sf=columns[3],
                    edit_distance=int(columns[4]),
                    sf_types=sf_types,
                    gen_score=float(columns[5]),
                    provenance=Provenance(columns[6]),
                )
                key = (columns[0], int(columns[1]))
            except (ValueError, ValidationError) as e:
                raise ParseError(str(path), line_number, str(e))
            candidate_sets.setdefault(key, []).append(match)
    return candidate_sets


# ---------------------------------------------------------------------------
# Feature tables
# ---------------------------------------------------------------------------

def write_features(df: pd.DataFrame, path: PathLike, stage: int, **meta: object) -> None:
    """Feature dump: key columns, one column per slot, then ``label``."""
    missing = [c for c in KEY_COLUMNS + [LABEL_COLUMN] if c not in df.columns]
    if missing:
        raise ValidationError(f"Feature table lacks columns: {missing}", field="columns")
    _write_frame(df, path, "features", stage=stage, **meta)
    logger.info("features_written", path=str(path), rows=len(df), stage=stage)


def read_features(path: PathLike) -> Tuple[pd.DataFrame, int]:
    """Returns (feature table, stage)."""
    df, meta = _read_frame(path, "features")
    return df, int(meta.get("stage", 1))


def feature_columns(df: pd.DataFrame) -> List[str]:
    """Slot columns of a feature table, in layout order."""
    return [c for c in df.columns if c not in KEY_COLUMNS and c != LABEL_COLUMN]


# ---------------------------------------------------------------------------
# Rank scores and predictions
# ---------------------------------------------------------------------------

def write_rank_scores(scores: pd.DataFrame, path: PathLike, stage: int) -> None:
    """Per-candidate ranking probabilities ``doc_id mention_index entity_id R``."""
    _write_frame(scores[KEY_COLUMNS + ["R"]], path, "rank_scores", stage=stage)


def read_rank_scores(path: PathLike) -> pd.DataFrame:
    df, _ = _read_frame(path, "rank_scores")
    return df


def write_predictions(predictions: Iterable[Prediction], path: PathLike, **meta: object) -> int:
    """``doc_id \\t mention_index \\t predicted_entity_or_NIL \\t R``."""
    count = 0
    with artifact_writer(path, "predictions", **meta) as handle:
        for p in predictions:
            handle.write(f"{p.doc_id}\t{p.mention_index}\t{p.entity_id or NIL_ENTITY}\t{p.score:.6f}\n")
            count += 1
    return count


def read_predictions(path: PathLike) -> List[Prediction]:
    predictions: List[Prediction] = []
    with artifact_reader(path, "predictions") as (handle, _, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) != 4:
                raise ParseError(str(path), line_number, "expected 4 tab-separated columns")
            try:
                predictions.append(
                    Prediction(
                        doc_id=columns[0],
                        mention_index=int(columns[1]),
                        entity_id=None if columns[2] == NIL_ENTITY else columns[2],
                        score=float(columns[3]),
                    )
                )
            except ValueError as e:
                raise ParseError(str(path), line_number, str(e))
    return predictions


# ---------------------------------------------------------------------------
# Typing predictions
# ---------------------------------------------------------------------------

def write_typing_predictions(
    probabilities: Mapping[str, np.ndarray],
    path: PathLike,
    flavor: str,
) -> int:
    """``mention_key \\t p_0 ... p_{k-1}`` with columns indexed by cluster id."""
    count = 0
    with artifact_writer(path, "typing_predictions", flavor=flavor) as handle:
        for key, probs in probabilities.items():
            handle.write(key + "\t" + "\t".join(f"{p:.6f}" for p in probs) + "\n")
            count += 1
    return count


def read_typing_predictions(path: PathLike) -> Tuple[Dict[str, np.ndarray], str]:
    """Returns (mention_key → probability vector, flavor)."""
    probabilities: Dict[str, np.ndarray] = {}
    with artifact_reader(path, "typing_predictions") as (handle, meta, offset):
        for line_number, line in enumerate(handle, start=1 + offset):
            columns = line.rstrip("\n").split("\t")
            if len(columns) < 2:
                raise ParseError(str(path), line_number, "expected a mention key and probabilities")
            try:
                split_mention_key(columns[0])
                probabilities[columns[0]] = np.array([float(v) for v in columns[1:]])
            except (ValueError, ValidationError) as e:
                raise ParseError(str(path), line_number, str(e))
    return probabilities, meta.get("flavor", "")


# ---------------------------------------------------------------------------
# Evaluation reports
# ---------------------------------------------------------------------------

def write_report(rows: Sequence[Mapping[str, object]], path: PathLike) -> pd.DataFrame:
    """Machine-readable evaluation table, one row per dataset."""
    df = pd.DataFrame(list(rows))
    _write_frame(df, path, "evaluation")
    return df


def read_report(path: PathLike) -> pd.DataFrame:
    df, _ = _read_frame(path, "evaluation")
    return df


def prediction_key(prediction: Prediction) -> str:
    return mention_key(prediction.doc_id, prediction.mention_index)


def write_table(df: pd.DataFrame, path: PathLike, kind: str, **meta: object) -> None:
    """Any other tabular artifact (recall tables, combinations, replications)."""
    _write_frame(df, path, kind, **meta)


def read_table(path: PathLike, kind: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    return _read_frame(path, kind)
