"""Ingest Operation - Parse raw KB/corpus inputs into versioned artifacts."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import structlog

from ..config.constants import MentionSource
from ..config.settings import Settings
from ..connectors.cooccurrence import write_cooccurrence
from ..connectors.corpus import parse_corpus, read_corpus, write_corpus
from ..connectors.kb import parse_kb, parse_type_mapping, write_kb
from ..connectors.surface_forms import parse_surface_forms, write_surface_forms
from ..core.models import Document, KnowledgeBase
from ..processors.annotation import auto_annotate
from ..processors.candidates import mine_cooccurrence

logger = structlog.get_logger(__name__)


def _count_unknown_golds(documents: Sequence[Document], kb: KnowledgeBase) -> int:
    return sum(
        1
        for d in documents
        for m in d.mentions
        if m.gold_entity and m.gold_entity not in kb
    )


def run_ingest(
    settings: Settings,
    kb_path: str,
    surface_forms_path: str,
    out_dir: str,
    corpus_paths: Sequence[str] = (),
    types_path: Optional[str] = None,
    annotate: bool = True,
) -> Dict:
    """Execute ingest operation.

    Args:
        settings: Application settings
        kb_path: KB input TSV
        surface_forms_path: Surface form input TSV
        out_dir: Directory receiving kb.tsv, surface_forms.tsv and <stem>.corpus files
        corpus_paths: Raw corpus files in ``[[id|surface]]`` markup
        types_path: Optional synset to coarse type mapping
        annotate: Add auto-annotations for later repeats of annotated surfaces

    Returns:
        Dictionary with operation results
    """
    logger.info("ingest_started", kb=kb_path, corpora=list(corpus_paths), annotate=annotate)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    type_mapping = parse_type_mapping(types_path) if types_path else {}
    kb = KnowledgeBase(parse_kb(kb_path, type_mapping))
    store = parse_surface_forms(surface_forms_path)
    write_kb(kb, out / "kb.tsv")
    write_surface_forms(store, out / "surface_forms.tsv")

    corpora: List[Dict] = []
    for corpus_path in corpus_paths:
        documents = parse_corpus(corpus_path)
        manual = sum(len(d.mentions) for d in documents)
        if annotate:
            documents = [auto_annotate(d) for d in documents]
        auto = sum(1 for d in documents for m in d.mentions if m.source is MentionSource.AUTO)
        target = out / f"{Path(corpus_path).stem}.corpus"
        write_corpus(documents, target)
        unknown = _count_unknown_golds(documents, kb)
        if unknown:
            logger.warning("unknown_gold_entities", corpus=str(corpus_path), mentions=unknown)
        corpora.append({
            "source": str(corpus_path),
            "output_path": str(target),
            "documents": len(documents),
            "manual_mentions": manual,
            "auto_mentions": auto,
            "unknown_golds": unknown,
        })

    result = {
        "success": True,
        "kb_path": str(out / "kb.tsv"),
        "surface_forms_path": str(out / "surface_forms.tsv"),
        "entities": len(kb),
        "surface_forms": len(store),
        "corpora": corpora,
    }
    logger.info("ingest_completed", entities=len(kb), surface_forms=len(store), corpora=len(corpora))
    return result


def run_mine_coocc(settings: Settings, corpus_paths: Sequence[str], output_path: str) -> Dict:
    """Execute mine-coocc operation.

    Counts, for every ordered pair of entities, the documents of the
    annotated corpora that mention both.
    """
    logger.info("mine_coocc_started", corpora=list(corpus_paths))
    documents = [d for path in corpus_paths for d in read_corpus(path)]
    table = mine_cooccurrence(documents)
    write_cooccurrence(table, output_path)

    result = {
        "success": True,
        "documents": len(documents),
        "rows": len(table),
        "output_path": str(output_path),
    }
    logger.info("mine_coocc_completed", **result)
    return result
