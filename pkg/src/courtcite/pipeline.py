"""Corpus-level stages shared by the CLI subcommands.

Every stage is a function of its inputs only and returns results sorted by
(doc_id, char_start), so the worker count never changes an output byte.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .corpus import Corpus, IdentifierIndex
from .errors import DataError
from .linker import CitationEdge
from .normalizer import RegistryTable, RepairConfig, Unparseable, parse, repair
from .recognizer import IdentifierSpan, recognize
from .segmenter import argumentation_text, segment

logger = logging.getLogger(__name__)

REVIEW_COLUMNS = ("doc_id", "char_start", "char_end", "original", "repaired", "reason", "margin")

_worker_state: dict = {}


def _init_worker(state: dict) -> None:
    _worker_state.clear()
    _worker_state.update(state)


def _parallel_map(func, items: Sequence, workers: int, state: dict) -> list:
    if workers <= 1 or len(items) <= 1:
        _init_worker(state)
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(state,)) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


def _segment_one(doc):
    if not doc.paragraphs:
        return doc.doc_id, []
    return doc.doc_id, segment(_worker_state["models"], doc, _worker_state["lexicon"])


def segment_corpus(corpus: Corpus, models: Mapping, lexicon: Optional[frozenset] = None,
                   workers: int = 1) -> dict:
    docs = sorted(corpus, key=lambda d: d.doc_id)
    results = _parallel_map(_segment_one, docs, workers, {"models": models, "lexicon": lexicon})
    return dict(results)


def _recognize_one(item):
    doc, segments = item
    ranges = argumentation_text(segments, doc)
    return recognize(_worker_state["model"], doc, ranges, _worker_state["registry"])


def recognize_corpus(corpus: Corpus, segments: Mapping[str, Sequence], model,
                     registry: Optional[RegistryTable] = None, workers: int = 1) -> list:
    unknown = sorted(set(segments) - set(corpus.documents))
    if unknown:
        raise DataError(f"segments reference documents not in the corpus: {unknown[:5]}")
    items = [(corpus[doc_id], segments.get(doc_id, [])) for doc_id in sorted(corpus.documents)]
    results = _parallel_map(_recognize_one, items, workers, {"model": model, "registry": registry})
    spans = [s for batch in results for s in batch]
    return sorted(spans, key=lambda s: (s.doc_id, s.char_start))


def normalize_spans(corpus: Corpus, spans: Iterable[IdentifierSpan], registry: Optional[RegistryTable] = None,
                    config: RepairConfig = RepairConfig()) -> tuple:
    """Repair and parse every span. Returns (edges, review queue records)."""
    edges = []
    review = []
    for span in sorted(spans, key=lambda s: (s.doc_id, s.char_start)):
        if span.doc_id not in corpus:
            raise DataError(f"extraction references unknown document {span.doc_id!r}")
        doc = corpus[span.doc_id]
        if doc.text[span.char_start:span.char_end] != span.raw_text:
            raise DataError(f"extraction [{span.char_start}, {span.char_end}) of {span.doc_id!r} "
                            "does not match the document text")
        fixed = repair(span, doc.text, config, registry)
        outcome = parse(fixed.text, registry)
        edges.append(CitationEdge(doc.doc_id, doc.court, fixed.char_start, fixed.char_end, fixed.text, outcome))
        reasons = list(fixed.reasons)
        if isinstance(outcome, Unparseable):
            reasons.append(f"unparseable: {outcome.reason}")
        if reasons:
            review.append({"doc_id": doc.doc_id, "char_start": span.char_start, "char_end": span.char_end,
                           "original": span.raw_text, "repaired": fixed.text, "reason": "; ".join(reasons),
                           "margin": span.margin})
    return edges, review


def write_review_queue(records: Iterable[dict], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in sorted(records, key=lambda r: (r["doc_id"], r["char_start"])):
            fh.write(json.dumps({k: rec[k] for k in REVIEW_COLUMNS}, ensure_ascii=False) + "\n")


def write_index(index: IdentifierIndex, path: Union[str, Path],
                warnings_path: Union[str, Path, None] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(index.entries):
            fh.write(json.dumps({"canonical": key, "doc_id": index.entries[key]}, ensure_ascii=False) + "\n")
    if warnings_path is not None:
        with open(warnings_path, "w", encoding="utf-8", newline="\n") as fh:
            for warning in index.warnings:
                fh.write(json.dumps(warning, ensure_ascii=False, sort_keys=True) + "\n")


def read_index(path: Union[str, Path]) -> IdentifierIndex:
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                entries[obj["canonical"]] = obj["doc_id"]
            except (KeyError, TypeError, json.JSONDecodeError):
                raise DataError(f"{path}:{lineno}: malformed index record") from None
    return IdentifierIndex(entries)
