"""Citation edges, resolution against the corpus index, and per-court count matrices."""
from __future__ import annotations

import csv
import dataclasses
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .courts import APEX_COURTS, CourtClass
from .errors import DataError
from .normalizer import Canonical, NormalizationOutcome, RegistryTable, Unparseable, format_identifier, parse

EDGE_COLUMNS = ("citing_doc_id", "char_start", "char_end", "raw_text", "outcome_kind", "cited_court",
                "cited_canonical", "resolved_doc_id", "self_citation")
GRAPH_COLUMNS = ("citing_doc_id", "cited_doc_id", "count")
COLUMNS = ("SC", "SAC", "CC", "Rest")


@dataclass(frozen=True)
class CitationEdge:
    citing_doc_id: str
    citing_court: CourtClass
    char_start: int
    char_end: int
    raw_text: str
    outcome: NormalizationOutcome
    resolved_doc_id: Optional[str] = None

    @property
    def cited_canonical(self) -> Optional[str]:
        if isinstance(self.outcome, Canonical):
            return format_identifier(self.outcome.identifier)
        return None

    @property
    def cited_court(self) -> Optional[CourtClass]:
        return self.outcome.court

    @property
    def self_citation(self) -> bool:
        return self.resolved_doc_id is not None and self.resolved_doc_id == self.citing_doc_id

    @property
    def sort_key(self) -> tuple:
        return (self.citing_doc_id, self.char_start, self.char_end)


def link(edges: Sequence[CitationEdge], index) -> list:
    """Resolve canonical edges through ``index``; order and other fields are preserved."""
    out = []
    for edge in edges:
        key = edge.cited_canonical
        resolved = index.get(key) if key is not None else None
        out.append(dataclasses.replace(edge, resolved_doc_id=resolved))
    return out


@dataclass(frozen=True)
class CitationMatrix:
    """Counts keyed by (citing court, cited column); columns SC, SAC, CC and Rest."""

    unlinked: dict
    linked: dict
    unparseable: int = 0

    def cell(self, table: str, citing: str, cited: str) -> int:
        return getattr(self, table).get((citing, cited), 0)

    def row_total(self, citing: str) -> int:
        return sum(self.cell("unlinked", citing, col) for col in COLUMNS)

    def to_dict(self) -> dict:
        rows = [c.value for c in APEX_COURTS]
        return {
            "unlinked": {r: {c: self.cell("unlinked", r, c) for c in COLUMNS} for r in rows},
            "linked": {r: {c: self.cell("linked", r, c) for c in COLUMNS[:3]} for r in rows},
            "unparseable": self.unparseable,
        }


def _column(outcome: NormalizationOutcome) -> Optional[str]:
    if isinstance(outcome, Unparseable):
        return None
    if outcome.court is CourtClass.OTHER:
        return "Rest"
    return outcome.court.value


def citation_matrix(edges: Iterable[CitationEdge]) -> CitationMatrix:
    """Count every mention; unparseable ones only in the separate scalar."""
    unlinked = Counter()
    linked = Counter()
    unparseable = 0
    for edge in edges:
        if edge.citing_court not in APEX_COURTS:
            raise DataError(f"edge from {edge.citing_doc_id!r} has unknown citing court {edge.citing_court!r}")
        column = _column(edge.outcome)
        if column is None:
            unparseable += 1
            continue
        row = edge.citing_court.value
        unlinked[(row, column)] += 1
        if edge.resolved_doc_id is not None:
            linked[(row, column)] += 1
    return CitationMatrix(dict(unlinked), dict(linked), unparseable)


def merge_matrices(a: CitationMatrix, b: CitationMatrix) -> CitationMatrix:
    return CitationMatrix(dict(Counter(a.unlinked) + Counter(b.unlinked)),
                          dict(Counter(a.linked) + Counter(b.linked)),
                          a.unparseable + b.unparseable)


def format_matrix(matrix: CitationMatrix) -> str:
    """Plain-text layout of the unlinked and linked tables."""
    names = {c.value: c.label for c in CourtClass}
    names["Rest"] = "Rest"
    row_names = {c.value: f"{c.label} cites" for c in APEX_COURTS}
    width = max(len(n) for n in row_names.values())

    def table(title: str, name: str, columns: Sequence[str]) -> list:
        widths = [max(len(names[c]), 8) for c in columns]
        lines = [title, "  ".join([f"{'Court':<{width}}"] + [f"{names[c]:>{w}}" for c, w in zip(columns, widths)])]
        for r in row_names:
            cells = [f"{matrix.cell(name, r, c):>{w}}" for c, w in zip(columns, widths)]
            lines.append("  ".join([f"{row_names[r]:<{width}}"] + cells))
        return lines

    lines = table("References sorted by categories, unlinked", "unlinked", COLUMNS)
    lines.append("")
    lines += table("References linked with texts in the corpus", "linked", COLUMNS[:3])
    lines.append("")
    lines.append(f"Unparseable mentions (in no cell): {matrix.unparseable}")
    return "\n".join(lines) + "\n"


def write_matrix(matrix: CitationMatrix, text_path: Union[str, Path], json_path: Union[str, Path]) -> None:
    Path(text_path).write_text(format_matrix(matrix), encoding="utf-8", newline="\n")
    Path(json_path).write_text(json.dumps(matrix.to_dict(), indent=2) + "\n", encoding="utf-8", newline="\n")


def _edge_row(edge: CitationEdge) -> list:
    court = edge.cited_court
    return [edge.citing_doc_id, edge.char_start, edge.char_end, edge.raw_text, edge.outcome.kind,
            court.value if court is not None else "", edge.cited_canonical or "",
            edge.resolved_doc_id or "", "true" if edge.self_citation else "false"]


def export_edges(edges: Iterable[CitationEdge], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EDGE_COLUMNS)
        for edge in edges:
            writer.writerow(_edge_row(edge))


def export_graph(edges: Iterable[CitationEdge], path: Union[str, Path]) -> None:
    """Resolved edges collapsed per (citing, cited) pair with a mention count."""
    counts = Counter((e.citing_doc_id, e.resolved_doc_id) for e in edges if e.resolved_doc_id is not None)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRAPH_COLUMNS)
        for (citing, cited), n in sorted(counts.items()):
            writer.writerow([citing, cited, n])


def read_edges(path: Union[str, Path], courts: Mapping[str, CourtClass],
               registry: Optional[RegistryTable] = None) -> list:
    """Edges from an edge CSV; outcomes are recomputed from ``raw_text``.

    ``courts`` maps citing doc_id to its issuing court.
    """
    edges = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != EDGE_COLUMNS:
            raise DataError(f"{path}: unexpected edge CSV header {reader.fieldnames}")
        for lineno, row in enumerate(reader, 2):
            doc_id = row["citing_doc_id"]
            if doc_id not in courts:
                raise DataError(f"{path}:{lineno}: citing document {doc_id!r} not in corpus")
            try:
                start, end = int(row["char_start"]), int(row["char_end"])
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed character range") from None
            outcome = parse(row["raw_text"], registry)
            if outcome.kind != row["outcome_kind"]:
                raise DataError(f"{path}:{lineno}: outcome {row['outcome_kind']!r} does not match "
                                f"the registry ({outcome.kind!r})")
            edges.append(CitationEdge(doc_id, courts[doc_id], start, end, row["raw_text"], outcome,
                                      row["resolved_doc_id"] or None))
    return edges
