"""Corpus ingestion: manifest loading, paragraph splitting and the docket index."""
from __future__ import annotations

import datetime as dt
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .courts import APEX_COURTS, CourtClass
from .errors import CorpusError
from .normalizer import Canonical, RegistryTable, format_identifier, parse

logger = logging.getLogger(__name__)

MANIFEST_KEYS = ("doc_id", "court", "docket", "date", "file")

_BLANK_LINE_RE = re.compile(r"\n[ \t\r\f\v]*\n")
_NEWLINE_RE = re.compile(r"\n[ \t\r\f\v]*")


@dataclass(frozen=True)
class Document:
    doc_id: str
    court: CourtClass
    docket: str
    date: dt.date
    text: str
    paragraphs: tuple = ()

    def paragraph_text(self, index: int) -> str:
        start, end = self.paragraphs[index]
        return self.text[start:end]


@dataclass(frozen=True)
class Corpus:
    documents: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents.values())

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.documents

    @property
    def counts(self) -> dict:
        counts = Counter(doc.court for doc in self.documents.values())
        return {court: counts.get(court, 0) for court in APEX_COURTS}

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        by_id = {}
        for doc in documents:
            if doc.doc_id in by_id:
                raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
            if doc.court not in APEX_COURTS:
                raise CorpusError(f"document {doc.doc_id!r} has non-apex court {doc.court}")
            by_id[doc.doc_id] = doc
        return cls(by_id)


def split_paragraphs(text: str, fallback: bool = True) -> list:
    """Half-open character ranges of the paragraphs in ``text``.

    Blank lines separate paragraphs. When the text has no blank line at all
    and ``fallback`` is set, a newline followed by an uppercase letter or a
    digit also starts a paragraph. Ranges exclude surrounding whitespace.
    """
    if _BLANK_LINE_RE.search(text) or not fallback:
        breaks = _BLANK_LINE_RE.finditer(text)
    else:
        breaks = (m for m in _NEWLINE_RE.finditer(text)
                  if m.end() < len(text) and (text[m.end()].isupper() or text[m.end()].isdigit()))
    ranges = []
    pos = 0
    for m in breaks:
        _append_trimmed(text, pos, m.start(), ranges)
        pos = m.end()
    _append_trimmed(text, pos, len(text), ranges)
    return ranges


def _append_trimmed(text: str, start: int, end: int, out: list) -> None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start < end:
        out.append((start, end))


def make_document(doc_id: str, court: Union[CourtClass, str], docket: str,
                  date: Union[dt.date, str], text: str, fallback: bool = True) -> Document:
    if isinstance(date, str):
        date = dt.date.fromisoformat(date)
    return Document(doc_id, CourtClass(court), docket, date, text,
                    tuple(split_paragraphs(text, fallback)))


def read_manifest(manifest_path: Union[str, Path]) -> list:
    """Validated manifest rows as dicts, each tagged with its line number."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise CorpusError(f"manifest not found: {manifest_path}")
    rows = []
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{manifest_path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{manifest_path}:{lineno}: expected a JSON object")
            missing = [k for k in MANIFEST_KEYS if k not in obj]
            if missing:
                raise CorpusError(f"{manifest_path}:{lineno}: missing keys {missing}")
            court = obj["court"]
            if court not in ("SC", "SAC", "CC"):
                raise CorpusError(f"{manifest_path}:{lineno}: invalid court {court!r} for {obj['doc_id']!r}")
            try:
                date = dt.date.fromisoformat(obj["date"])
            except (TypeError, ValueError):
                raise CorpusError(
                    f"{manifest_path}:{lineno}: malformed date {obj['date']!r} for {obj['doc_id']!r}"
                ) from None
            row = {k: obj[k] for k in MANIFEST_KEYS}
            row["date"] = date
            row["line"] = lineno
            rows.append(row)
    return rows


def load_corpus(manifest_path: Union[str, Path], fallback: bool = True) -> Corpus:
    """Materialize every manifest row as a :class:`Document`.

    Text files are resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    documents = {}
    for row in read_manifest(manifest_path):
        doc_id = row["doc_id"]
        if doc_id in documents:
            raise CorpusError(f"{manifest_path}:{row['line']}: duplicate doc_id {doc_id!r}")
        text_path = base / row["file"]
        try:
            text = text_path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise CorpusError(
                f"{manifest_path}:{row['line']}: text file {row['file']!r} for {doc_id!r} not found"
            ) from None
        except UnicodeDecodeError:
            raise CorpusError(f"{manifest_path}:{row['line']}: {row['file']!r} is not UTF-8") from None
        documents[doc_id] = make_document(doc_id, row["court"], row["docket"], row["date"], text, fallback)
    logger.info("loaded %d documents from %s", len(documents), manifest_path)
    return Corpus(documents)


@dataclass(frozen=True)
class IdentifierIndex:
    """Canonical docket string -> doc_id, plus warnings recorded while building."""

    entries: dict = field(default_factory=dict)
    warnings: tuple = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> Optional[str]:
        return self.entries.get(key)


def build_index(corpus: Corpus, registry: Optional[RegistryTable] = None) -> IdentifierIndex:
    """Index documents by canonical docket; collisions keep the earliest-dated one."""
    entries = {}
    warnings = []
    # earliest date first, doc_id breaks ties
    for doc in sorted(corpus, key=lambda d: (d.date, d.doc_id)):
        outcome = parse(doc.docket, registry)
        if not isinstance(outcome, Canonical) or outcome.court is not doc.court:
            warnings.append({"kind": "unparseable_docket", "doc_id": doc.doc_id, "docket": doc.docket})
            logger.warning("docket %r of %s does not parse for %s; excluded from index",
                           doc.docket, doc.doc_id, doc.court.value)
            continue
        key = format_identifier(outcome.identifier)
        if key in entries:
            warnings.append({"kind": "collision", "doc_id": doc.doc_id, "docket": key,
                             "kept": entries[key]})
            logger.warning("docket %s of %s collides with %s; keeping the earlier", key, doc.doc_id, entries[key])
            continue
        entries[key] = doc.doc_id
    return IdentifierIndex(entries, tuple(warnings))
