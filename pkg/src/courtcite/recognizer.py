"""BIO tagging of court-identifier spans with the chain labeler."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from . import chaincrf
from .chaincrf import ChainModel, TaggingExample
from .errors import DataError
from .normalizer import RegistryTable, default_registry

logger = logging.getLogger(__name__)

BIO_LABELS = ("O", "B", "I")
O, B, I = range(3)
GOLD_LABEL = "court_identifier"
MARGIN_DIGITS = 6

_CHUNK_RE = re.compile(r"\S+")
_ROMAN_RE = re.compile(r"^[IVX]+$")
_DIGIT_SLASH_RE = re.compile(r"\d+/\d+")
_SENTENCE_END = {".", "!", "?", ";"}


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int

    @property
    def shape(self) -> str:
        return word_shape(self.text)

    @property
    def case_pattern(self) -> str:
        if self.text.isupper():
            return "upper"
        if self.text[:1].isupper():
            return "title"
        if self.text.islower():
            return "lower"
        return "mixed"

    @property
    def digit_pattern(self) -> str:
        if not any(c.isdigit() for c in self.text):
            return "none"
        return word_shape("".join(c for c in self.text if not c.isalpha()))

    @property
    def punctuation(self) -> bool:
        return not any(c.isalnum() for c in self.text)


@dataclass(frozen=True)
class IdentifierSpan:
    doc_id: str
    char_start: int
    char_end: int
    raw_text: str
    margin: Optional[float] = None


def word_shape(text: str) -> str:
    out = []
    for ch in text:
        if ch.isupper():
            c = "X"
        elif ch.isalpha():
            c = "x"
        elif ch.isdigit():
            c = "d"
        else:
            c = ch
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


def _keeps_period(core: str) -> bool:
    if not core:
        return False
    if _ROMAN_RE.match(core) or core == "Pl":
        return True
    return core.isalpha() and core.islower() and len(core) <= 5


def tokenize(text: str, offset: int = 0) -> list:
    """Whitespace tokens with edge punctuation split off.

    A trailing '.' stays on roman numerals, "Pl" and short lowercase
    abbreviations ("sp.", "zn."); a trailing '/' stays on tokens with digits.
    Inner characters are never split, so "2045/2012" is one token.
    """
    tokens = []
    for m in _CHUNK_RE.finditer(text):
        chunk, base = m.group(), offset + m.start()
        i, j = 0, len(chunk)
        while i < j and not chunk[i].isalnum():
            tokens.append(Token(chunk[i], base + i, base + i + 1))
            i += 1
        trailing = []
        while j > i and not chunk[j - 1].isalnum():
            ch, core = chunk[j - 1], chunk[i:j - 1]
            if ch == "." and _keeps_period(core):
                break
            if ch == "/" and any(c.isdigit() for c in core):
                break
            trailing.append(Token(ch, base + j - 1, base + j))
            j -= 1
        if i < j:
            tokens.append(Token(chunk[i:j], base + i, base + j))
        tokens.extend(reversed(trailing))
    return tokens


def _position_bucket(k: int) -> str:
    if k < 3:
        return str(k)
    if k < 6:
        return "3-5"
    if k < 11:
        return "6-10"
    return "11+"


def token_features(tokens: Sequence[Token], registry: Optional[RegistryTable] = None) -> list:
    """One feature bundle per token."""
    registry = registry or default_registry()
    words = [t.text.lower() for t in tokens]
    shapes = [word_shape(t.text) for t in tokens]
    marks = [t.text in registry for t in tokens]
    n = len(tokens)

    def at(seq, k, pad):
        return seq[k] if 0 <= k < n else pad

    bundles = []
    since_boundary = 0
    for k, tok in enumerate(tokens):
        feats = [
            "bias",
            f"w={words[k]}",
            f"w-1={at(words, k - 1, '<s>')}",
            f"w+1={at(words, k + 1, '</s>')}",
            f"shape={shapes[k]}",
            f"shape-1={at(shapes, k - 1, '<s>')}",
            f"shape+1={at(shapes, k + 1, '</s>')}",
            f"shape+2={at(shapes, k + 2, '</s>')}",
            f"shape-2={at(shapes, k - 2, '<s>')}",
            f"shape-1|shape={at(shapes, k - 1, '<s>')}|{shapes[k]}",
            f"shape|shape+1={shapes[k]}|{at(shapes, k + 1, '</s>')}",
            f"pos={_position_bucket(since_boundary)}",
        ]
        if marks[k]:
            feats.append("mark")
        if at(marks, k - 1, False):
            feats.append("mark-1")
        if at(marks, k + 1, False):
            feats.append("mark+1")
        if at(marks, k + 2, False):
            feats.append("mark+2")
        if _DIGIT_SLASH_RE.search(tok.text):
            feats.append("digit_slash")
        bundles.append(feats)
        since_boundary = 0 if tok.text in _SENTENCE_END else since_boundary + 1
    return bundles


def bio_decode(labels: Sequence[str]) -> list:
    """Token-index ranges [start, end) of the spans encoded by BIO ``labels``.

    An I that does not continue a span opens a new one.
    """
    spans = []
    start = None
    for k, label in enumerate(labels):
        if label == "B" or (label == "I" and start is None):
            if start is not None:
                spans.append((start, k))
            start = k
        elif label == "O":
            if start is not None:
                spans.append((start, k))
            start = None
    if start is not None:
        spans.append((start, len(labels)))
    return spans


def bio_encode(spans: Iterable[tuple], length: int) -> list:
    labels = ["O"] * length
    for start, end in spans:
        labels[start] = "B"
        for k in range(start + 1, end):
            labels[k] = "I"
    return labels


def token_labels(tokens: Sequence[Token], spans: Iterable[tuple]) -> list:
    """BIO labels for tokens given character spans; tokens fully inside a span belong to it."""
    labels = ["O"] * len(tokens)
    for start, end in spans:
        inside = [k for k, t in enumerate(tokens) if t.start >= start and t.end <= end]
        if not inside:
            continue
        covered = (tokens[inside[0]].start, tokens[inside[-1]].end)
        if covered != (start, end):
            logger.warning("gold span [%d, %d) is not token-aligned", start, end)
        labels[inside[0]] = "B"
        for k in inside[1:]:
            labels[k] = "I"
    return labels


def decode_tokens(model: ChainModel, tokens: Sequence[Token],
                  registry: Optional[RegistryTable] = None) -> list:
    """(token range, margin) pairs for the spans the model finds in ``tokens``."""
    if not tokens:
        return []
    obs = token_features(tokens, registry)
    labels = [model.labels[y] for y in chaincrf.viterbi(model, obs)]
    spans = bio_decode(labels)
    if not spans:
        return []
    marg = chaincrf.max_marginals(model, obs)
    b = model.label_id("B")
    out = []
    for start, end in spans:
        row = marg[start]
        others = [row[j] for j in range(model.n_labels) if j != b]
        margin = float(row[b] - max(others)) if others else 0.0
        # rounded so that dumped and in-memory margins are the same value
        out.append(((start, end), round(margin, MARGIN_DIGITS)))
    return out


def recognize(model: ChainModel, document, ranges: Sequence[tuple],
              registry: Optional[RegistryTable] = None) -> list:
    """Identifier spans inside the given character ranges of ``document``."""
    if set(model.labels) != set(BIO_LABELS):
        raise DataError(f"recognizer model must use labels {BIO_LABELS}, got {model.labels}")
    text = document.text
    spans = []
    for range_start, range_end in ranges:
        tokens = tokenize(text[range_start:range_end], offset=range_start)
        for (t0, t1), margin in decode_tokens(model, tokens, registry):
            start, end = tokens[t0].start, tokens[t1 - 1].end
            spans.append(IdentifierSpan(document.doc_id, start, end, text[start:end], margin))
    return spans


def examples_from_text(text: str, ranges: Sequence[tuple], spans: Sequence[tuple],
                       registry: Optional[RegistryTable] = None) -> list:
    """One tagging example per range; ``spans`` are gold character ranges."""
    examples = []
    for range_start, range_end in ranges:
        tokens = tokenize(text[range_start:range_end], offset=range_start)
        if not tokens:
            continue
        inner = [(s, e) for s, e in spans if s >= range_start and e <= range_end]
        labels = token_labels(tokens, inner)
        examples.append(TaggingExample(tuple(map(tuple, token_features(tokens, registry))),
                                       tuple(BIO_LABELS.index(y) for y in labels)))
    return examples


def train_recognizer(documents: Iterable, gold: dict, epochs: int = 10, seed: int = 0,
                     registry: Optional[RegistryTable] = None) -> ChainModel:
    """Train on every paragraph of the gold-annotated documents."""
    examples = []
    for doc in documents:
        spans = [(s, e) for s, e, _ in gold.get(doc.doc_id, ())]
        examples.extend(examples_from_text(doc.text, doc.paragraphs, spans, registry))
    return chaincrf.train(examples, BIO_LABELS, epochs=epochs, seed=seed)


def read_gold(path: Union[str, Path]) -> dict:
    """Gold annotations: doc_id -> sorted list of (char_start, char_end, label)."""
    gold = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                item = (int(obj["char_start"]), int(obj["char_end"]), obj.get("label", GOLD_LABEL))
                doc_id = obj["doc_id"]
            except (KeyError, ValueError, TypeError, json.JSONDecodeError):
                raise DataError(f"{path}:{lineno}: malformed gold annotation") from None
            gold.setdefault(doc_id, []).append(item)
    return {doc_id: sorted(spans) for doc_id, spans in gold.items()}


def write_gold(gold: dict, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in sorted(gold):
            for start, end, label in sorted(gold[doc_id]):
                fh.write(json.dumps({"doc_id": doc_id, "char_start": start, "char_end": end,
                                     "label": label}, ensure_ascii=False) + "\n")


def write_extractions(spans: Iterable[IdentifierSpan], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sorted(spans, key=lambda s: (s.doc_id, s.char_start)):
            fh.write(json.dumps({"doc_id": s.doc_id, "char_start": s.char_start, "char_end": s.char_end,
                                 "raw_text": s.raw_text, "margin": s.margin},
                                ensure_ascii=False) + "\n")


def read_extractions(path: Union[str, Path]) -> list:
    spans = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                spans.append(IdentifierSpan(obj["doc_id"], int(obj["char_start"]), int(obj["char_end"]),
                                            obj["raw_text"], obj.get("margin")))
            except (KeyError, ValueError, TypeError, json.JSONDecodeError):
                raise DataError(f"{path}:{lineno}: malformed extraction record") from None
    return spans
