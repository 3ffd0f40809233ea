"""Span-level precision/recall/F1 under strict and overlap agreement."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .recognizer import GOLD_LABEL

STRICT = "strict"
OVERLAP = "overlap"
MODES = (STRICT, OVERLAP)


@dataclass(frozen=True)
class EvalReport:
    mode: str
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        # harmonic mean of P and R, written over the counts to keep one rounding
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if self.tp else 0.0

    def __add__(self, other: "EvalReport") -> "EvalReport":
        if self.mode != other.mode:
            raise ValueError(f"cannot merge {self.mode} and {other.mode} reports")
        return EvalReport(self.mode, self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def _normalize(spans: Sequence, what: str, doc_id: str) -> list:
    out = []
    for span in spans:
        start, end = int(span[0]), int(span[1])
        label = span[2] if len(span) > 2 else GOLD_LABEL
        if start >= end:
            raise ValueError(f"{what} span [{start}, {end}) in {doc_id!r} is empty")
        out.append((start, end, label))
    out.sort()
    for a, b in zip(out, out[1:]):
        if b[0] < a[1]:
            raise ValueError(f"{what} spans overlap in {doc_id!r}: {a[:2]} and {b[:2]}")
    return out


def _overlaps(a: tuple, b: tuple) -> bool:
    return max(a[0], b[0]) < min(a[1], b[1])


def match_count(gold: Sequence[tuple], predicted: Sequence[tuple], mode: str) -> int:
    """One-to-one matches between two sorted, disjoint span lists."""
    if mode == STRICT:
        return len(set(gold) & set(predicted))
    if mode != OVERLAP:
        raise ValueError(f"unknown mode {mode!r}")
    matched = [False] * len(gold)
    tp = 0
    first = 0
    for p in predicted:
        # gold spans ending before p starts cannot overlap p or any later prediction
        while first < len(gold) and gold[first][1] <= p[0]:
            first += 1
        for j in range(first, len(gold)):
            g = gold[j]
            if g[0] >= p[1]:
                break
            if not matched[j] and g[2] == p[2] and _overlaps(g, p):
                matched[j] = True
                tp += 1
                break
    return tp


def evaluate(gold: Mapping[str, Sequence], predicted: Mapping[str, Sequence], mode: str) -> EvalReport:
    """Compare per-document span sets; spans are (start, end) or (start, end, label)."""
    tp = fp = fn = 0
    for doc_id in sorted(set(gold) | set(predicted)):
        g = _normalize(gold.get(doc_id, ()), "gold", doc_id)
        p = _normalize(predicted.get(doc_id, ()), "predicted", doc_id)
        matches = match_count(g, p, mode)
        tp += matches
        fp += len(p) - matches
        fn += len(g) - matches
    return EvalReport(mode, tp, fp, fn)


def predicted_spans(spans: Sequence) -> dict:
    """Group IdentifierSpan objects into the per-document form :func:`evaluate` takes."""
    out = {}
    for s in spans:
        out.setdefault(s.doc_id, []).append((s.char_start, s.char_end, GOLD_LABEL))
    return out


def evaluate_pipeline(gold: Mapping[str, Sequence], corpus, segmenter_models, recognizer_model,
                      lexicon: Optional[frozenset] = None, registry=None) -> tuple:
    """Segment, keep the argumentation, recognize, then score in both modes."""
    from .segmenter import argumentation_text, segment
    from .recognizer import recognize

    found = []
    for doc in corpus:
        if not doc.paragraphs:
            continue
        ranges = argumentation_text(segment(segmenter_models, doc, lexicon), doc)
        found.extend(recognize(recognizer_model, doc, ranges, registry))
    predicted = predicted_spans(found)
    return evaluate(gold, predicted, STRICT), evaluate(gold, predicted, OVERLAP)


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return text[1:] if text.startswith("0") else text


def format_report(rows: Mapping[str, tuple]) -> str:
    """Plain-text table; ``rows`` maps a row name to a (strict, overlap) report pair."""
    width = max([len(name) for name in rows] + [12])
    lines = [
        f"{'':<{width}} | {'Strict agreement':^22} | {'Overlap agreement':^22}",
        f"{'':<{width}} | {'P':>6} {'R':>6} {'F1':>8} | {'P':>6} {'R':>6} {'F1':>8}",
        "-" * (width + 51),
    ]
    for name, (strict, overlap) in rows.items():
        lines.append(
            f"{name:<{width}} | {_fmt(strict.precision):>6} {_fmt(strict.recall):>6} {_fmt(strict.f1):>8} | "
            f"{_fmt(overlap.precision):>6} {_fmt(overlap.recall):>6} {_fmt(overlap.f1):>8}"
        )
    lines.append("precision and recall are 0 when their denominator is 0")
    return "\n".join(lines) + "\n"


def report_json(rows: Mapping[str, tuple]) -> str:
    data = {name: {r.mode: r.to_dict() for r in pair} for name, pair in rows.items()}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
