"""Paragraph-level segmentation into the seven decision parts.

Seven binary chain models, one per segment type, each label every paragraph
"in" or "out". A paragraph goes to the claiming type with the largest
margin; unclaimed paragraphs continue the previous segment.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import chaincrf
from .chaincrf import ChainModel, TaggingExample
from .errors import DataError
from .recognizer import tokenize, word_shape

BINARY_LABELS = ("out", "in")
OUT, IN = 0, 1


class SegmentType(str, Enum):
    # declaration order is the tie-break priority
    HEADER = "Header"
    HISTORY = "History"
    SUBMISSION_REJOINDER = "SubmissionRejoinder"
    ARGUMENTATION = "Argumentation"
    FOOTER = "Footer"
    DISSENT = "Dissent"
    FOOTNOTES = "Footnotes"


SEGMENT_TYPES = tuple(SegmentType)


@dataclass(frozen=True)
class Segment:
    segment_type: SegmentType
    paragraph_start: int
    paragraph_end: int
    char_start: int
    char_end: int

    @property
    def paragraph_span(self) -> tuple:
        return (self.paragraph_start, self.paragraph_end)

    @property
    def char_span(self) -> tuple:
        return (self.char_start, self.char_end)


def parse_lexicon(text: str) -> frozenset:
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.lower())
    return frozenset(words)


def load_lexicon(path: Union[str, Path, None] = None) -> frozenset:
    """Cue-token lexicon; ``None`` selects the bundled default."""
    if path is None:
        text = resources.files("courtcite").joinpath("data/cues.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_lexicon(text)


def _bucket(value: float, edges: Sequence[float]) -> int:
    for k, edge in enumerate(edges):
        if value < edge:
            return k
    return len(edges)


def featurize_paragraphs(document, lexicon: Optional[frozenset] = None) -> list:
    """One feature bundle per paragraph of ``document``."""
    lexicon = load_lexicon() if lexicon is None else lexicon
    n = len(document.paragraphs)
    bundles = []
    for k, (start, end) in enumerate(document.paragraphs):
        text = document.text[start:end]
        tokens = tokenize(text)
        letters = [c for c in text if c.isalpha()]
        digits = sum(c.isdigit() for c in text)
        upper = sum(c.isupper() for c in letters)
        feats = [
            "bias",
            f"pos={_bucket(k / n, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])}",
            f"len={_bucket(len(text), [40, 120, 300, 700])}",
            f"digits={_bucket(digits / len(text), [0.005, 0.02, 0.05])}",
            f"upper={_bucket(upper / len(letters) if letters else 0.0, [0.1, 0.3, 0.7])}",
        ]
        if tokens:
            feats.append(f"lead={word_shape(tokens[0].text)[:4]}")
        if k == 0:
            feats.append("first")
        if k == n - 1:
            feats.append("last")
        cues = sorted({t.text.lower().rstrip(".") for t in tokens} & lexicon)
        feats.extend(f"cue={c}" for c in cues)
        bundles.append(feats)
    return bundles


def segments_from_types(types: Sequence[SegmentType], paragraphs: Sequence[tuple]) -> list:
    """Merge per-paragraph types into maximal same-type segments."""
    if len(types) != len(paragraphs):
        raise ValueError(f"{len(types)} types for {len(paragraphs)} paragraphs")
    segments = []
    k = 0
    while k < len(types):
        j = k
        while j + 1 < len(types) and types[j + 1] == types[k]:
            j += 1
        segments.append(Segment(SegmentType(types[k]), k, j + 1, paragraphs[k][0], paragraphs[j][1]))
        k = j + 1
    return segments


def paragraph_types(segments: Iterable[Segment]) -> list:
    types = []
    for seg in segments:
        types.extend([seg.segment_type] * (seg.paragraph_end - seg.paragraph_start))
    return types


def assign_types(models: Mapping[SegmentType, ChainModel], document,
                 lexicon: Optional[frozenset] = None) -> list:
    """Per-paragraph segment type using the margin-based merge rule."""
    missing = [t.value for t in SEGMENT_TYPES if t not in models]
    if missing:
        raise DataError(f"missing segmenter model for {', '.join(missing)}")
    n = len(document.paragraphs)
    if n == 0:
        return []
    obs = featurize_paragraphs(document, lexicon)
    best = [None] * n
    best_margin = [0.0] * n
    for seg_type in SEGMENT_TYPES:
        model = models[seg_type]
        inside = model.label_id("in")
        outside = model.label_id("out")
        labels = chaincrf.viterbi(model, obs)
        marg = chaincrf.max_marginals(model, obs)
        for t in range(n):
            if labels[t] != inside:
                continue
            margin = float(marg[t, inside] - marg[t, outside])
            # strict '>' keeps the higher-priority type on equal margins
            if best[t] is None or margin > best_margin[t]:
                best[t], best_margin[t] = seg_type, margin
    types = []
    for t in range(n):
        if best[t] is not None:
            types.append(best[t])
        else:
            types.append(types[-1] if types else SegmentType.HEADER)
    return types


def segment(models: Mapping[SegmentType, ChainModel], document,
            lexicon: Optional[frozenset] = None) -> list:
    return segments_from_types(assign_types(models, document, lexicon), document.paragraphs)


def argumentation_text(segments: Iterable[Segment], document=None) -> list:
    """Character ranges of the Argumentation segments, in document order."""
    return [seg.char_span for seg in segments if seg.segment_type is SegmentType.ARGUMENTATION]


def train_segmenter(documents: Iterable, gold: Mapping[str, Sequence[Segment]], epochs: int = 10,
                    seed: int = 0, lexicon: Optional[frozenset] = None) -> dict:
    """Train the seven per-type binary models from gold segmentations."""
    lexicon = load_lexicon() if lexicon is None else lexicon
    observed = []
    for doc in documents:
        if doc.doc_id not in gold or not doc.paragraphs:
            continue
        types = paragraph_types(gold[doc.doc_id])
        if len(types) != len(doc.paragraphs):
            raise DataError(f"gold segments of {doc.doc_id!r} cover {len(types)} paragraphs, "
                            f"document has {len(doc.paragraphs)}")
        observed.append((tuple(map(tuple, featurize_paragraphs(doc, lexicon))), types))
    if not observed:
        raise DataError("no gold-segmented documents to train on")
    models = {}
    for seg_type in SEGMENT_TYPES:
        examples = [TaggingExample(obs, tuple(IN if t is seg_type else OUT for t in types))
                    for obs, types in observed]
        models[seg_type] = chaincrf.train(examples, BINARY_LABELS, epochs=epochs, seed=seed)
    return models


def model_path(directory: Union[str, Path], seg_type: SegmentType) -> Path:
    return Path(directory) / f"{seg_type.value}.model"


def save_models(models: Mapping[SegmentType, ChainModel], directory: Union[str, Path]) -> None:
    Path(directory).mkdir(parents=True, exist_ok=True)
    for seg_type in SEGMENT_TYPES:
        chaincrf.save_model(models[seg_type], model_path(directory, seg_type))


def load_models(directory: Union[str, Path]) -> dict:
    models = {}
    for seg_type in SEGMENT_TYPES:
        path = model_path(directory, seg_type)
        if not path.is_file():
            raise DataError(f"missing segmenter model for {seg_type.value}: {path}")
        models[seg_type] = chaincrf.load_model(path)
    return models


def write_segments(segments: Mapping[str, Sequence[Segment]], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in sorted(segments):
            for seg in segments[doc_id]:
                fh.write(json.dumps({"doc_id": doc_id, "segment_type": seg.segment_type.value,
                                     "paragraph_start": seg.paragraph_start,
                                     "paragraph_end": seg.paragraph_end,
                                     "char_start": seg.char_start, "char_end": seg.char_end},
                                    ensure_ascii=False) + "\n")


def read_segments(path: Union[str, Path]) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                seg = Segment(SegmentType(obj["segment_type"]), int(obj["paragraph_start"]),
                              int(obj["paragraph_end"]), int(obj["char_start"]), int(obj["char_end"]))
            except (KeyError, ValueError, TypeError, json.JSONDecodeError):
                raise DataError(f"{path}:{lineno}: malformed segment record") from None
            out.setdefault(obj["doc_id"], []).append(seg)
    return out
