"""Repair, classification and standardization of raw identifier spans.

A raw span goes through three steps: :func:`repair` fixes truncated
recognitions against the document text, :func:`classify` decides the court
from the registry mark, and :func:`parse` applies the docket grammar and
yields one of three outcome variants (:class:`Canonical`,
:class:`OtherCourt`, :class:`Unparseable`).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .courts import APEX_COURTS, CourtClass
from .errors import DataError

CC_SENATES = ("I", "II", "III", "IV", "Pl")
YEAR_MIN, YEAR_MAX = 1990, 2100
# two-digit years at or above the pivot belong to the 1900s
YEAR_PIVOT = 93

_LETTER = r"[^\W\d_]"
_WS_RE = re.compile(r"\s+")
_BOILERPLATE_RE = re.compile(
    r"^(?:(?:sp\.\s*zn\.|č\.\s*j\.|spis\.\s*zn\.)\s*|[\s(\[{„\"'“,;:])+", re.IGNORECASE
)
_TRAILING_RE = re.compile(r"[\s)\]},;:.\"'“”]+$")
_COMPLETE_TAIL_RE = re.compile(r"\d\s?/\s?(?:\d{4}|\d{2})(?:-\d+)?$")
_SENATE_DIGITS_RE = re.compile(r"(?P<senate>\d{1,3})\s*$")
_SENATE_ROMAN_RE = re.compile(r"(?P<senate>IV|III|II|I|Pl)\.?\s*$")


@dataclass(frozen=True)
class RegistryTable:
    """Mapping of registry marks to the apex court that issues them."""

    marks: dict

    def __post_init__(self):
        for mark, court in self.marks.items():
            if court not in APEX_COURTS:
                raise DataError(f"registry mark {mark!r} maps to non-apex court {court}")
        alternation = "|".join(re.escape(m) for m in sorted(self.marks, key=lambda m: (-len(m), m)))
        object.__setattr__(
            self, "_pattern", re.compile(rf"(?<!{_LETTER})(?:{alternation})(?!{_LETTER})")
        )

    def __contains__(self, mark: str) -> bool:
        return mark in self.marks

    def court_of(self, mark: str) -> CourtClass:
        return self.marks[mark]

    def find(self, text: str) -> Optional[re.Match]:
        """First registry mark occurring as a standalone word in ``text``."""
        if not self.marks:
            return None
        return self._pattern.search(text)

    def marks_for(self, court: CourtClass) -> list[str]:
        return sorted(m for m, c in self.marks.items() if c is court)


def parse_registry(text: str) -> RegistryTable:
    marks = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"registry line {lineno}: expected '<mark> <SC|SAC|CC>', got {line!r}")
        mark, court = parts
        try:
            marks[mark] = CourtClass(court)
        except ValueError:
            raise DataError(f"registry line {lineno}: unknown court {court!r}") from None
    return RegistryTable(marks)


def load_registry(path: Union[str, Path, None] = None) -> RegistryTable:
    """Load a registry table; ``None`` selects the bundled default."""
    if path is None:
        return default_registry()
    return parse_registry(Path(path).read_text(encoding="utf-8"))


_default_registry: Optional[RegistryTable] = None


def default_registry() -> RegistryTable:
    global _default_registry
    if _default_registry is None:
        text = resources.files("courtcite").joinpath("data/registry.txt").read_text(encoding="utf-8")
        _default_registry = parse_registry(text)
    return _default_registry


@dataclass(frozen=True, order=True)
class CanonicalIdentifier:
    court: CourtClass
    senate: str
    register: str
    number: int
    year: int

    def __str__(self) -> str:
        return format_identifier(self)


@dataclass(frozen=True)
class Canonical:
    identifier: CanonicalIdentifier
    needs_review: bool = False
    kind = "canonical"

    @property
    def court(self) -> CourtClass:
        return self.identifier.court


@dataclass(frozen=True)
class OtherCourt:
    raw: str
    needs_review: bool = False
    kind = "other"
    court = CourtClass.OTHER


@dataclass(frozen=True)
class Unparseable:
    raw: str
    reason: str
    kind = "unparseable"
    court = None

    @property
    def needs_review(self) -> bool:
        return True


NormalizationOutcome = Union[Canonical, OtherCourt, Unparseable]


def canonical_whitespace(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def strip_boilerplate(text: str) -> str:
    """Drop citation boilerplate ("sp. zn.", "č. j.") and enclosing punctuation."""
    prev = None
    while prev != text:
        prev = text
        text = _BOILERPLATE_RE.sub("", text)
        text = _TRAILING_RE.sub("", text)
    return text


def expand_year(digits: str) -> int:
    value = int(digits)
    if len(digits) == 2:
        return 1900 + value if value >= YEAR_PIVOT else 2000 + value
    return value


def classify(raw: str, registry: Optional[RegistryTable] = None) -> CourtClass:
    """Court owning the first registry mark in ``raw``; OTHER if none matches."""
    registry = registry or default_registry()
    match = registry.find(raw)
    if match is None:
        return CourtClass.OTHER
    return registry.court_of(match.group())


def _grammar(court: CourtClass, mark: str) -> re.Pattern:
    tail = r" ?/ ?(?P<year>\d{4}|\d{2})(?:-\d+)?"
    if court is CourtClass.CC:
        head = rf"(?P<senate>IV|III|II|I|Pl)\.? ?{re.escape(mark)} (?P<number>\d+)"
    else:
        head = rf"(?P<senate>\d+) ?{re.escape(mark)} (?P<number>\d+)"
    return re.compile(f"^{head}{tail}$")


def parse(raw: str, registry: Optional[RegistryTable] = None) -> NormalizationOutcome:
    """Map a raw identifier string to exactly one outcome variant. Never raises."""
    registry = registry or default_registry()
    text = strip_boilerplate(canonical_whitespace(raw))
    if not text:
        return Unparseable(raw, "empty identifier")
    match = registry.find(text)
    if match is None:
        if any(ch.isdigit() for ch in text):
            return OtherCourt(raw)
        return Unparseable(raw, "no registry mark")
    mark = match.group()
    court = registry.court_of(mark)
    m = _grammar(court, mark).match(text)
    if m is None:
        return Unparseable(raw, f"malformed {court.value} docket")
    number = int(m.group("number"))
    if number <= 0:
        return Unparseable(raw, "sequence number must be positive")
    year = expand_year(m.group("year"))
    if not YEAR_MIN <= year <= YEAR_MAX:
        return Unparseable(raw, f"year {year} out of range")
    senate = m.group("senate")
    if court is not CourtClass.CC:
        if int(senate) <= 0:
            return Unparseable(raw, "senate number must be positive")
        senate = str(int(senate))
    return Canonical(CanonicalIdentifier(court, senate, mark, number, year))


def format_identifier(c: CanonicalIdentifier) -> str:
    if c.court is CourtClass.CC:
        return f"{c.senate}. {c.register} {c.number}/{c.year}"
    return f"{c.senate} {c.register} {c.number}/{c.year}"


def canonical_key(docket: str, registry: Optional[RegistryTable] = None) -> Optional[str]:
    """Canonical string for a docket, or None when it does not parse."""
    outcome = parse(docket, registry)
    if isinstance(outcome, Canonical):
        return format_identifier(outcome.identifier)
    return None


REASONS = ("extended_left", "trimmed", "extended_right", "low_margin")
# trimming boilerplate is recorded for audit but is not by itself a reason to review
REVIEW_REASONS = frozenset({"extended_left", "extended_right", "low_margin"})


@dataclass(frozen=True)
class RepairConfig:
    right_window: int = 12
    left_window: int = 8
    margin_threshold: float = 1.0


@dataclass(frozen=True)
class RepairResult:
    """Repaired identifier; ``text`` always equals the document slice at the new range."""

    text: str
    char_start: int
    char_end: int
    needs_review: bool
    reasons: tuple = field(default=())

    @property
    def reason(self) -> str:
        return "+".join(self.reasons)


def _is_complete(text: str, end: int, candidate: str) -> bool:
    if not _COMPLETE_TAIL_RE.search(candidate):
        return False
    return end >= len(text) or not text[end].isdigit()


def _trim(text: str, start: int, end: int) -> tuple:
    raw = text[start:end]
    lead = raw
    prev = None
    while prev != lead:
        prev = lead
        lead = _BOILERPLATE_RE.sub("", lead)
    start += len(raw) - len(lead)
    raw = text[start:end]
    tail = _TRAILING_RE.sub("", raw)
    return start, start + len(tail)


def repair(span, document_text: str, config: RepairConfig = RepairConfig(),
           registry: Optional[RegistryTable] = None) -> RepairResult:
    """Complete truncated identifiers and strip boilerplate around a recognized span.

    ``span`` needs ``char_start``, ``char_end`` and ``margin`` attributes.
    """
    registry = registry or default_registry()
    text = document_text
    start, end = span.char_start, span.char_end
    reasons = []

    # span starting mid-token
    left_limit = max(0, span.char_start - config.left_window)
    if start < end and text[start].isalnum():
        new_start = start
        while new_start > left_limit and text[new_start - 1].isalnum():
            new_start -= 1
        if new_start != start and (new_start == 0 or not text[new_start - 1].isalnum()):
            start = new_start
            reasons.append("extended_left")

    trimmed = _trim(text, start, end)
    if trimmed != (start, end):
        reasons.append("trimmed")
    start, end = trimmed
    if start >= end:
        return RepairResult(text[span.char_start:span.char_end], span.char_start, span.char_end,
                            True, ("empty_after_trim",))

    # dangling senate before a leading registry mark
    mark = registry.find(text[start:end])
    if mark is not None and mark.start() == 0 and start > left_limit:
        window_start = left_limit
        window = text[window_start:start]
        court = registry.court_of(mark.group())
        senate_re = _SENATE_ROMAN_RE if court is CourtClass.CC else _SENATE_DIGITS_RE
        m = senate_re.search(window)
        if m is not None:
            abs_start = window_start + m.start()
            if abs_start == 0 or not text[abs_start - 1].isalnum():
                start = abs_start
                if "extended_left" not in reasons:
                    reasons.append("extended_left")

    candidate = text[start:end]
    if not _is_complete(text, end, candidate):
        for k in range(1, config.right_window + 1):
            pos = end + k - 1
            if pos >= len(text) or text[pos] not in "0123456789/":
                break
            if _is_complete(text, end + k, text[start:end + k]):
                end += k
                reasons.append("extended_right")
                break

    if span.margin is not None and span.margin < config.margin_threshold:
        reasons.append("low_margin")
    reasons = sorted(reasons, key=REASONS.index)
    return RepairResult(text[start:end], start, end, any(r in REVIEW_REASONS for r in reasons), tuple(reasons))


def outcome_court_column(outcome: NormalizationOutcome) -> Optional[CourtClass]:
    """Matrix column for an outcome; None for unparseable mentions."""
    if isinstance(outcome, Unparseable):
        return None
    return outcome.court
