import json
import random
from pathlib import Path
from types import SimpleNamespace

import pytest
from hypothesis import given, strategies as st

from courtcite.courts import CourtClass
from courtcite.errors import DataError
from courtcite.normalizer import (
    CC_SENATES, REVIEW_REASONS, Canonical, CanonicalIdentifier, OtherCourt, RepairConfig, Unparseable,
    classify, default_registry, expand_year, format_identifier, parse, parse_registry, repair,
)

FIXTURE = Path(__file__).parent / "fixtures" / "normalizer_variants.jsonl"


def load_variants():
    cases = []
    for line in FIXTURE.read_text(encoding="utf-8").splitlines():
        case = json.loads(line)
        ctx = case["context"]
        start = ctx.index("⟦")
        end = ctx.index("⟧") - 1
        case["text"] = ctx.replace("⟦", "").replace("⟧", "")
        case["span"] = SimpleNamespace(char_start=start, char_end=end, margin=case.get("margin", 10.0))
        cases.append(case)
    return cases


VARIANTS = load_variants()


def run_variant(case):
    fixed = repair(case["span"], case["text"])
    outcome = parse(fixed.text)
    got = {
        "repaired": fixed.text,
        "kind": outcome.kind,
        "court": outcome.court.value if outcome.court is not None else None,
        "canonical": format_identifier(outcome.identifier) if isinstance(outcome, Canonical) else None,
        "reasons": list(fixed.reasons),
    }
    if isinstance(outcome, Unparseable):
        got["reason"] = outcome.reason
    return fixed, outcome, got


def expected_of(case):
    keys = ("repaired", "kind", "court", "canonical", "reasons", "reason")
    return {k: case[k] for k in keys if k in case}


def test_fixture_is_large_enough():
    kinds = {(c["kind"], c["court"]) for c in VARIANTS}
    assert len(VARIANTS) >= 50
    for court in ("SC", "SAC", "CC", "OTHER"):
        assert any(k[1] == court for k in kinds)
    assert any("extended_right" in c["reasons"] for c in VARIANTS)
    assert any("trimmed" in c["reasons"] for c in VARIANTS)


@pytest.mark.parametrize("case", VARIANTS, ids=[c["context"][:40] for c in VARIANTS])
def test_variant(case):
    fixed, outcome, got = run_variant(case)
    assert got == expected_of(case)
    assert fixed.text == case["text"][fixed.char_start:fixed.char_end]
    assert fixed.needs_review == (bool(REVIEW_REASONS & set(fixed.reasons)) or "empty_after_trim" in fixed.reasons)


def test_classify_examples():
    assert classify("I. ÚS 123/95") is CourtClass.CC
    assert classify("22 Cdo 2045/2012") is CourtClass.SC
    assert classify("5 Afs 12/2008") is CourtClass.SAC
    assert classify("C-26/62") is CourtClass.OTHER


def test_parse_examples():
    assert parse("I.ÚS 123/95") == Canonical(CanonicalIdentifier(CourtClass.CC, "I", "ÚS", 123, 1995))
    assert parse("22  Cdo   2045/2012") == Canonical(CanonicalIdentifier(CourtClass.SC, "22", "Cdo", 2045, 2012))
    hello = parse("hello world")
    assert isinstance(hello, Unparseable) and hello.reason == "no registry mark" and hello.needs_review
    assert isinstance(parse("C-26/62"), OtherCourt)
    assert parse("C-26/62").court is CourtClass.OTHER


def test_format_examples():
    assert format_identifier(CanonicalIdentifier(CourtClass.SC, "22", "Cdo", 2045, 2012)) == "22 Cdo 2045/2012"
    assert format_identifier(CanonicalIdentifier(CourtClass.CC, "Pl", "ÚS", 12, 1994)) == "Pl. ÚS 12/1994"


@pytest.mark.parametrize("digits, year", [("93", 1993), ("99", 1999), ("00", 2000), ("92", 2092),
                                          ("2012", 2012)])
def test_year_pivot(digits, year):
    assert expand_year(digits) == year


def test_repair_noop_and_completion():
    text = "viz 22 Cdo 2045/2012 a"
    fixed = repair(SimpleNamespace(char_start=4, char_end=20, margin=5.0), text)
    assert (fixed.text, fixed.needs_review, fixed.reasons) == ("22 Cdo 2045/2012", False, ())
    fixed = repair(SimpleNamespace(char_start=4, char_end=17, margin=5.0), text)
    assert fixed.text == "22 Cdo 2045/2012" and fixed.needs_review
    assert fixed.reason == "extended_right"


def test_repair_windows_are_configurable():
    text = "pod 22 Cdo 1/2012 a"
    span = SimpleNamespace(char_start=4, char_end=12, margin=None)
    assert repair(span, text).text == "22 Cdo 1/2012"
    assert repair(span, text, RepairConfig(right_window=4)).text == "22 Cdo 1"
    dangling = "rozsudek 22 Cdo 2045/2012 z"
    span = SimpleNamespace(char_start=12, char_end=25, margin=None)
    assert repair(span, dangling).text == "22 Cdo 2045/2012"
    assert repair(span, dangling, RepairConfig(left_window=2)).text == "Cdo 2045/2012"


def random_identifier(rng):
    registry = default_registry()
    court = rng.choice([CourtClass.SC, CourtClass.SAC, CourtClass.CC])
    mark = rng.choice(registry.marks_for(court))
    senate = rng.choice(CC_SENATES) if court is CourtClass.CC else str(rng.randint(1, 999))
    return CanonicalIdentifier(court, senate, mark, rng.randint(1, 99999), rng.randint(1990, 2100))


def test_round_trip_1000():
    rng = random.Random(7)
    for _ in range(1000):
        c = random_identifier(rng)
        text = format_identifier(c)
        assert parse(text) == Canonical(c), text
        assert classify(text) is c.court


@given(st.text(max_size=40))
def test_parse_is_total(raw):
    outcome = parse(raw)
    assert outcome.kind in ("canonical", "other", "unparseable")
    if isinstance(outcome, Unparseable):
        assert outcome.needs_review
    if isinstance(outcome, Canonical):
        again = parse(format_identifier(outcome.identifier))
        assert again == outcome


@given(st.text(alphabet=st.sampled_from("12/ CdoÚSI.-sp zn"), max_size=30), st.data())
def test_repair_returns_document_slice(text, data):
    start = data.draw(st.integers(0, len(text)))
    end = data.draw(st.integers(start, len(text)))
    fixed = repair(SimpleNamespace(char_start=start, char_end=end, margin=0.0), text)
    assert fixed.text == text[fixed.char_start:fixed.char_end]
    assert fixed.needs_review


def test_registry_parsing():
    table = parse_registry("# marks\nCdo SC\nAs SAC  # admin\nÚS CC\n")
    assert table.marks == {"Cdo": CourtClass.SC, "As": CourtClass.SAC, "ÚS": CourtClass.CC}
    with pytest.raises(DataError, match="line 1"):
        parse_registry("Cdo")
    with pytest.raises(DataError, match="unknown court"):
        parse_registry("Cdo XX")
    with pytest.raises(DataError, match="non-apex"):
        parse_registry("Co OTHER")


def test_registry_mark_needs_word_boundary():
    registry = default_registry()
    assert registry.find("Cdox") is None
    assert registry.find("xAs 1") is None
    assert registry.find("32 ICdo 1/2015").group() == "ICdo"
    assert registry.find("20 Cdon 1/2015").group() == "Cdon"


def test_custom_registry_changes_classification():
    registry = parse_registry("Co SC\n")
    assert parse("46 Co 230/2011", registry) == Canonical(CanonicalIdentifier(CourtClass.SC, "46", "Co", 230, 2011))
    assert isinstance(parse("22 Cdo 1/2012", registry), OtherCourt)
