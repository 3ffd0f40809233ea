import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from courtcite import chaincrf
from courtcite.chaincrf import ChainModel
from courtcite.corpus import load_corpus, make_document
from courtcite.errors import DataError
from courtcite.recognizer import (
    BIO_LABELS, IdentifierSpan, bio_decode, bio_encode, read_extractions, read_gold, recognize, token_labels,
    token_features, tokenize, train_recognizer, write_extractions, write_gold,
)
from courtcite.segmenter import SegmentType, read_segments

FIXTURES = Path(__file__).parent / "fixtures"
MINI = FIXTURES / "minicorpus"


def test_tokenize_empty():
    assert tokenize("") == []
    assert tokenize("   \n ") == []


def test_tokenize_docket_example():
    assert [t.text for t in tokenize("sp. zn. 22 Cdo 2045/2012,")] == ["sp.", "zn.", "22", "Cdo", "2045/2012", ","]


def test_tokenize_keeps_senate_period():
    assert [t.text for t in tokenize("nález IV. ÚS 3102/08 a Pl. ÚS 19/93.")] == [
        "nález", "IV.", "ÚS", "3102/08", "a", "Pl.", "ÚS", "19/93", "."]


def test_tokenize_offsets():
    tokens = tokenize("(viz 5 Afs 1/2008)", offset=100)
    assert [(t.text, t.start, t.end) for t in tokens] == [
        ("(", 100, 101), ("viz", 101, 104), ("5", 105, 106), ("Afs", 107, 110), ("1/2008", 111, 117),
        (")", 117, 118)]


def test_tokenize_paragraph_snapshot():
    text = (FIXTURES / "tokenize_paragraph.txt").read_text(encoding="utf-8")
    snapshot = json.loads((FIXTURES / "tokenize_paragraph.tokens.json").read_text(encoding="utf-8"))
    assert [[t.text, t.start, t.end] for t in tokenize(text)] == snapshot


@given(st.text(alphabet=st.sampled_from("aZ1/.,( )\n-Ú"), max_size=50))
def test_tokens_reconstruct_source(text):
    tokens = tokenize(text)
    pos = 0
    for t in tokens:
        assert pos <= t.start < t.end
        assert text[pos:t.start].isspace() or pos == t.start
        assert text[t.start:t.end] == t.text
        pos = t.end
    assert text[pos:].strip() == ""


def test_token_shape_features():
    (tok,) = tokenize("2045/2012")
    assert tok.shape == "d/d"
    assert tok.digit_pattern == "d/d"
    assert tokenize("Cdo")[0].case_pattern == "title"
    assert tokenize("ÚS")[0].case_pattern == "upper"
    assert tokenize(",")[0].punctuation


@pytest.mark.parametrize("labels, spans", [
    ([], []),
    (["O", "O", "O"], []),
    (["B", "I", "O", "B"], [(0, 2), (3, 4)]),
    (["I", "I", "O"], [(0, 2)]),
    (["B", "B", "I"], [(0, 1), (1, 3)]),
    (["O", "I", "O", "I", "I"], [(1, 2), (3, 5)]),
])
def test_bio_decode(labels, spans):
    assert bio_decode(labels) == spans


@given(st.lists(st.integers(1, 3), max_size=8), st.lists(st.integers(0, 2), max_size=8))
def test_bio_round_trip(lengths, gaps):
    spans = []
    pos = 0
    for k, n in enumerate(lengths):
        pos += gaps[k] if k < len(gaps) else 0
        spans.append((pos, pos + n))
        pos += n
    assert bio_decode(bio_encode(spans, pos + 1)) == spans


def hand_model():
    # emission rows: O, B, I; O -> I is forbidden
    vocab = {"w=22": 0, "w=cdo": 1, "w=2045/2012": 2}
    emission = np.array([[0.0, 5.0, 0.0], [0.0, 0.0, 5.0], [0.0, 0.0, 5.0]])
    transition = np.array([[0.0, 0.0, -10.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return ChainModel(BIO_LABELS, vocab, emission, transition)


def test_recognize_hand_model():
    doc = make_document("d", "SC", "1 Cdo 1/2000", "2000-01-01", "viz 22 Cdo 2045/2012 a")
    model = hand_model()
    tokens = tokenize(doc.text)
    labels = [model.labels[y] for y in chaincrf.viterbi(model, token_features(tokens))]
    assert labels == ["O", "B", "I", "I", "O"]
    (span,) = recognize(model, doc, [(0, len(doc.text))])
    assert (span.char_start, span.char_end, span.raw_text) == (4, 20, "22 Cdo 2045/2012")
    assert span.margin > 0


def test_recognize_all_o_and_range_containment():
    doc = make_document("d", "SC", "1 Cdo 1/2000", "2000-01-01", "viz 22 Cdo 2045/2012 a")
    zero = ChainModel(BIO_LABELS, {}, np.zeros((0, 3)), np.zeros((3, 3)))
    assert recognize(zero, doc, [(0, len(doc.text))]) == []
    # the identifier lies outside the only range given
    assert recognize(hand_model(), doc, [(0, 3)]) == []
    assert recognize(hand_model(), doc, []) == []


def test_recognize_rejects_wrong_labels():
    doc = make_document("d", "SC", "1 Cdo 1/2000", "2000-01-01", "x")
    model = ChainModel(["out", "in"], {}, np.zeros((0, 2)), np.zeros((2, 2)))
    with pytest.raises(DataError, match="labels"):
        recognize(model, doc, [(0, 1)])


def test_token_labels_from_char_spans():
    tokens = tokenize("viz 22 Cdo 2045/2012, a 1 As 2/2005.")
    labels = token_labels(tokens, [(4, 20), (24, 35)])
    assert labels == ["O", "B", "I", "I", "O", "O", "B", "I", "I", "O"]


def test_minicorpus_spans_equal_gold():
    corpus = load_corpus(MINI / "manifest.jsonl")
    model = chaincrf.load_model(MINI / "models" / "recognizer.model")
    gold = read_gold(MINI / "gold.jsonl")
    segments = read_segments(MINI / "gold_segments.jsonl")
    for doc in corpus:
        ranges = [s.char_span for s in segments[doc.doc_id] if s.segment_type is SegmentType.ARGUMENTATION]
        found = recognize(model, doc, ranges)
        assert [(s.char_start, s.char_end, "court_identifier") for s in found] == gold.get(doc.doc_id, [])
        assert all(doc.text[s.char_start:s.char_end] == s.raw_text for s in found)


def test_training_is_deterministic():
    corpus = load_corpus(MINI / "manifest.jsonl")
    gold = read_gold(MINI / "gold.jsonl")
    docs = [corpus[f"M{i:02d}"] for i in range(1, 6)]
    assert train_recognizer(docs, gold, epochs=2, seed=3) == train_recognizer(docs, gold, epochs=2, seed=3)


def test_gold_and_extraction_files_round_trip(tmp_path):
    gold = {"b": [(5, 9, "court_identifier")], "a": [(0, 3, "court_identifier"), (7, 8, "court_identifier")]}
    write_gold(gold, tmp_path / "gold.jsonl")
    assert read_gold(tmp_path / "gold.jsonl") == gold
    spans = [IdentifierSpan("b", 4, 6, "xy", 1.5), IdentifierSpan("a", 0, 2, "ÚS", -0.25)]
    write_extractions(spans, tmp_path / "ext.jsonl")
    assert read_extractions(tmp_path / "ext.jsonl") == sorted(spans, key=lambda s: (s.doc_id, s.char_start))
    (tmp_path / "bad.jsonl").write_text('{"doc_id": "a"}\n', encoding="utf-8")
    with pytest.raises(DataError, match=":1:"):
        read_gold(tmp_path / "bad.jsonl")
