"""First-order linear-chain sequence labeler.

Observations are sequences of feature bundles (lists of feature strings), one
bundle per position. A labeling's score is the sum of the emission weights of
each position's active features under its label plus the transition weights
between consecutive labels. Decoding is exact Viterbi; training is the
averaged structured perceptron.

All three of :func:`score`, :func:`viterbi` and the exhaustive test oracle
accumulate a path score in the same order::

    s = E[0, y0]; s = (s + T[y0, y1]) + E[1, y1]; ...

so optimality can be asserted with exact float equality.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ModelFormatError

FORMAT_NAME = "chaincrf"
FORMAT_VERSION = "1"


@dataclass(frozen=True)
class TaggingExample:
    observations: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.observations) != len(self.labels):
            raise ValueError(
                f"observation/label length mismatch: {len(self.observations)} != {len(self.labels)}"
            )
        if not self.observations:
            raise ValueError("tagging example must have length >= 1")


class ChainModel:
    """Immutable weight tables plus the feature vocabulary and label set."""

    def __init__(self, labels: Sequence[str], vocabulary: dict, emission: np.ndarray,
                 transition: np.ndarray, version: str = FORMAT_VERSION):
        self.labels = tuple(labels)
        self.vocabulary = dict(vocabulary)
        n_labels = len(self.labels)
        emission = np.asarray(emission, dtype=np.float64)
        transition = np.asarray(transition, dtype=np.float64)
        if emission.shape != (len(self.vocabulary), n_labels):
            raise ValueError(f"emission table shape {emission.shape} does not match "
                             f"({len(self.vocabulary)}, {n_labels})")
        if transition.shape != (n_labels, n_labels):
            raise ValueError(f"transition table shape {transition.shape} does not match labels")
        emission.setflags(write=False)
        transition.setflags(write=False)
        self.emission = emission
        self.transition = transition
        self.version = version

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def label_id(self, name: str) -> int:
        return self.labels.index(name)

    def emissions(self, observations) -> np.ndarray:
        """Per-position emission scores, shape (len(observations), n_labels)."""
        out = np.zeros((len(observations), self.n_labels))
        vocab = self.vocabulary
        for t, bundle in enumerate(observations):
            row = out[t]
            for feature in bundle:
                fid = vocab.get(feature)
                if fid is not None:
                    row += self.emission[fid]
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainModel):
            return NotImplemented
        return (self.labels == other.labels and self.vocabulary == other.vocabulary
                and np.array_equal(self.emission, other.emission)
                and np.array_equal(self.transition, other.transition))

    def __repr__(self) -> str:
        return f"ChainModel(labels={self.labels!r}, features={len(self.vocabulary)})"


def score(model: ChainModel, observations, labels: Sequence[int]) -> float:
    if len(observations) != len(labels):
        raise ValueError(f"length mismatch: {len(observations)} observations, {len(labels)} labels")
    if not labels:
        raise ValueError("cannot score an empty sequence")
    return _path_score(model.emissions(observations), model.transition, labels)


def _path_score(emissions: np.ndarray, transition: np.ndarray, labels: Sequence[int]) -> float:
    s = emissions[0, labels[0]]
    for t in range(1, len(labels)):
        s = s + transition[labels[t - 1], labels[t]]
        s = s + emissions[t, labels[t]]
    return float(s)


def _viterbi(emissions: np.ndarray, transition: np.ndarray) -> list:
    length, n_labels = emissions.shape
    cols = np.arange(n_labels)
    back = np.zeros((length, n_labels), dtype=np.intp)
    delta = emissions[0].copy()
    for t in range(1, length):
        cand = delta[:, None] + transition
        # argmax returns the first maximum, i.e. the lowest previous label id
        best = np.argmax(cand, axis=0)
        back[t] = best
        delta = cand[best, cols] + emissions[t]
    path = [int(np.argmax(delta))]
    for t in range(length - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path


def viterbi(model: ChainModel, observations) -> list:
    """Highest-scoring label id sequence; ties go to the lower label id."""
    if len(observations) == 0:
        raise ValueError("cannot decode an empty sequence")
    return _viterbi(model.emissions(observations), model.transition)


def max_marginals(model: ChainModel, observations) -> np.ndarray:
    """M[t, j] = best score over all labelings with label j at position t."""
    if len(observations) == 0:
        raise ValueError("cannot decode an empty sequence")
    emissions = model.emissions(observations)
    transition = model.transition
    length, n_labels = emissions.shape
    alpha = np.empty((length, n_labels))
    beta = np.zeros((length, n_labels))
    alpha[0] = emissions[0]
    for t in range(1, length):
        alpha[t] = (alpha[t - 1][:, None] + transition).max(axis=0) + emissions[t]
    for t in range(length - 2, -1, -1):
        beta[t] = (transition + (emissions[t + 1] + beta[t + 1])[None, :]).max(axis=1)
    return alpha + beta


def _check_feature(feature: str) -> None:
    if not isinstance(feature, str) or not feature or any(c in feature for c in "\t\n\r"):
        raise ValueError(f"invalid feature string {feature!r}")


def build_vocabulary(examples: Sequence[TaggingExample]) -> dict:
    vocab = {}
    for ex in examples:
        for bundle in ex.observations:
            for feature in bundle:
                if feature not in vocab:
                    _check_feature(feature)
                    vocab[feature] = len(vocab)
    return vocab


def train(examples: Sequence[TaggingExample], labels: Sequence[str], epochs: int = 10,
          seed: int = 0) -> ChainModel:
    """Averaged structured perceptron.

    Each step decodes one example with the current weights and, on a wrong
    labeling, adds the gold feature counts and subtracts the predicted ones.
    The returned weights are the mean of the weight vector after every step.
    Updates are integers, so the lazy accumulator below is exact and equal
    to naive averaging bit for bit.
    """
    if not examples:
        raise ValueError("training set is empty")
    if epochs < 1:
        raise ValueError("epochs must be positive")
    labels = tuple(labels)
    n_labels = len(labels)
    for ex in examples:
        for y in ex.labels:
            if not 0 <= y < n_labels:
                raise ValueError(f"label id {y} outside label set of size {n_labels}")

    vocab = build_vocabulary(examples)
    feature_ids = [[[vocab[f] for f in bundle] for bundle in ex.observations] for ex in examples]
    w_emit = np.zeros((len(vocab), n_labels))
    w_trans = np.zeros((n_labels, n_labels))
    u_emit = np.zeros_like(w_emit)
    u_trans = np.zeros_like(w_trans)

    rng = random.Random(seed)
    order = list(range(len(examples)))
    step = 1
    for _ in range(epochs):
        rng.shuffle(order)
        for i in order:
            ids = feature_ids[i]
            gold = list(examples[i].labels)
            emissions = np.zeros((len(ids), n_labels))
            for t, fids in enumerate(ids):
                for fid in fids:
                    emissions[t] += w_emit[fid]
            pred = _viterbi(emissions, w_trans)
            if pred != gold:
                for t, fids in enumerate(ids):
                    g, p = gold[t], pred[t]
                    if g != p:
                        for fid in fids:
                            w_emit[fid, g] += 1.0
                            w_emit[fid, p] -= 1.0
                            u_emit[fid, g] += step
                            u_emit[fid, p] -= step
                    if t > 0:
                        gp, pp = gold[t - 1], pred[t - 1]
                        if (gp, g) != (pp, p):
                            w_trans[gp, g] += 1.0
                            w_trans[pp, p] -= 1.0
                            u_trans[gp, g] += step
                            u_trans[pp, p] -= step
            step += 1

    n_steps = step - 1
    emit = ((n_steps + 1) * w_emit - u_emit) / n_steps
    trans = ((n_steps + 1) * w_trans - u_trans) / n_steps
    # features whose weights averaged to zero carry no information; dropping
    # them makes a trained model equal to its saved-and-loaded copy
    keep = [fid for fid in range(len(vocab)) if np.any(emit[fid] != 0.0)]
    names = sorted(vocab, key=vocab.get)
    pruned = {names[fid]: k for k, fid in enumerate(keep)}
    return ChainModel(labels, pruned, emit[keep].reshape(len(keep), n_labels), trans)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def dumps_model(model: ChainModel) -> str:
    lines = ["\t".join((FORMAT_NAME, model.version) + model.labels)]
    emission = model.emission
    for feature, fid in sorted(model.vocabulary.items(), key=lambda kv: kv[1]):
        for label in range(model.n_labels):
            value = emission[fid, label]
            if value != 0.0:
                lines.append(f"E\t{feature}\t{label}\t{_fmt(value)}")
    for i in range(model.n_labels):
        for j in range(model.n_labels):
            value = model.transition[i, j]
            if value != 0.0:
                lines.append(f"T\t{i}\t{j}\t{_fmt(value)}")
    lines.append(f"END\t{len(lines) - 1}")
    return "\n".join(lines) + "\n"


def save_model(model: ChainModel, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def loads_model(text: str) -> ChainModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = lines[0].split("\t") if lines else []
    if len(header) < 2 or header[0] != FORMAT_NAME:
        raise ModelFormatError("not a chaincrf model file (version found: none)")
    version = header[1]
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {version!r} (expected {FORMAT_VERSION!r})")
    labels = header[2:]
    if not labels:
        raise ModelFormatError(f"model file (version {version}) declares no labels")
    footer = lines[-1].split("\t")
    if footer[0] != "END" or len(footer) != 2 or footer[1] != str(len(lines) - 2):
        raise ModelFormatError(f"truncated model file (version {version})")

    n_labels = len(labels)
    vocab = {}
    emit_entries = []
    trans = np.zeros((n_labels, n_labels))
    for lineno, line in enumerate(lines[1:-1], 2):
        parts = line.split("\t")
        try:
            if parts[0] == "E" and len(parts) == 4:
                feature, label, value = parts[1], int(parts[2]), float(parts[3])
                fid = vocab.setdefault(feature, len(vocab))
                emit_entries.append((fid, label, value))
            elif parts[0] == "T" and len(parts) == 4:
                trans[int(parts[1]), int(parts[2])] = float(parts[3])
            else:
                raise ValueError(line)
        except (ValueError, IndexError):
            raise ModelFormatError(f"model file (version {version}) line {lineno} is malformed") from None
    emit = np.zeros((len(vocab), n_labels))
    for fid, label, value in emit_entries:
        if not 0 <= label < n_labels:
            raise ModelFormatError(f"model file (version {version}) references label id {label}")
        emit[fid, label] = value
    return ChainModel(labels, vocab, emit, trans, version)


def load_model(path: Union[str, Path]) -> ChainModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise ModelFormatError(f"{path}: not UTF-8 (version found: none)") from None
    try:
        return loads_model(text)
    except ModelFormatError as exc:
        raise ModelFormatError(f"{path}: {exc}") from None
