"""Command-line entry point: ``courtcite <subcommand> [--config FILE] [--key value ...]``.

Every configuration key may come from the key-value config file or from a
flag of the same name; flags win. Relative paths in the config file are
resolved against the file's directory.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from . import chaincrf, linker, metrics, pipeline, recognizer, segmenter
from .errors import ConfigError, DataError
from .normalizer import RepairConfig, load_registry

logger = logging.getLogger("courtcite")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

INDEX = "index.jsonl"
INDEX_WARNINGS = "index_warnings.jsonl"
SEGMENTS = "segments.jsonl"
EXTRACTIONS = "extractions.jsonl"
EDGES_UNLINKED = "edges_unlinked.csv"
REVIEW_QUEUE = "review_queue.jsonl"
EDGES = "edges.csv"
GRAPH = "graph.csv"
MATRIX_TXT = "matrix.txt"
MATRIX_JSON = "matrix.json"
EVAL_TXT = "eval_report.txt"
EVAL_JSON = "eval_report.json"


@dataclass
class PipelineConfig:
    manifest: Optional[Path] = None
    segmenter_models: Optional[Path] = None
    recognizer_model: Optional[Path] = None
    registry: Optional[Path] = None
    lexicon: Optional[Path] = None
    gold: Optional[Path] = None
    gold_segments: Optional[Path] = None
    predictions: Optional[Path] = None
    output_dir: Path = Path("out")
    workers: int = 1
    seed: int = 0
    epochs: int = 10
    margin_threshold: float = RepairConfig.margin_threshold
    right_window: int = RepairConfig.right_window
    left_window: int = RepairConfig.left_window
    paragraph_fallback: bool = True

    @property
    def repair_config(self) -> RepairConfig:
        return RepairConfig(self.right_window, self.left_window, self.margin_threshold)


PATH_KEYS = {f.name for f in fields(PipelineConfig) if f.name not in
             ("workers", "seed", "epochs", "margin_threshold", "right_window", "left_window",
              "paragraph_fallback")}
INT_KEYS = {"workers", "seed", "epochs", "right_window", "left_window"}
CONFIG_KEYS = [f.name for f in fields(PipelineConfig)]


def _convert(key: str, value: str, base: Path):
    try:
        if key in PATH_KEYS:
            path = Path(value)
            return path if path.is_absolute() else base / path
        if key in INT_KEYS:
            return int(value)
        if key == "margin_threshold":
            return float(value)
        if key == "paragraph_fallback":
            lowered = value.strip().lower()
            if lowered not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(value)
            return lowered in ("true", "yes", "1")
    except ValueError:
        raise ConfigError(f"invalid value {value!r} for {key}") from None
    raise ConfigError(f"unknown configuration key {key!r}")


def read_config_file(path: Path) -> dict:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
        values[key] = _convert(key, value, path.parent)
    return values


def build_config(args: argparse.Namespace) -> PipelineConfig:
    values = {}
    if args.config is not None:
        values.update(read_config_file(Path(args.config)))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag, Path.cwd())
    config = PipelineConfig(**values)
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    return config


def _require(config: PipelineConfig, *keys: str) -> None:
    for key in keys:
        value = getattr(config, key)
        if value is None:
            raise ConfigError(f"missing configuration value: {key}")
        if key == "segmenter_models":
            for seg_type in segmenter.SEGMENT_TYPES:
                path = segmenter.model_path(value, seg_type)
                if not path.is_file():
                    raise ConfigError(f"segmenter model for {seg_type.value} not found: {path}")
        elif not Path(value).exists():
            raise ConfigError(f"{key} not found: {value}")


def _optional_existing(config: PipelineConfig, *keys: str) -> None:
    for key in keys:
        value = getattr(config, key)
        if value is not None and not Path(value).exists():
            raise ConfigError(f"{key} not found: {value}")


@contextlib.contextmanager
def staged_outputs(output_dir: Path):
    """Yield a scratch directory whose files replace those in ``output_dir`` on success only."""
    output_dir = Path(output_dir)
    output_dir.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".courtcite-", dir=output_dir.parent))
    try:
        yield scratch
        output_dir.mkdir(parents=True, exist_ok=True)
        for item in sorted(scratch.iterdir()):
            os.replace(item, output_dir / item.name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextlib.contextmanager
def stage(name: str):
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _input(config: PipelineConfig, override: Optional[Path], default_name: str) -> Path:
    path = override if override is not None else config.output_dir / default_name
    if not path.is_file():
        raise ConfigError(f"input file not found: {path}")
    return path


class Resources:
    """Lazily loaded shared inputs."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._corpus = None
        self._registry = None
        self._lexicon = None

    @property
    def corpus(self):
        if self._corpus is None:
            self._corpus = corpus_mod.load_corpus(self.config.manifest, self.config.paragraph_fallback)
        return self._corpus

    @property
    def registry(self):
        if self._registry is None:
            self._registry = load_registry(self.config.registry)
        return self._registry

    @property
    def lexicon(self):
        if self._lexicon is None:
            self._lexicon = segmenter.load_lexicon(self.config.lexicon)
        return self._lexicon


def do_ingest(res: Resources, out: Path) -> object:
    with stage("ingest"):
        index = corpus_mod.build_index(res.corpus, res.registry)
        pipeline.write_index(index, out / INDEX, out / INDEX_WARNINGS)
        logger.info("%d documents, %d index entries, %d warnings", len(res.corpus), len(index),
                    len(index.warnings))
    return index


def do_segment(res: Resources, out: Path) -> dict:
    with stage("segment"):
        models = segmenter.load_models(res.config.segmenter_models)
        segments = pipeline.segment_corpus(res.corpus, models, res.lexicon, res.config.workers)
        segmenter.write_segments(segments, out / SEGMENTS)
    return segments


def do_recognize(res: Resources, out: Path, segments: dict) -> list:
    with stage("recognize"):
        model = chaincrf.load_model(res.config.recognizer_model)
        spans = pipeline.recognize_corpus(res.corpus, segments, model, res.registry, res.config.workers)
        recognizer.write_extractions(spans, out / EXTRACTIONS)
    return spans


def do_normalize(res: Resources, out: Path, spans: list) -> list:
    with stage("normalize"):
        edges, review = pipeline.normalize_spans(res.corpus, spans, res.registry, res.config.repair_config)
        linker.export_edges(edges, out / EDGES_UNLINKED)
        pipeline.write_review_queue(review, out / REVIEW_QUEUE)
    return edges


def do_link(res: Resources, out: Path, edges: list, index) -> list:
    with stage("link"):
        linked = linker.link(edges, index)
        linker.export_edges(linked, out / EDGES)
        linker.export_graph(linked, out / GRAPH)
    return linked


def do_stats(res: Resources, out: Path, edges: list) -> None:
    with stage("stats"):
        matrix = linker.citation_matrix(edges)
        linker.write_matrix(matrix, out / MATRIX_TXT, out / MATRIX_JSON)


def _courts(res: Resources) -> dict:
    return {doc.doc_id: doc.court for doc in res.corpus}


def cmd_ingest(config: PipelineConfig, res: Resources) -> None:
    _require(config, "manifest")
    _optional_existing(config, "registry")
    with staged_outputs(config.output_dir) as out:
        do_ingest(res, out)


def cmd_segment(config, res) -> None:
    _require(config, "manifest", "segmenter_models")
    _optional_existing(config, "lexicon")
    with staged_outputs(config.output_dir) as out:
        do_segment(res, out)


def cmd_recognize(config, res) -> None:
    _require(config, "manifest", "recognizer_model")
    path = _input(config, None, SEGMENTS)
    with staged_outputs(config.output_dir) as out:
        with stage("recognize"):
            segments = segmenter.read_segments(path)
        do_recognize(res, out, segments)


def cmd_normalize(config, res) -> None:
    _require(config, "manifest")
    path = _input(config, config.predictions, EXTRACTIONS)
    with staged_outputs(config.output_dir) as out:
        with stage("normalize"):
            spans = recognizer.read_extractions(path)
        do_normalize(res, out, spans)


def cmd_link(config, res) -> None:
    _require(config, "manifest")
    edges_path = _input(config, None, EDGES_UNLINKED)
    index_path = _input(config, None, INDEX)
    with staged_outputs(config.output_dir) as out:
        with stage("link"):
            edges = linker.read_edges(edges_path, _courts(res), res.registry)
            index = pipeline.read_index(index_path)
        do_link(res, out, edges, index)


def cmd_stats(config, res) -> None:
    _require(config, "manifest")
    edges_path = _input(config, None, EDGES)
    with staged_outputs(config.output_dir) as out:
        with stage("stats"):
            edges = linker.read_edges(edges_path, _courts(res), res.registry)
        do_stats(res, out, edges)


def cmd_pipeline(config, res) -> None:
    _require(config, "manifest", "segmenter_models", "recognizer_model")
    _optional_existing(config, "registry", "lexicon")
    with staged_outputs(config.output_dir) as out:
        with stage("ingest"):
            res.corpus
        index = do_ingest(res, out)
        segments = do_segment(res, out)
        spans = do_recognize(res, out, segments)
        edges = do_normalize(res, out, spans)
        linked = do_link(res, out, edges, index)
        do_stats(res, out, linked)


def cmd_train_segmenter(config, res) -> None:
    _require(config, "manifest", "gold_segments")
    if config.segmenter_models is None:
        raise ConfigError("missing configuration value: segmenter_models")
    with stage("train-segmenter"):
        gold = segmenter.read_segments(config.gold_segments)
        models = segmenter.train_segmenter(res.corpus, gold, config.epochs, config.seed, res.lexicon)
        segmenter.save_models(models, config.segmenter_models)


def cmd_train_recognizer(config, res) -> None:
    _require(config, "manifest", "gold")
    if config.recognizer_model is None:
        raise ConfigError("missing configuration value: recognizer_model")
    with stage("train-recognizer"):
        gold = recognizer.read_gold(config.gold)
        model = recognizer.train_recognizer(res.corpus, gold, config.epochs, config.seed, res.registry)
        Path(config.recognizer_model).parent.mkdir(parents=True, exist_ok=True)
        chaincrf.save_model(model, config.recognizer_model)


def cmd_eval(config, res) -> None:
    _require(config, "manifest", "gold")
    if config.predictions is None:
        _require(config, "segmenter_models", "recognizer_model")
    with staged_outputs(config.output_dir) as out:
        with stage("eval"):
            gold = recognizer.read_gold(config.gold)
            if config.predictions is not None:
                predicted = metrics.predicted_spans(recognizer.read_extractions(config.predictions))
                pair = (metrics.evaluate(gold, predicted, metrics.STRICT),
                        metrics.evaluate(gold, predicted, metrics.OVERLAP))
            else:
                pair = metrics.evaluate_pipeline(gold, res.corpus, segmenter.load_models(config.segmenter_models),
                                                 chaincrf.load_model(config.recognizer_model),
                                                 res.lexicon, res.registry)
            rows = {"Pipeline": pair}
            (out / EVAL_TXT).write_text(metrics.format_report(rows), encoding="utf-8", newline="\n")
            (out / EVAL_JSON).write_text(metrics.report_json(rows), encoding="utf-8", newline="\n")
            print(metrics.format_report(rows), end="")


COMMANDS = {
    "ingest": (cmd_ingest, "validate the corpus and build the docket index"),
    "train-segmenter": (cmd_train_segmenter, "train the seven segment-type models"),
    "train-recognizer": (cmd_train_recognizer, "train the identifier recognizer"),
    "segment": (cmd_segment, "segment every document"),
    "recognize": (cmd_recognize, "recognize identifiers in argumentation segments"),
    "normalize": (cmd_normalize, "repair, classify and parse recognized identifiers"),
    "link": (cmd_link, "resolve identifiers against the corpus index"),
    "stats": (cmd_stats, "write the per-court citation matrices"),
    "eval": (cmd_eval, "strict and overlap span evaluation against gold annotations"),
    "pipeline": (cmd_pipeline, "run ingest through stats in one go"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="courtcite", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key-value configuration file")
        for key in CONFIG_KEYS:
            flags = [f"--{key}"] + ([f"--{key.replace('_', '-')}"] if "_" in key else [])
            p.add_argument(*flags, dest=key, default=None, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = build_config(args)
        COMMANDS[args.command][0](config, Resources(config))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        if isinstance(exc.cause, ConfigError):
            print(f"config error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(exc.cause, DataError):
            print(f"data error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
            return EXIT_DATA
        logger.exception("internal error in stage %s", exc.stage)
        print(f"internal error in stage {exc.stage}: {exc.cause!r}", file=sys.stderr)
        return EXIT_INTERNAL
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
