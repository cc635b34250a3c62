"""Command-line interface.

Subcommands:
  run         stream a JSONL article file through the pipeline, writing
              per-slide snapshots, a final snapshot, and final assignments
  eval        score a predicted labeling against gold labels (pairwise F1, NMI)
  export-dot  render a snapshot's story graph as DOT text

Exit codes: 0 success, 1 configuration/parse problems, 2 stream-order
violations. STORYSTREAM_LOG sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, Iterator, Optional

import numpy as np

from . import __version__
from .embedding import VectorSource, embed_fallback, load_vectors
from .errors import (
    DuplicateArticleError,
    IdSetMismatchError,
    OutOfOrderError,
    StoryStreamError,
)
from .graph import WeightTransform
from .louvain import LouvainConfig
from .metrics import load_labels, nmi, pairwise_f1
from .pipeline import StoryPipeline
from .snapshot import build_snapshot, export_dot, load_snapshot, write_json_atomic
from .window import Article, WindowConfig

logger = logging.getLogger(__name__)

CADENCES = ("per-slide", "final-only")


@dataclass
class RunConfig:
    window_span_days: float = 4.0
    inch_interval_days: float = 1.0
    lateness_days: float = 0.0
    transform: str = "clamp"
    epsilon: float = 0.0
    gamma: float = 1.0
    min_gain: float = 1e-7
    snapshot_cadence: str = "per-slide"
    vector_source: VectorSource = VectorSource()

    def echo(self) -> Dict:
        """Fully-resolved config, embedded in every snapshot."""
        source = {"kind": self.vector_source.kind, "dim": self.vector_source.dim}
        if self.vector_source.kind == "fallback":
            source["seed"] = self.vector_source.seed
        else:
            source["path"] = str(self.vector_source.path)
        return {
            "version": __version__,
            "window_span_days": self.window_span_days,
            "inch_interval_days": self.inch_interval_days,
            "lateness_days": self.lateness_days,
            "transform": self.transform,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "min_gain": self.min_gain,
            "snapshot_cadence": self.snapshot_cadence,
            "vector_source": source,
        }


def _load_run_config(path: Optional[str], args) -> RunConfig:
    raw: Dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
    source_raw = dict(raw.get("vector_source", {}))
    if args.vector_file is not None:
        source_raw = {"kind": "file", "path": args.vector_file, "dim": source_raw.get("dim", 64)}
    if args.dim is not None:
        source_raw["dim"] = args.dim
    if args.seed is not None:
        source_raw["seed"] = args.seed
    kind = source_raw.get("kind", "fallback")
    source = VectorSource(
        kind=kind,
        dim=int(source_raw.get("dim", 64)),
        seed=int(source_raw.get("seed", 7)),
        path=source_raw.get("path"),
    )

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return raw.get(key, default)

    config = RunConfig(
        window_span_days=float(pick(args.window_span_days, "window_span_days", 4.0)),
        inch_interval_days=float(pick(args.inch_interval_days, "inch_interval_days", 1.0)),
        lateness_days=float(pick(args.lateness_days, "lateness_days", 0.0)),
        transform=str(pick(args.transform, "transform", "clamp")),
        epsilon=float(pick(args.epsilon, "epsilon", 0.0)),
        gamma=float(pick(args.gamma, "gamma", 1.0)),
        min_gain=float(pick(args.min_gain, "min_gain", 1e-7)),
        snapshot_cadence=str(pick(args.snapshot_cadence, "snapshot_cadence", "per-slide")),
        vector_source=source,
    )
    if config.snapshot_cadence not in CADENCES:
        raise ValueError(f"snapshot_cadence must be one of {CADENCES}")
    return config


def parse_timestamp(value: str) -> int:
    """ISO-8601 UTC string -> integer milliseconds since the epoch."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return round(stamp.timestamp() * 1000.0)


def _iter_articles(path, config: RunConfig) -> Iterator[Article]:
    source = config.vector_source
    file_vectors: Dict[str, np.ndarray] = {}
    if source.kind == "file":
        file_vectors = load_vectors(source.path, source.dim)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"line {lineno}: expected a JSON object")
            try:
                article_id = record["id"]
                timestamp = parse_timestamp(record["timestamp"])
            except KeyError as exc:
                raise ValueError(f"line {lineno}: missing field {exc}") from exc
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad timestamp: {exc}") from exc
            if not isinstance(article_id, str):
                raise ValueError(f"line {lineno}: 'id' must be a string")
            if "vector" in record:
                vector = np.asarray(record["vector"], dtype=np.float64)
                if vector.ndim != 1 or vector.shape[0] != source.dim:
                    raise ValueError(
                        f"line {lineno}: vector for {article_id!r} must have dimension {source.dim}"
                    )
            elif article_id in file_vectors:
                vector = file_vectors[article_id]
            elif "text" in record and source.kind == "fallback":
                vector = embed_fallback(record["text"], source.dim, source.seed)
            else:
                raise ValueError(
                    f"line {lineno}: no vector available for {article_id!r} "
                    f"(need 'vector', a vector-file entry, or 'text' with the fallback source)"
                )
            yield Article(article_id=article_id, timestamp_ms=timestamp, vector=vector)


def cmd_run(args) -> int:
    try:
        config = _load_run_config(args.config, args)
        transform = WeightTransform(kind=config.transform, epsilon=config.epsilon)
        louvain_config = LouvainConfig(gamma=config.gamma, min_gain=config.min_gain)
        window_config = WindowConfig.from_days(
            config.window_span_days, config.inch_interval_days, config.lateness_days
        )
    except (OSError, ValueError, StoryStreamError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    echo = config.echo()

    snapshot_index = 0

    def on_slide(event) -> None:
        nonlocal snapshot_index
        if config.snapshot_cadence != "per-slide":
            return  # events keep accumulating for the final snapshot
        snapshot_index += 1
        payload = build_snapshot(pipeline, pipeline.window.end_ms, echo, transform)
        write_json_atomic(os.path.join(out_dir, f"snapshot_{snapshot_index:04d}.json"), payload)

    pipeline = StoryPipeline(window_config, transform, louvain_config, on_slide=on_slide)

    input_ids = []
    try:
        for article in _iter_articles(args.input, config):
            input_ids.append(article.article_id)
            pipeline.process(article)
    except (OSError, ValueError, StoryStreamError) as exc:
        if isinstance(exc, (OutOfOrderError, DuplicateArticleError)):
            print(f"error: stream order violation: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not input_ids:
        print("error: no articles in input", file=sys.stderr)
        return 1

    pipeline.finish()
    payload = build_snapshot(pipeline, pipeline.window.high_water_ms, echo, transform)
    write_json_atomic(os.path.join(out_dir, "snapshot_final.json"), payload)

    assignments = pipeline.network.assignments()
    lines = []
    for article_id in input_ids:
        lines.append(json.dumps({"id": article_id, "story": assignments[article_id]}))
    assignment_path = os.path.join(out_dir, "assignments.jsonl")
    tmp = assignment_path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, assignment_path)
    logger.info(
        "processed %d articles into %d stories (%d snapshots)",
        len(input_ids),
        len(pipeline.network.stories),
        snapshot_index + 1,
    )
    print(
        f"{len(input_ids)} articles -> {len(pipeline.network.stories)} stories; "
        f"outputs in {out_dir}"
    )
    return 0


def cmd_eval(args) -> int:
    try:
        pred = load_labels(args.pred)
        gold = load_labels(args.gold)
        report = {
            "f1": pairwise_f1(pred, gold),
            "nmi": nmi(pred, gold),
            "n_articles": len(gold),
            "n_pred_stories": len(set(pred.values())),
            "n_gold_stories": len(set(gold.values())),
        }
    except IdSetMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, StoryStreamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    return 0


def cmd_export_dot(args) -> int:
    try:
        snapshot = load_snapshot(args.snapshot)
        text = export_dot(snapshot)
    except (OSError, StoryStreamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storystream",
        description="Cluster a chronological news stream into persistent stories.",
    )
    parser.add_argument("--version", action="version", version=f"storystream {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="stream articles through the pipeline")
    run.add_argument("--config", help="JSON config file (flags override it)")
    run.add_argument("--input", required=True, help="JSON Lines article stream")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--window-span-days", type=float, dest="window_span_days")
    run.add_argument("--inch-interval-days", type=float, dest="inch_interval_days")
    run.add_argument("--lateness-days", type=float, dest="lateness_days")
    run.add_argument("--transform", choices=["clamp", "shift"])
    run.add_argument("--epsilon", type=float)
    run.add_argument("--gamma", type=float)
    run.add_argument("--min-gain", type=float, dest="min_gain")
    run.add_argument("--snapshot-cadence", choices=list(CADENCES), dest="snapshot_cadence")
    run.add_argument("--vector-file", dest="vector_file", help="precomputed vector JSONL")
    run.add_argument("--dim", type=int, help="vector dimension")
    run.add_argument("--seed", type=int, help="fallback embedder seed")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score predictions against gold labels")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--gold", required=True)
    ev.add_argument("--out", help="also write the report JSON here")
    ev.set_defaults(func=cmd_eval)

    dot = sub.add_parser("export-dot", help="render a snapshot as DOT")
    dot.add_argument("--snapshot", required=True)
    dot.add_argument("--out", help="write DOT here instead of stdout")
    dot.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("STORYSTREAM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
