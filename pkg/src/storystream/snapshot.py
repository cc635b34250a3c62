"""JSON snapshots of pipeline state and DOT export of the story graph.

Snapshots are schema-versioned plain JSON so any plotting stack can consume
them; writes are atomic (temp file then rename) and byte-stable for a given
pipeline state.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Dict, List, Mapping

import numpy as np

from .errors import ParseError
from .graph import WeightTransform
from .pipeline import StoryPipeline
from .storynet import (
    DocumentMigrated,
    StoryMerged,
    TopicCast,
    TopicMerged,
    TopicTopicMerged,
)
from .window import TemporaryAssignment, TopicsEmitted, WindowSlid

SCHEMA_VERSION = 1


def _story_graph_edges(stories, transform: WeightTransform) -> List[dict]:
    ids = sorted(stories)
    vectors = {sid: np.asarray(stories[sid].vector, dtype=np.float64) for sid in ids}
    norms = {sid: float(np.linalg.norm(vectors[sid])) for sid in ids}
    edges = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if norms[a] == 0.0 or norms[b] == 0.0:
                continue
            cos = float(np.dot(vectors[a], vectors[b])) / (norms[a] * norms[b])
            w = transform.apply(min(1.0, max(-1.0, cos)))
            if w > transform.epsilon:
                edges.append({"source": a, "target": b, "weight": w})
    return edges


def _window_event_dict(event) -> dict:
    if isinstance(event, TopicsEmitted):
        return {"type": "topics_emitted", "at_ms": event.at_ms, "n_topics": len(event.topics)}
    if isinstance(event, TemporaryAssignment):
        return {
            "type": "temporary_assignment",
            "article": event.article_id,
            "community": event.community_id,
        }
    if isinstance(event, WindowSlid):
        return {
            "type": "window_slid",
            "new_start_ms": event.new_start_ms,
            "evicted": list(event.evicted),
        }
    raise TypeError(f"unknown window event {event!r}")


def _merge_event_dict(event) -> dict:
    if isinstance(event, TopicMerged):
        return {"type": "topic_merged", "topic": event.topic_index, "story": event.story_id}
    if isinstance(event, TopicTopicMerged):
        return {"type": "topic_topic_merged", "into": event.into_index, "merged": event.merged_index}
    if isinstance(event, TopicCast):
        return {"type": "topic_cast", "topic": event.topic_index, "story": event.story_id}
    if isinstance(event, StoryMerged):
        return {"type": "story_merged", "survivor": event.survivor_id, "absorbed": event.absorbed_id}
    if isinstance(event, DocumentMigrated):
        return {
            "type": "document_migrated",
            "article": event.article_id,
            "from_story": event.from_story_id,
            "to_story": event.to_story_id,
            "to_topic": event.to_topic_index,
        }
    raise TypeError(f"unknown merge event {event!r}")


def build_snapshot(
    pipeline: StoryPipeline,
    at_ms: int,
    config_echo: Mapping,
    transform: WeightTransform,
) -> Dict:
    """Serializable view of the pipeline right now.

    Drains the pipeline's pending window/merge events, so consecutive
    snapshots partition the run's event history.
    """
    window_events, merge_events = pipeline.drain_pending()
    stories = pipeline.network.stories
    window = pipeline.window
    return {
        "schema": SCHEMA_VERSION,
        "timestamp_ms": at_ms,
        "config": dict(config_echo),
        "window": {
            "phase": window.phase,
            "start_ms": window.start_ms,
            "end_ms": window.end_ms,
            "live_articles": len(window.live_vectors()),
            "temporary": sorted(window.temporary_ids),
        },
        "stories": [
            {
                "id": sid,
                "created_at_ms": stories[sid].created_at_ms,
                "last_active_ms": stories[sid].last_active_ms,
                "member_count": len(stories[sid].members),
                "members": sorted(stories[sid].members),
            }
            for sid in sorted(stories)
        ],
        "topics": [
            {"members": sorted(t.members), "emitted_at_ms": t.emitted_at_ms}
            for t in pipeline.latest_topics
        ],
        "story_graph": _story_graph_edges(stories, transform),
        "merge_events": [_merge_event_dict(e) for e in merge_events],
        "window_events": [_window_event_dict(e) for e in window_events],
    }


def write_json_atomic(path, payload: Mapping) -> None:
    """Write JSON with LF endings via a temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_snapshot(path) -> Dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid snapshot JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(payload, dict) or "stories" not in payload:
        raise ParseError("snapshot must be an object with a 'stories' list")
    return payload


def export_dot(snapshot: Mapping) -> str:
    """Render a snapshot's story graph as deterministic DOT text.

    Nodes are labeled "id (member count)"; edge labels round the weight to
    3 decimals. Everything is sorted by id so output is byte-stable.
    """
    stories = sorted(snapshot.get("stories", []), key=lambda s: s["id"])
    edges = sorted(
        snapshot.get("story_graph", []), key=lambda e: (e["source"], e["target"])
    )
    lines = ["graph stories {"]
    for story in stories:
        lines.append(f'  "{story["id"]}" [label="{story["id"]} ({story["member_count"]})"];')
    for edge in edges:
        lines.append(
            f'  "{edge["source"]}" -- "{edge["target"]}" [label="{edge["weight"]:.3f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
