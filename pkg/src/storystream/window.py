"""Inching-window stream driver.

The window buffers its first full span and batch-clusters it, then switches
to one-by-one processing: each arrival joins the graph and gets a temporary
community via on-the-fly modularity comparison. When an arrival lands past
the current inch interval, the whole window is re-clustered (overriding the
temporary assignments), corrected topics are emitted, and the window slides
forward by one interval, evicting articles older than the new start.

Boundaries are data-driven: slides happen when an article past the boundary
arrives, never from wall-clock time, so replays are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import (
    DuplicateArticleError,
    EmptyWindowError,
    NotInInchingPhaseError,
    OutOfOrderError,
)
from .graph import WeightedGraph, WeightTransform, add_node, remove_nodes
from .louvain import LouvainConfig, Partition, assign_on_the_fly, louvain
from .storynet import Topic

logger = logging.getLogger(__name__)

MS_PER_DAY = 86_400_000

FILLING = "filling"
INCHING = "inching"


@dataclass(frozen=True)
class WindowConfig:
    """Window span W, inch interval S, and lateness tolerance L (all ms)."""

    span_ms: int
    interval_ms: int
    lateness_ms: int = 0

    def __post_init__(self):
        if self.interval_ms <= 0:
            raise ValueError("inch interval must be positive")
        if self.span_ms < self.interval_ms:
            raise ValueError("window span must be at least the inch interval")
        if self.lateness_ms < 0:
            raise ValueError("lateness tolerance cannot be negative")

    @classmethod
    def from_days(cls, span: float, interval: float, lateness: float = 0.0) -> "WindowConfig":
        return cls(
            span_ms=round(span * MS_PER_DAY),
            interval_ms=round(interval * MS_PER_DAY),
            lateness_ms=round(lateness * MS_PER_DAY),
        )


@dataclass(frozen=True)
class Article:
    article_id: str
    timestamp_ms: int
    vector: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class TopicsEmitted:
    """A full clustering of the window: batch, slide override, or flush."""

    topics: Tuple[Topic, ...]
    at_ms: int


@dataclass(frozen=True)
class TemporaryAssignment:
    """On-the-fly community for one mid-window arrival."""

    article_id: str
    community_id: int


@dataclass(frozen=True)
class WindowSlid:
    new_start_ms: int
    evicted: Tuple[str, ...]


WindowEvent = Union[TopicsEmitted, TemporaryAssignment, WindowSlid]


class InchingWindow:
    """Single-writer state machine over a chronological article stream."""

    def __init__(
        self,
        config: WindowConfig,
        transform: WeightTransform | None = None,
        louvain_config: LouvainConfig | None = None,
    ):
        self._config = config
        self._transform = transform or WeightTransform()
        self._louvain = louvain_config or LouvainConfig()
        self._phase = FILLING
        self._start: Optional[int] = None
        self._high_water: Optional[int] = None
        self._graph = WeightedGraph()
        self._vectors: Dict[str, np.ndarray] = {}
        self._timestamps: Dict[str, int] = {}
        self._partition: Partition = {}
        self._temporary: set = set()

    # --- state inspection ---

    @property
    def config(self) -> WindowConfig:
        return self._config

    @property
    def phase(self) -> str:
        return self._phase

    @property
    def start_ms(self) -> Optional[int]:
        return self._start

    @property
    def end_ms(self) -> Optional[int]:
        if self._start is None:
            return None
        return self._start + self._config.span_ms

    @property
    def high_water_ms(self) -> Optional[int]:
        return self._high_water

    @property
    def live_ids(self):
        return self._vectors.keys()

    @property
    def temporary_ids(self) -> frozenset:
        return frozenset(self._temporary)

    @property
    def partition(self) -> Partition:
        return dict(self._partition)

    @property
    def graph(self) -> WeightedGraph:
        """The live similarity graph. Read-only: mutate via ingest/slide."""
        return self._graph

    def live_vectors(self) -> Dict[str, np.ndarray]:
        return dict(self._vectors)

    # --- stream operations ---

    def ingest(self, article: Article) -> List[WindowEvent]:
        """Process one arrival; returns the events it caused, in order."""
        article_id = article.article_id
        t = int(article.timestamp_ms)
        if self._high_water is not None and t < self._high_water - self._config.lateness_ms:
            raise OutOfOrderError(
                f"article {article_id!r} at {t} is behind the high-water mark "
                f"{self._high_water} minus lateness {self._config.lateness_ms}"
            )
        if article_id in self._vectors:
            raise DuplicateArticleError(f"article {article_id!r} is already live")
        self._high_water = t if self._high_water is None else max(self._high_water, t)

        events: List[WindowEvent] = []
        if self._phase == FILLING:
            if self._start is None:
                self._start = t
            if t < self.end_ms:
                self._add_article(article)
                return events
            logger.info(
                "first window complete at %d: clustering %d articles",
                self.end_ms,
                len(self._vectors),
            )
            events.append(self._recluster(at_ms=self.end_ms))
            self._phase = INCHING
        while t >= self.end_ms + self._config.interval_ms:
            events.extend(self.slide())
        self._add_article(article)
        community = assign_on_the_fly(
            self._graph, self._partition, article_id, gamma=self._louvain.gamma
        )
        self._partition[article_id] = community
        self._temporary.add(article_id)
        events.append(TemporaryAssignment(article_id, community))
        return events

    def slide(self) -> List[WindowEvent]:
        """Re-cluster the whole window, emit corrected topics, move forward.

        The re-cluster overrides every temporary assignment; eviction then
        drops articles older than the new window start. An empty window
        slides silently (no topics).
        """
        if self._phase != INCHING:
            raise NotInInchingPhaseError("slide() requires the inching phase")
        events: List[WindowEvent] = []
        boundary = self.end_ms + self._config.interval_ms
        if self._vectors:
            events.append(self._recluster(at_ms=boundary))
        new_start = self._start + self._config.interval_ms
        evicted = sorted(a for a, ts in self._timestamps.items() if ts < new_start)
        if evicted:
            remove_nodes(self._graph, evicted)
            for article_id in evicted:
                del self._vectors[article_id]
                del self._timestamps[article_id]
                self._partition.pop(article_id, None)
        self._start = new_start
        logger.debug(
            "window slid to [%d, %d): evicted %d, live %d",
            new_start,
            self.end_ms,
            len(evicted),
            len(self._vectors),
        )
        events.append(WindowSlid(new_start_ms=new_start, evicted=tuple(evicted)))
        return events

    def flush(self) -> List[WindowEvent]:
        """Final re-cluster and emission without sliding or evicting."""
        if not self._vectors:
            raise EmptyWindowError("flush() needs at least one live article")
        return [self._recluster(at_ms=self._high_water)]

    # --- internals ---

    def _add_article(self, article: Article) -> None:
        vec = np.asarray(article.vector, dtype=np.float64)
        add_node(self._graph, article.article_id, vec, self._vectors, self._transform)
        self._vectors[article.article_id] = vec
        self._timestamps[article.article_id] = int(article.timestamp_ms)

    def _recluster(self, at_ms: int) -> TopicsEmitted:
        hierarchy = louvain(self._graph, self._louvain)
        self._partition = dict(hierarchy.final)
        self._temporary.clear()
        return TopicsEmitted(topics=self._make_topics(at_ms), at_ms=at_ms)

    def _make_topics(self, at_ms: int) -> Tuple[Topic, ...]:
        groups: Dict[int, List[str]] = {}
        for article_id in sorted(self._partition):
            groups.setdefault(self._partition[article_id], []).append(article_id)
        topics = []
        for comm in sorted(groups):
            members = groups[comm]
            vector = np.zeros_like(self._vectors[members[0]])
            for article_id in members:
                vector = vector + self._vectors[article_id]
            topics.append(
                Topic(members=frozenset(members), vector=vector, emitted_at_ms=at_ms)
            )
        return tuple(topics)
