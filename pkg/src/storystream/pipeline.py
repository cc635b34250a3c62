"""End-to-end driver: articles in, stories out.

Wires the inching window to the story network: every emitted topic batch is
integrated into the network, and vectors of evicted articles are released
so memory stays bounded by the window, not the stream.
"""

from __future__ import annotations

from typing import Callable, List, Optional

from .graph import WeightTransform
from .louvain import LouvainConfig
from .storynet import MergeEvent, StoryNetwork
from .window import (
    Article,
    InchingWindow,
    TopicsEmitted,
    WindowConfig,
    WindowEvent,
    WindowSlid,
)


class StoryPipeline:
    """Single-writer orchestration of one article stream."""

    def __init__(
        self,
        window_config: WindowConfig,
        transform: WeightTransform | None = None,
        louvain_config: LouvainConfig | None = None,
        on_slide: Optional[Callable[[WindowSlid], None]] = None,
    ):
        transform = transform or WeightTransform()
        louvain_config = louvain_config or LouvainConfig()
        self.window = InchingWindow(window_config, transform, louvain_config)
        self.network = StoryNetwork(transform, louvain_config)
        self.on_slide = on_slide
        self._latest_topics = ()
        self._window_events_pending: List[WindowEvent] = []
        self._merge_events_pending: List[MergeEvent] = []

    @property
    def latest_topics(self):
        return self._latest_topics

    def drain_pending(self):
        """Events accumulated since the last drain (for snapshot writers)."""
        window_events = self._window_events_pending
        merge_events = self._merge_events_pending
        self._window_events_pending = []
        self._merge_events_pending = []
        return window_events, merge_events

    def process(self, article: Article) -> List[WindowEvent]:
        events = self.window.ingest(article)
        # observe after ingest so a rejected duplicate cannot clobber the
        # retained vector of the live article with the same id
        self.network.observe_vectors({article.article_id: article.vector})
        self._handle(events)
        return events

    def finish(self) -> List[WindowEvent]:
        """Flush the window so trailing articles reach the story network."""
        events = self.window.flush()
        self._handle(events)
        return events

    def _handle(self, events: List[WindowEvent]) -> None:
        for event in events:
            self._window_events_pending.append(event)
            if isinstance(event, TopicsEmitted):
                self._latest_topics = event.topics
                merge_events = self.network.integrate(event.topics)
                self._merge_events_pending.extend(merge_events)
            elif isinstance(event, WindowSlid):
                self.network.release_vectors(event.evicted)
                if self.on_slide is not None:
                    self.on_slide(event)
