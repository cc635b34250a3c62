"""Persistent story network.

A story keeps only its member article ids and the running sum of their
vectors; individual document vectors are retained only while the window can
still re-emit those articles, then released. Each incoming topic batch is
linked to existing stories by community detection over the story/topic
similarity graph and folded in through a fixed four-case merge protocol:
topic-into-story, topic-with-topic, topic-cast-to-new-story, and
story-with-story, with document migration keeping memberships disjoint.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    EmptyTopicError,
    MissingVectorError,
    NotAMemberError,
    UnknownStoryError,
)
from .graph import WeightTransform, build_graph
from .louvain import LouvainConfig, louvain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Topic:
    """A community of articles found in one window."""

    members: frozenset
    vector: np.ndarray = field(compare=False)
    emitted_at_ms: int = 0


@dataclass
class Story:
    """A persistent cluster: ids plus a vector sum, nothing else."""

    story_id: int
    created_at_ms: int
    members: set
    vector: np.ndarray
    last_active_ms: int


# --- merge events -----------------------------------------------------------

@dataclass(frozen=True)
class TopicMerged:
    topic_index: Optional[int]
    story_id: int


@dataclass(frozen=True)
class TopicTopicMerged:
    into_index: Optional[int]
    merged_index: Optional[int]


@dataclass(frozen=True)
class TopicCast:
    topic_index: Optional[int]
    story_id: int


@dataclass(frozen=True)
class StoryMerged:
    survivor_id: int
    absorbed_id: int


@dataclass(frozen=True)
class DocumentMigrated:
    article_id: str
    from_story_id: int
    to_story_id: Optional[int]
    to_topic_index: Optional[int] = None


MergeEvent = Union[TopicMerged, TopicTopicMerged, TopicCast, StoryMerged, DocumentMigrated]


class StoryNetwork:
    """Single-writer store of stories with four-case topic integration."""

    def __init__(
        self,
        transform: WeightTransform | None = None,
        louvain_config: LouvainConfig | None = None,
    ):
        self._transform = transform or WeightTransform()
        self._louvain = louvain_config or LouvainConfig()
        self._stories: Dict[int, Story] = {}
        self._owner: Dict[str, int] = {}
        self._vectors: Dict[str, np.ndarray] = {}
        self._next_story_id = 1
        self._log: List[MergeEvent] = []

    # --- inspection ---

    @property
    def stories(self) -> Mapping[int, Story]:
        return MappingProxyType(self._stories)

    @property
    def merge_log(self) -> Tuple[MergeEvent, ...]:
        return tuple(self._log)

    def story(self, story_id: int) -> Story:
        try:
            return self._stories[story_id]
        except KeyError:
            raise UnknownStoryError(f"unknown story {story_id}") from None

    def owner_of(self, article_id: str) -> Optional[int]:
        return self._owner.get(article_id)

    def assignments(self) -> Dict[str, int]:
        """article id -> story id, across all stories."""
        return dict(self._owner)

    def has_vector(self, article_id: str) -> bool:
        return article_id in self._vectors

    # --- vector retention ---

    def observe_vectors(self, vectors: Mapping[str, np.ndarray]) -> None:
        """Retain document vectors for articles the window may still emit."""
        for article_id, vec in vectors.items():
            self._vectors[article_id] = np.asarray(vec, dtype=np.float64)

    def release_vectors(self, ids: Iterable[str]) -> None:
        """Drop vectors of articles evicted from the window."""
        for article_id in ids:
            self._vectors.pop(article_id, None)

    # --- integration ---

    def integrate(
        self,
        topics: Sequence[Topic],
        member_vectors: Mapping[str, np.ndarray] | None = None,
        transform: WeightTransform | None = None,
        louvain_config: LouvainConfig | None = None,
    ) -> List[MergeEvent]:
        """Fold one emitted topic batch into the story network.

        Builds the similarity graph over existing stories plus the incoming
        topics, detects communities, then applies the merge cases per
        community in a fixed order: topic-story merges, topic-topic merges,
        casts of leftover topics to new stories, story-story merges.
        Returns the ordered merge events for this batch.
        """
        topics = list(topics)
        transform = transform or self._transform
        cfg = louvain_config or self._louvain
        if member_vectors:
            self.observe_vectors(member_vectors)
        missing = sorted({a for t in topics for a in t.members if a not in self._vectors})
        if missing:
            raise MissingVectorError(
                "no retained vector for: " + ", ".join(repr(a) for a in missing)
            )
        if not topics:
            return []

        node_vectors = {("story", sid): self._stories[sid].vector for sid in sorted(self._stories)}
        for idx, topic in enumerate(topics):
            node_vectors[("topic", idx)] = topic.vector
        graph = build_graph(node_vectors, transform, skip_zero_norm=True)
        final = louvain(graph, cfg).final

        communities: Dict[int, List[tuple]] = {}
        for key in sorted(final):
            communities.setdefault(final[key], []).append(key)

        events: List[MergeEvent] = []
        for comm in sorted(communities):
            keys = communities[comm]
            # stories may have died through migrations in earlier communities
            story_ids = [k[1] for k in keys if k[0] == "story" and k[1] in self._stories]
            topic_idxs = [k[1] for k in keys if k[0] == "topic"]
            if story_ids and topic_idxs:
                target = min(story_ids, key=lambda s: (self._stories[s].created_at_ms, s))
                for idx in topic_idxs:
                    events.extend(self._merge_topic_into_story(topics[idx], target, idx))
                for sid in self._merge_order(story_ids, exclude=target):
                    if sid in self._stories and target in self._stories:
                        events.append(self._merge_story_pair(target, sid))
            elif topic_idxs:
                merged = topics[topic_idxs[0]]
                lead = topic_idxs[0]
                for idx in topic_idxs[1:]:
                    merged = self._merge_topics(merged, topics[idx])
                    events.append(TopicTopicMerged(into_index=lead, merged_index=idx))
                events.extend(self._cast_topic(merged, lead))
            elif len(story_ids) >= 2:
                target = min(story_ids, key=lambda s: (self._stories[s].created_at_ms, s))
                for sid in self._merge_order(story_ids, exclude=target):
                    if sid in self._stories and target in self._stories:
                        events.append(self._merge_story_pair(target, sid))
        self._log.extend(events)
        logger.debug(
            "integrated %d topics: %d events, %d stories live",
            len(topics),
            len(events),
            len(self._stories),
        )
        return events

    def _merge_order(self, story_ids: List[int], exclude: int) -> List[int]:
        rest = [s for s in story_ids if s != exclude and s in self._stories]
        return sorted(rest, key=lambda s: (self._stories[s].created_at_ms, s))

    # --- the four cases ---

    def merge_topic_into_story(self, topic: Topic, story_id: int) -> Story:
        """Case 1: fold a topic into an existing story.

        Members owned by a different story are migrated out of it first,
        then ids are unioned and vectors summed; last-active advances to the
        topic's emission time.
        """
        events = self._merge_topic_into_story(topic, story_id, None)
        self._log.extend(events)
        return self._stories[story_id]

    def cast_topic_to_story(self, topic: Topic) -> Story:
        """Case 2: a topic in its own community becomes a brand-new story."""
        events = self._cast_topic(topic, None)
        self._log.extend(events)
        return self._stories[events[-1].story_id]

    def merge_topic_with_topic(self, a: Topic, b: Topic) -> Topic:
        """Case 3: two same-batch topics collapse into one (pure, no state)."""
        return self._merge_topics(a, b)

    def merge_story_with_story(self, a_id: int, b_id: int) -> Story:
        """Case 4: merge two stories onto the older one (tie: lower id)."""
        if a_id == b_id:
            raise ValueError("cannot merge a story with itself")
        for sid in (a_id, b_id):
            if sid not in self._stories:
                raise UnknownStoryError(f"unknown story {sid}")
        survivor_id = min(
            (a_id, b_id), key=lambda s: (self._stories[s].created_at_ms, s)
        )
        absorbed_id = b_id if survivor_id == a_id else a_id
        event = self._merge_story_pair(survivor_id, absorbed_id)
        self._log.append(event)
        return self._stories[survivor_id]

    def migrate_document(self, article_id: str, from_story_id: int, to) -> None:
        """Move one article between stories (or out of a story into a topic).

        The losing story's vector is decremented by the article's retained
        vector; a story left empty is deleted. When `to` is a Story id the
        article joins it immediately; when `to` is a Topic the article is
        left for the topic's own merge or cast to claim.
        """
        event = self._migrate(article_id, from_story_id, to, None)
        self._log.append(event)

    # --- internals ---

    def _require_vector(self, article_id: str) -> np.ndarray:
        try:
            return self._vectors[article_id]
        except KeyError:
            raise MissingVectorError(
                f"vector for article {article_id!r} is no longer retained"
            ) from None

    def _detach(self, article_id: str, story_id: int) -> None:
        story = self._stories[story_id]
        vec = self._require_vector(article_id)
        story.members.remove(article_id)
        story.vector = story.vector - vec
        del self._owner[article_id]
        if not story.members:
            del self._stories[story_id]

    def _migrate(self, article_id: str, from_story_id: int, to, topic_index) -> DocumentMigrated:
        if from_story_id not in self._stories:
            raise UnknownStoryError(f"unknown story {from_story_id}")
        if article_id not in self._stories[from_story_id].members:
            raise NotAMemberError(
                f"article {article_id!r} is not a member of story {from_story_id}"
            )
        if isinstance(to, Topic):
            self._detach(article_id, from_story_id)
            return DocumentMigrated(article_id, from_story_id, None, topic_index)
        to_id = to.story_id if isinstance(to, Story) else int(to)
        if to_id not in self._stories:
            raise UnknownStoryError(f"unknown story {to_id}")
        vec = self._require_vector(article_id)
        self._detach(article_id, from_story_id)
        target = self._stories[to_id]
        target.members.add(article_id)
        target.vector = target.vector + vec
        self._owner[article_id] = to_id
        return DocumentMigrated(article_id, from_story_id, to_id, None)

    def _merge_topic_into_story(
        self, topic: Topic, story_id: int, topic_index
    ) -> List[MergeEvent]:
        if story_id not in self._stories:
            raise UnknownStoryError(f"unknown story {story_id}")
        events: List[MergeEvent] = []
        for article_id in sorted(topic.members):
            owner = self._owner.get(article_id)
            if owner is not None and owner != story_id:
                events.append(self._migrate(article_id, owner, topic, topic_index))
        story = self._stories[story_id]
        fresh = [a for a in sorted(topic.members) if a not in story.members]
        if len(fresh) == len(topic.members):
            story.vector = story.vector + topic.vector
        else:
            for article_id in fresh:
                story.vector = story.vector + self._require_vector(article_id)
        for article_id in fresh:
            story.members.add(article_id)
            self._owner[article_id] = story_id
        story.last_active_ms = max(story.last_active_ms, topic.emitted_at_ms)
        events.append(TopicMerged(topic_index, story_id))
        return events

    def _cast_topic(self, topic: Topic, topic_index) -> List[MergeEvent]:
        events: List[MergeEvent] = []
        for article_id in sorted(topic.members):
            owner = self._owner.get(article_id)
            if owner is not None:
                events.append(self._migrate(article_id, owner, topic, topic_index))
        if not topic.members:
            raise EmptyTopicError("topic has no members left to cast")
        story_id = self._next_story_id
        self._next_story_id += 1
        story = Story(
            story_id=story_id,
            created_at_ms=topic.emitted_at_ms,
            members=set(topic.members),
            vector=np.array(topic.vector, dtype=np.float64, copy=True),
            last_active_ms=topic.emitted_at_ms,
        )
        self._stories[story_id] = story
        for article_id in story.members:
            self._owner[article_id] = story_id
        events.append(TopicCast(topic_index, story_id))
        return events

    def _merge_topics(self, a: Topic, b: Topic) -> Topic:
        return Topic(
            members=a.members | b.members,
            vector=a.vector + b.vector,
            emitted_at_ms=max(a.emitted_at_ms, b.emitted_at_ms),
        )

    def _merge_story_pair(self, survivor_id: int, absorbed_id: int) -> StoryMerged:
        survivor = self._stories[survivor_id]
        absorbed = self._stories[absorbed_id]
        for article_id in absorbed.members:
            self._owner[article_id] = survivor_id
        survivor.members |= absorbed.members
        survivor.vector = survivor.vector + absorbed.vector
        survivor.last_active_ms = max(survivor.last_active_ms, absorbed.last_active_ms)
        del self._stories[absorbed_id]
        return StoryMerged(survivor_id, absorbed_id)
