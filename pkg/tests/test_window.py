import numpy as np
import pytest

from storystream.errors import (
    DuplicateArticleError,
    EmptyWindowError,
    NotInInchingPhaseError,
    OutOfOrderError,
)
from storystream.window import (
    MS_PER_DAY,
    Article,
    InchingWindow,
    TemporaryAssignment,
    TopicsEmitted,
    WindowConfig,
    WindowSlid,
)

from conftest import separated_centers

DAY = MS_PER_DAY


def day(n: float) -> int:
    return round(n * DAY)


CENTERS = separated_centers(3, dim=6)


def art(article_id, at_days, cluster=0, wiggle=0):
    rng = np.random.RandomState(hash((article_id, wiggle)) % (2**31))
    vec = CENTERS[cluster] + rng.normal(0.0, 0.04, size=6)
    return Article(article_id, day(at_days), vec / np.linalg.norm(vec))


def config(span=4, interval=1, lateness=0):
    return WindowConfig.from_days(span, interval, lateness)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            WindowConfig(span_ms=DAY, interval_ms=0)
        with pytest.raises(ValueError):
            WindowConfig(span_ms=DAY, interval_ms=2 * DAY)
        with pytest.raises(ValueError):
            WindowConfig(span_ms=DAY, interval_ms=DAY, lateness_ms=-1)

    def test_from_days(self):
        cfg = WindowConfig.from_days(4, 1)
        assert cfg.span_ms == 4 * DAY and cfg.interval_ms == DAY


class TestFillingPhase:
    def test_first_article_no_events(self):
        w = InchingWindow(config())
        assert w.ingest(art("a", 0.0)) == []
        assert w.phase == "filling"
        assert w.start_ms == 0 and w.end_ms == 4 * DAY

    def test_buffering_until_boundary(self):
        w = InchingWindow(config())
        for i, t in enumerate([0.0, 1.0, 2.0, 3.5]):
            assert w.ingest(art(f"a{i}", t)) == []
        assert w.phase == "filling"

    def test_boundary_article_triggers_batch(self):
        w = InchingWindow(config())
        for i, t in enumerate([0.0, 1.0, 2.0]):
            w.ingest(art(f"a{i}", t, cluster=i % 2))
        events = w.ingest(art("trigger", 4.0))
        assert isinstance(events[0], TopicsEmitted)
        assert events[0].at_ms == 4 * DAY
        emitted = {m for t in events[0].topics for m in t.members}
        assert emitted == {"a0", "a1", "a2"}  # trigger not in the batch
        assert isinstance(events[-1], TemporaryAssignment)
        assert events[-1].article_id == "trigger"
        assert w.phase == "inching"
        assert "trigger" in w.temporary_ids

    def test_out_of_order_rejected(self):
        w = InchingWindow(config())
        w.ingest(art("a", 2.0))
        with pytest.raises(OutOfOrderError):
            w.ingest(art("b", 1.9))

    def test_lateness_tolerance_allows_small_backsteps(self):
        w = InchingWindow(config(lateness=1))
        w.ingest(art("a", 2.0))
        w.ingest(art("b", 1.5))  # within one day of the high-water mark
        with pytest.raises(OutOfOrderError):
            w.ingest(art("c", 0.5))

    def test_duplicate_rejected(self):
        w = InchingWindow(config())
        w.ingest(art("a", 0.0))
        with pytest.raises(DuplicateArticleError):
            w.ingest(art("a", 0.5))

    def test_equal_timestamps_allowed(self):
        w = InchingWindow(config())
        w.ingest(art("a", 0.0))
        w.ingest(art("b", 0.0))
        assert set(w.live_ids) == {"a", "b"}

    def test_far_future_trigger_batches_then_cascades(self):
        w = InchingWindow(config(span=3, interval=1))
        w.ingest(art("a", 0.0))
        w.ingest(art("b", 1.0))
        events = w.ingest(art("far", 10.0))
        # batch of the first window comes first, then slides catch up
        assert isinstance(events[0], TopicsEmitted)
        assert events[0].at_ms == 3 * DAY
        slides = [e for e in events if isinstance(e, WindowSlid)]
        assert slides, "expected catch-up slides"
        assert isinstance(events[-1], TemporaryAssignment)
        assert set(w.live_ids) == {"far"}
        assert w.end_ms <= day(10.0) < w.end_ms + DAY


class TestInchingPhase:
    def build(self):
        w = InchingWindow(config())
        for i in range(4):
            w.ingest(art(f"f{i}", i * 0.5, cluster=i % 2))
        w.ingest(art("t0", 4.0, cluster=0))  # triggers batch, then on-the-fly
        return w

    def test_in_interval_articles_get_temporary_assignments(self):
        w = self.build()
        events = w.ingest(art("t1", 4.5, cluster=1))
        assert [type(e) for e in events] == [TemporaryAssignment]
        assert w.temporary_ids == {"t0", "t1"}

    def test_slide_requires_inching(self):
        w = InchingWindow(config())
        w.ingest(art("a", 0.0))
        with pytest.raises(NotInInchingPhaseError):
            w.slide()

    def test_boundary_crossing_slides_and_overrides(self):
        w = self.build()
        events = w.ingest(art("n", 5.0, cluster=0))
        assert isinstance(events[0], TopicsEmitted)   # re-cluster of the window
        assert events[0].at_ms == 5 * DAY
        assert isinstance(events[1], WindowSlid)
        assert events[1].new_start_ms == 1 * DAY
        assert events[1].evicted == ("f0", "f1")      # 0.0d and 0.5d < 1d
        assert isinstance(events[2], TemporaryAssignment)
        # override cleared the old temporary flags; only the newcomer remains
        assert w.temporary_ids == {"n"}
        assert w.start_ms == 1 * DAY and w.end_ms == 5 * DAY

    def test_no_live_article_older_than_start(self):
        w = self.build()
        w.ingest(art("n", 5.0))
        live_ts = [w._timestamps[a] for a in w.live_ids]
        assert min(live_ts) >= w.start_ms

    def test_slide_on_unchanged_node_set_repeats_topics(self):
        w = InchingWindow(config())
        w.ingest(art("a", 0.0, 0))
        w.ingest(art("b", 2.5, 1))
        w.ingest(art("c", 3.0, 0))
        w.ingest(art("t", 4.0, 1))  # batch + temporary assignment
        (_, slid1) = w.slide()      # evicts a
        assert slid1.evicted == ("a",)
        second = w.slide()          # evicts nothing: b@2.5 >= new start 2.0
        assert second[1].evicted == ()
        third = w.slide()           # re-clusters the identical node set
        topics_a = second[0].topics
        topics_b = third[0].topics
        assert [sorted(t.members) for t in topics_a] == [sorted(t.members) for t in topics_b]

    def test_gap_longer_than_span_slides_repeatedly(self):
        w = self.build()
        events = w.ingest(art("far", 40.0, cluster=2))
        slides = [e for e in events if isinstance(e, WindowSlid)]
        emitted = [e for e in events if isinstance(e, TopicsEmitted)]
        # consecutive slides advance start by exactly one interval each
        starts = [e.new_start_ms for e in slides]
        assert all(b - a == DAY for a, b in zip(starts, starts[1:]))
        # empty windows emit no topics, so emissions stop once everything evicts
        assert len(emitted) < len(slides)
        assert set(w.live_ids) == {"far"}
        # the newcomer now fits inside [end, end + interval)
        assert w.end_ms <= day(40.0) < w.end_ms + DAY


class TestFlush:
    def test_single_article_stream(self):
        w = InchingWindow(config())
        w.ingest(art("only", 0.0))
        events = w.flush()
        assert len(events) == 1 and isinstance(events[0], TopicsEmitted)
        assert [sorted(t.members) for t in events[0].topics] == [["only"]]

    def test_flush_is_idempotent(self):
        w = InchingWindow(config())
        for i in range(3):
            w.ingest(art(f"a{i}", 0.5 * i, cluster=i % 2))
        first = w.flush()
        second = w.flush()
        assert [sorted(t.members) for t in first[0].topics] == [
            sorted(t.members) for t in second[0].topics
        ]

    def test_flush_empty_window_rejected(self):
        w = InchingWindow(config())
        with pytest.raises(EmptyWindowError):
            w.flush()

    def test_flush_clears_temporary(self):
        w = InchingWindow(config())
        for i in range(3):
            w.ingest(art(f"a{i}", i * 1.0))
        w.ingest(art("trigger", 4.2))
        assert w.temporary_ids
        w.flush()
        assert w.temporary_ids == frozenset()


def event_fingerprint(events):
    parts = []
    for e in events:
        if isinstance(e, TopicsEmitted):
            parts.append(
                (
                    "topics",
                    e.at_ms,
                    tuple(
                        (tuple(sorted(t.members)), t.emitted_at_ms, t.vector.tobytes())
                        for t in e.topics
                    ),
                )
            )
        elif isinstance(e, TemporaryAssignment):
            parts.append(("temp", e.article_id, e.community_id))
        else:
            parts.append(("slid", e.new_start_ms, e.evicted))
    return tuple(parts)


def test_replay_is_bitwise_identical():
    stream = [
        art("a", 0.0, 0), art("b", 0.5, 1), art("c", 1.0, 0), art("d", 2.0, 1),
        art("e", 4.0, 0), art("f", 4.5, 2), art("g", 5.0, 1), art("h", 7.5, 2),
    ]
    logs = []
    for _ in range(2):
        w = InchingWindow(config())
        log = []
        for a in stream:
            log.extend(w.ingest(a))
        log.extend(w.flush())
        logs.append(event_fingerprint(log))
    assert logs[0] == logs[1]


def test_conservation_in_latest_emission():
    w = InchingWindow(config())
    stream = [
        art("a", 0.0, 0), art("b", 1.0, 1), art("c", 2.0, 0), art("d", 4.0, 1),
        art("e", 5.5, 2), art("f", 6.0, 0),
    ]
    latest = None
    for a in stream:
        for e in w.ingest(a):
            if isinstance(e, TopicsEmitted):
                latest = e
    for e in w.flush():
        latest = e
    covered = sorted(m for t in latest.topics for m in t.members)
    assert covered == sorted(w.live_ids)
    # each article in exactly one topic
    assert len(covered) == len(set(covered))


def test_topic_vectors_are_member_sums():
    w = InchingWindow(config())
    arts = [art(f"a{i}", 0.4 * i, cluster=i % 3) for i in range(6)]
    vecs = {a.article_id: np.asarray(a.vector, dtype=np.float64) for a in arts}
    for a in arts:
        w.ingest(a)
    (emitted,) = w.flush()
    for topic in emitted.topics:
        expected = np.zeros(6)
        for member in sorted(topic.members):
            expected = expected + vecs[member]
        assert np.allclose(topic.vector, expected, atol=1e-9)


def test_tumbling_window_when_span_equals_interval():
    w = InchingWindow(config(span=1, interval=1))
    w.ingest(art("a", 0.0, 0))
    w.ingest(art("b", 0.5, 0))
    events = w.ingest(art("c", 1.0, 1))   # batch of {a, b}, then on-the-fly
    assert isinstance(events[0], TopicsEmitted)
    assert isinstance(events[-1], TemporaryAssignment)
    events = w.ingest(art("d", 2.0, 1))   # crosses the boundary: slide, evict a, b
    slid = [e for e in events if isinstance(e, WindowSlid)]
    assert slid[0].evicted == ("a", "b")
    assert w.start_ms == 1 * DAY and w.end_ms == 2 * DAY


def test_window_geometry_invariants():
    w = InchingWindow(config(span=3, interval=1))
    starts = []
    for i, t in enumerate([0.0, 1.0, 2.0, 3.0, 4.0, 5.5, 6.0, 9.0]):
        for e in w.ingest(art(f"a{i}", t, cluster=i % 2)):
            if isinstance(e, WindowSlid):
                starts.append(e.new_start_ms)
        if w.start_ms is not None:
            assert w.end_ms - w.start_ms == 3 * DAY
    assert all(b - a == DAY for a, b in zip(starts, starts[1:]))
