"""Live telemetry: per-topic ring buffers with sequenced fan-out.

Samples arrive as one-line JSON documents. Each topic keeps its own ring
buffer (oldest samples fall off) and its own strictly increasing sequence
counter, assigned under the topic lock so subscribers observe per-topic
order. Subscribers have bounded pending queues: when one falls behind, the
oldest pending samples are dropped and the next read returns a single
:class:`GapEvent` carrying the drop count.
"""

from __future__ import annotations

import json
import math
import threading
from collections import deque
from dataclasses import dataclass, field


class IngestError(ValueError):
    """An input line is not a well-formed telemetry sample."""


@dataclass(frozen=True)
class TelemetrySample:
    topic: str
    ts: float
    fields: dict[str, float] = field(default_factory=dict)
    seq: int = 0

    def to_json(self) -> str:
        doc = {
            "topic": self.topic,
            "ts": self.ts,
            "fields": self.fields,
            "seq": self.seq,
        }
        return json.dumps(doc, separators=(",", ":"))


@dataclass(frozen=True)
class GapEvent:
    """Marker that *count* samples were dropped for a slow subscriber."""

    count: int

    def to_json(self) -> str:
        return json.dumps({"gap": self.count}, separators=(",", ":"))


def parse_sample_line(line: str | bytes) -> TelemetrySample:
    """Parse one JSON sample line; raises :class:`IngestError` on bad input."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"not utf-8: {exc}") from exc
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise IngestError("sample must be a JSON object")
    topic = doc.get("topic")
    if not isinstance(topic, str) or not topic:
        raise IngestError("sample needs a non-empty string topic")
    ts = doc.get("ts")
    if isinstance(ts, bool) or not isinstance(ts, (int, float)):
        raise IngestError("sample needs a numeric ts")
    if not math.isfinite(ts):
        raise IngestError("sample ts must be finite")
    fields_raw = doc.get("fields")
    if not isinstance(fields_raw, dict):
        raise IngestError("sample needs a fields object")
    fields: dict[str, float] = {}
    for key, value in fields_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise IngestError(f"field {key!r} must be a number")
        fields[key] = float(value)
    return TelemetrySample(topic, float(ts), fields)


class Subscriber:
    """A bounded consumer queue fed by the hub.

    ``get`` blocks until a sample arrives (or the timeout passes). After an
    overflow it returns one :class:`GapEvent` summarizing everything dropped
    since the last read, then resumes with the retained samples.
    """

    def __init__(self, max_pending: int = 1024) -> None:
        if max_pending < 1:
            raise ValueError("max_pending must be at least 1")
        self.max_pending = max_pending
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self._pending: deque[TelemetrySample] = deque()
        self._gap_count = 0
        self._closed = False

    def put(self, sample: TelemetrySample) -> None:
        with self._ready:
            if self._closed:
                return
            if len(self._pending) >= self.max_pending:
                self._pending.popleft()
                self._gap_count += 1
            self._pending.append(sample)
            self._ready.notify()

    def get(self, timeout: float | None = None) -> TelemetrySample | GapEvent | None:
        """Next event, or ``None`` on timeout or after close."""
        with self._ready:
            if self._gap_count:
                count = self._gap_count
                self._gap_count = 0
                return GapEvent(count)
            while not self._pending and not self._closed:
                if not self._ready.wait(timeout):
                    return None
            if self._gap_count:
                count = self._gap_count
                self._gap_count = 0
                return GapEvent(count)
            if self._pending:
                return self._pending.popleft()
            return None

    def close(self) -> None:
        with self._ready:
            self._closed = True
            self._ready.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed


class _Topic:
    __slots__ = ("lock", "next_seq", "buffer", "dropped")

    def __init__(self, ring_capacity: int) -> None:
        self.lock = threading.Lock()
        self.next_seq = 1
        self.buffer: deque[TelemetrySample] = deque(maxlen=ring_capacity)
        self.dropped = 0


class TelemetryHub:
    """Topic-sharded sample store with subscriber fan-out."""

    def __init__(self, ring_capacity: int = 4096, max_pending: int = 1024) -> None:
        if ring_capacity < 1:
            raise ValueError("ring_capacity must be at least 1")
        self.ring_capacity = ring_capacity
        self.max_pending = max_pending
        self._topics: dict[str, _Topic] = {}
        self._topics_lock = threading.Lock()
        self._subscribers: list[Subscriber] = []
        self._subscribers_lock = threading.Lock()
        self._error_count = 0

    # -- ingest -----------------------------------------------------------

    def _topic(self, name: str) -> _Topic:
        with self._topics_lock:
            topic = self._topics.get(name)
            if topic is None:
                topic = _Topic(self.ring_capacity)
                self._topics[name] = topic
            return topic

    def publish(self, sample: TelemetrySample) -> TelemetrySample:
        """Assign the next per-topic seq, buffer, and fan out. Returns the stored sample."""
        topic = self._topic(sample.topic)
        with self._subscribers_lock:
            subscribers = list(self._subscribers)
        with topic.lock:
            stored = TelemetrySample(
                sample.topic, sample.ts, dict(sample.fields), topic.next_seq
            )
            topic.next_seq += 1
            if len(topic.buffer) == topic.buffer.maxlen:
                topic.dropped += 1
            topic.buffer.append(stored)
            # Fan out under the topic lock so per-topic delivery order always
            # matches seq order, even with concurrent publishers.
            for sub in subscribers:
                sub.put(stored)
        return stored

    def ingest_line(self, line: str | bytes) -> TelemetrySample | IngestError:
        """Parse and publish one line; returns the error instead of raising."""
        try:
            sample = parse_sample_line(line)
        except IngestError as exc:
            self._error_count += 1
            return exc
        return self.publish(sample)

    # -- reads --------------------------------------------------------------

    def topics(self) -> list[str]:
        with self._topics_lock:
            return sorted(self._topics)

    def samples_since(
        self, topic_name: str, since_seq: int = 0
    ) -> list[TelemetrySample] | None:
        """Buffered samples with seq > *since_seq*; None for an unknown topic."""
        with self._topics_lock:
            topic = self._topics.get(topic_name)
        if topic is None:
            return None
        with topic.lock:
            return [s for s in topic.buffer if s.seq > since_seq]

    def topic_stats(self, topic_name: str) -> dict | None:
        with self._topics_lock:
            topic = self._topics.get(topic_name)
        if topic is None:
            return None
        with topic.lock:
            return {
                "topic": topic_name,
                "buffered": len(topic.buffer),
                "nextSeq": topic.next_seq,
                "dropped": topic.dropped,
            }

    @property
    def error_count(self) -> int:
        return self._error_count

    # -- fan-out -------------------------------------------------------------

    def subscribe(self, max_pending: int | None = None) -> Subscriber:
        sub = Subscriber(max_pending or self.max_pending)
        with self._subscribers_lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: Subscriber) -> None:
        with self._subscribers_lock:
            try:
                self._subscribers.remove(sub)
            except ValueError:
                pass
        sub.close()
