"""Firehose ingestion: keyword filtering, buffering, and batch delivery.

Consumes post-creation events (live websocket or newline-delimited JSON
replay), keeps only non-reply posts in the post collection whose text matches
the configured keywords, and batch-inserts them into the staging store with
size/interval flush triggers and bounded retry.
"""

from __future__ import annotations

import enum
import json
import logging
import re
import threading
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator

from .clock import Clock, ManualClock, SystemClock, parse_timestamp
from .errors import EmptyKeywordList, InvalidPattern, MalformedEvent, SourceUnavailable

logger = logging.getLogger(__name__)

POST_COLLECTION = "app.bsky.feed.post"


@dataclass(frozen=True)
class FirehoseEvent:
    collection: str
    record_uri: str
    record_cid: str
    author_did: str
    created_at: datetime
    text: str
    langs: tuple[str, ...] = ()
    is_reply: bool = False
    embeds: dict | None = None


@dataclass(frozen=True)
class RawPost:
    id: str
    cid: str
    did: str
    created_at: datetime
    text: str
    langs: tuple[str, ...]
    ingested_at: datetime


@dataclass(frozen=True)
class KeywordFilter:
    patterns: tuple[re.Pattern, ...]
    source_keywords: tuple[str, ...]

    def matches(self, text: str) -> bool:
        return any(p.search(text) for p in self.patterns)


def compile_filter(keywords: list[str]) -> KeywordFilter:
    """Compile keywords into case-insensitive word-boundary patterns.

    Multi-word keywords match as a contiguous phrase with arbitrary internal
    whitespace. Matching on word boundaries avoids substring false positives
    ("healing" must not match "unhealingly").
    """
    if not keywords:
        raise EmptyKeywordList("keyword list is empty")
    patterns = []
    for kw in keywords:
        words = kw.strip().split()
        if not words:
            raise InvalidPattern(f"blank keyword: {kw!r}")
        body = r"\s+".join(re.escape(w) for w in words)
        try:
            patterns.append(re.compile(rf"\b{body}\b", re.IGNORECASE | re.UNICODE))
        except re.error as exc:
            raise InvalidPattern(f"cannot compile keyword {kw!r}: {exc}") from exc
    return KeywordFilter(patterns=tuple(patterns), source_keywords=tuple(k.strip() for k in keywords))


def matches(filt: KeywordFilter, text: str) -> bool:
    return filt.matches(text)


def load_keywords(path: str) -> list[str]:
    """One keyword or phrase per line; blank lines and # comments skipped."""
    keywords = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                keywords.append(line)
    return keywords


def event_from_json(frame: dict) -> FirehoseEvent:
    """Parse one flat replay-format event object."""
    uri = frame.get("record_uri")
    created = frame.get("created_at")
    if not uri or not created:
        raise MalformedEvent(f"missing record_uri or created_at: {frame!r:.200}")
    try:
        created_at = parse_timestamp(created)
    except ValueError as exc:
        raise MalformedEvent(f"bad created_at {created!r}") from exc
    return FirehoseEvent(
        collection=frame.get("collection", ""),
        record_uri=uri,
        record_cid=frame.get("record_cid", ""),
        author_did=frame.get("author_did", ""),
        created_at=created_at,
        text=frame.get("text", ""),
        langs=tuple(frame.get("langs") or ()),
        is_reply=bool(frame.get("is_reply", False)),
        embeds=frame.get("embeds"),
    )


def jetstream_to_event(frame: dict) -> FirehoseEvent | None:
    """Map a Jetstream-style commit frame to a FirehoseEvent.

    Returns None for frames that are not record creations (identity/account
    frames, deletes, updates). Field mapping is documented in the README.
    """
    if frame.get("kind") != "commit":
        return None
    commit = frame.get("commit") or {}
    if commit.get("operation") != "create":
        return None
    record = commit.get("record") or {}
    did = frame.get("did", "")
    collection = commit.get("collection", "")
    rkey = commit.get("rkey", "")
    uri = f"at://{did}/{collection}/{rkey}"
    created = record.get("createdAt")
    if not created:
        raise MalformedEvent(f"commit frame missing createdAt: {frame!r:.200}")
    try:
        created_at = parse_timestamp(created)
    except ValueError as exc:
        raise MalformedEvent(f"bad createdAt {created!r}") from exc
    return FirehoseEvent(
        collection=collection,
        record_uri=uri,
        record_cid=commit.get("cid", ""),
        author_did=did,
        created_at=created_at,
        text=record.get("text", ""),
        langs=tuple(record.get("langs") or ()),
        is_reply="reply" in record,
        embeds=record.get("embed"),
    )


def to_raw_post(event: FirehoseEvent, filt: KeywordFilter, now: datetime) -> RawPost | None:
    """Filter one event; replies and non-post collections never pass."""
    if not event.record_uri or event.created_at is None:
        raise MalformedEvent("event missing record_uri or created_at")
    if event.collection != POST_COLLECTION:
        return None
    if event.is_reply:
        return None
    if not filt.matches(event.text):
        return None
    return RawPost(
        id=event.record_uri,
        cid=event.record_cid,
        did=event.author_did,
        created_at=event.created_at,
        text=event.text,
        langs=event.langs,
        ingested_at=now,
    )


class FlushDecision(enum.Enum):
    NONE = "none"
    SIZE_TRIGGERED = "size_triggered"


@dataclass
class FlushReport:
    attempted: int = 0
    inserted: int = 0
    dropped: int = 0


class IngestBuffer:
    """In-memory post buffer with bounded-retry batch flush.

    A failed flush retries the same batch up to max_retries total attempts
    (fixed retry_wait between attempts, paced by the injected clock); after
    the final failure the batch is dropped and counted. Partial re-insertion
    cannot duplicate because the staging store is idempotent by id.
    """

    def __init__(
        self,
        max_size: int = 200,
        flush_interval: float = 5.0,
        max_retries: int = 3,
        retry_wait: float = 0.5,
    ) -> None:
        self.max_size = max_size
        self.flush_interval = flush_interval
        self.max_retries = max_retries
        self.retry_wait = retry_wait
        self.dropped_count = 0
        self.flushed_count = 0
        self._entries: list[RawPost] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def push(self, post: RawPost) -> FlushDecision:
        with self._lock:
            self._entries.append(post)
            if len(self._entries) >= self.max_size:
                return FlushDecision.SIZE_TRIGGERED
        return FlushDecision.NONE

    def take(self) -> list[RawPost]:
        with self._lock:
            batch, self._entries = self._entries, []
        return batch

    def flush(self, sink, clock: Clock | None = None) -> FlushReport:
        """Drain the buffer into the sink; failures become dropped counts."""
        clock = clock or SystemClock()
        batch = self.take()
        if not batch:
            return FlushReport()
        for attempt in range(1, self.max_retries + 1):
            try:
                sink.staging_insert_batch(batch)
            except Exception as exc:
                logger.warning("flush attempt %d/%d failed: %s", attempt, self.max_retries, exc)
                if attempt < self.max_retries:
                    clock.sleep(self.retry_wait)
                continue
            with self._lock:
                self.flushed_count += len(batch)
            return FlushReport(attempted=len(batch), inserted=len(batch), dropped=0)
        with self._lock:
            self.dropped_count += len(batch)
        logger.error("dropping batch of %d after %d failed attempts", len(batch), self.max_retries)
        return FlushReport(attempted=len(batch), inserted=0, dropped=len(batch))


@dataclass
class SessionReport:
    events: int = 0
    filtered_in: int = 0
    malformed: int = 0
    flushes: int = 0
    attempted: int = 0
    inserted: int = 0
    dropped: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class IngestSession:
    """One ingestion run: event handling, flush triggers, graceful shutdown.

    Push and flush are serialized on the buffer; the interval trigger
    (tick) may run concurrently with event receipt, and sink I/O happens
    outside the locks so receipt is never blocked longer than one swap.
    """

    def __init__(self, filt: KeywordFilter, buffer: IngestBuffer, sink, clock: Clock) -> None:
        self.filter = filt
        self.buffer = buffer
        self.sink = sink
        self.clock = clock
        self.report = SessionReport()
        self._lock = threading.Lock()
        self._last_flush = clock.now()
        self._stopped = False

    def handle_event(self, event: FirehoseEvent | dict) -> None:
        if self._stopped:
            return
        with self._lock:
            self.report.events += 1
        if isinstance(event, dict):
            try:
                event = event_from_json(event)
            except MalformedEvent:
                with self._lock:
                    self.report.malformed += 1
                return
        try:
            post = to_raw_post(event, self.filter, self.clock.now())
        except MalformedEvent:
            with self._lock:
                self.report.malformed += 1
            return
        if post is None:
            return
        with self._lock:
            self.report.filtered_in += 1
        if self.buffer.push(post) is FlushDecision.SIZE_TRIGGERED:
            self._flush()

    def tick(self) -> None:
        """Interval trigger: flush when flush_interval has elapsed."""
        due = (self.clock.now() - self._last_flush).total_seconds() >= self.buffer.flush_interval
        if due:
            self._flush()

    def _flush(self) -> FlushReport:
        self._last_flush = self.clock.now()
        r = self.buffer.flush(self.sink, self.clock)
        with self._lock:
            if r.attempted:
                self.report.flushes += 1
            self.report.attempted += r.attempted
            self.report.inserted += r.inserted
            self.report.dropped += r.dropped
        return r

    def shutdown(self) -> FlushReport:
        """Flush whatever is buffered and stop accepting events. Idempotent."""
        if self._stopped:
            return FlushReport()
        self._stopped = True
        return self._flush()

    def run(self, source: Iterable[FirehoseEvent | dict], replay_clock: ManualClock | None = None) -> SessionReport:
        """Drive the session over an event source until it is exhausted.

        In replay mode pass the session's ManualClock so session time follows
        event time, which makes interval flushes and ingested_at stamps
        deterministic for a given fixture.
        """
        synced = False
        for item in source:
            if replay_clock is not None:
                ev = item
                if isinstance(item, dict):
                    try:
                        ev = event_from_json(item)
                    except MalformedEvent:
                        self.handle_event(item)  # counted as malformed
                        continue
                replay_clock.set(ev.created_at)
                if not synced:
                    self._last_flush = self.clock.now()
                    synced = True
                self.handle_event(ev)
            else:
                self.handle_event(item)
            self.tick()
        self.shutdown()
        return self.report


def run_stream(
    source: Iterable[FirehoseEvent | dict],
    filt: KeywordFilter,
    buffer: IngestBuffer,
    sink,
    clock: Clock,
    replay_clock: ManualClock | None = None,
) -> SessionReport:
    session = IngestSession(filt, buffer, sink, clock)
    return session.run(source, replay_clock=replay_clock)


def replay_events(path: str) -> Iterator[dict]:
    """Yield one event object per non-blank line of a UTF-8 NDJSON file."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                # surfaced as a malformed event by the session
                yield {"_malformed": line[:100]}


def live_events(
    url: str,
    clock: Clock | None = None,
    stop: threading.Event | None = None,
    max_initial_attempts: int = 5,
    backoff_start: float = 1.0,
    backoff_cap: float = 60.0,
) -> Iterator[FirehoseEvent]:
    """Consume Jetstream-style frames from a websocket endpoint.

    Reconnects forever with exponential backoff (1 s doubling, capped at
    60 s) once a connection has succeeded; before the first successful
    connection, gives up after max_initial_attempts and raises
    SourceUnavailable.
    """
    from websockets.sync.client import connect

    clock = clock or SystemClock()
    ever_connected = False
    failures = 0
    backoff = backoff_start
    while stop is None or not stop.is_set():
        try:
            with connect(url) as ws:
                ever_connected = True
                failures = 0
                backoff = backoff_start
                logger.info("connected to %s", url)
                for message in ws:
                    if stop is not None and stop.is_set():
                        return
                    try:
                        frame = json.loads(message)
                    except json.JSONDecodeError:
                        continue
                    try:
                        event = jetstream_to_event(frame)
                    except MalformedEvent:
                        continue
                    if event is not None:
                        yield event
        except Exception as exc:
            failures += 1
            if not ever_connected and failures >= max_initial_attempts:
                raise SourceUnavailable(f"cannot reach {url} after {failures} attempts") from exc
            logger.warning("stream error (%s); reconnecting in %.1f s", exc, backoff)
            clock.sleep(backoff)
            backoff = min(backoff * 2, backoff_cap)
