"""Staging and labeled persistent stores.

Both stores are single sqlite files with unique-key semantics: the staging
store is a transient buffer keyed by post id, the labeled store a
deduplicated archive with insert-or-ignore writes. The ingestion session is
the only staging writer; the labeling job is the only labeled-store writer
and the only staging purger; readers may run concurrently.
"""

from __future__ import annotations

import json
import sqlite3
from datetime import date, datetime, timedelta
from typing import Iterable

from .clock import parse_timestamp, utc_timestamp
from .errors import StoreUnavailable
from .ingest import RawPost
from .labeling import LabeledPost

_STAGING_SCHEMA = """
CREATE TABLE IF NOT EXISTS staged (
    id TEXT PRIMARY KEY,
    cid TEXT NOT NULL,
    did TEXT NOT NULL,
    created_at TEXT NOT NULL,
    text TEXT NOT NULL,
    langs TEXT NOT NULL,
    ingested_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS staged_ingested ON staged (ingested_at, id);
"""

_LABELED_SCHEMA = """
CREATE TABLE IF NOT EXISTS labeled (
    id TEXT PRIMARY KEY,
    did TEXT NOT NULL,
    created_at TEXT NOT NULL,
    created_date TEXT NOT NULL,
    langs TEXT NOT NULL,
    cleaned_text TEXT NOT NULL,
    sentiment TEXT NOT NULL,
    sentiment_scores TEXT NOT NULL,
    emotion TEXT NOT NULL,
    emotion_scores TEXT NOT NULL,
    topic_id INTEGER NOT NULL,
    hashtags TEXT NOT NULL,
    emojis TEXT NOT NULL,
    labeled_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS labeled_date ON labeled (created_date);
CREATE INDEX IF NOT EXISTS labeled_topic ON labeled (topic_id);
"""


def _connect(path: str) -> sqlite3.Connection:
    try:
        conn = sqlite3.connect(path)
        conn.execute("PRAGMA journal_mode=WAL")
        return conn
    except sqlite3.Error as exc:
        raise StoreUnavailable(f"cannot open store at {path}: {exc}") from exc


class StagingStore:
    """Transient buffer of filtered raw posts, idempotent by id."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._conn = _connect(path)
        with self._conn:
            self._conn.executescript(_STAGING_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def staging_insert_batch(self, posts: Iterable[RawPost]) -> int:
        rows = [
            (
                p.id,
                p.cid,
                p.did,
                utc_timestamp(p.created_at),
                p.text,
                json.dumps(list(p.langs)),
                utc_timestamp(p.ingested_at),
            )
            for p in posts
        ]
        if not rows:
            return 0
        try:
            with self._conn:
                before = self._count()
                self._conn.executemany(
                    "INSERT OR IGNORE INTO staged (id, cid, did, created_at, text, langs, ingested_at)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?)",
                    rows,
                )
                return self._count() - before
        except sqlite3.Error as exc:
            raise StoreUnavailable(str(exc)) from exc

    def staging_read_batch(self, limit: int = 64) -> list[RawPost]:
        """Oldest `limit` records by ingested_at (ties by id), not removed."""
        if limit < 1:
            raise ValueError("limit must be >= 1")
        cur = self._conn.execute(
            "SELECT id, cid, did, created_at, text, langs, ingested_at FROM staged"
            " ORDER BY ingested_at, id LIMIT ?",
            (limit,),
        )
        return [
            RawPost(
                id=r[0],
                cid=r[1],
                did=r[2],
                created_at=parse_timestamp(r[3]),
                text=r[4],
                langs=tuple(json.loads(r[5])),
                ingested_at=parse_timestamp(r[6]),
            )
            for r in cur.fetchall()
        ]

    def staging_purge(self, ids: Iterable[str]) -> int:
        ids = list(ids)
        if not ids:
            return 0
        try:
            with self._conn:
                cur = self._conn.executemany(
                    "DELETE FROM staged WHERE id = ?", [(i,) for i in ids]
                )
                return cur.rowcount if cur.rowcount >= 0 else 0
        except sqlite3.Error as exc:
            raise StoreUnavailable(str(exc)) from exc

    def count(self) -> int:
        return self._count()

    def _count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM staged").fetchone()[0]

    def dump_rows(self) -> list[tuple]:
        """All rows in insertion-id order, for determinism checks."""
        cur = self._conn.execute(
            "SELECT id, cid, did, created_at, text, langs, ingested_at FROM staged ORDER BY id"
        )
        return cur.fetchall()


class LabeledStore:
    """Deduplicated archive of annotated posts."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._conn = _connect(path)
        with self._conn:
            self._conn.executescript(_LABELED_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def labeled_insert_or_ignore(self, posts: Iterable[LabeledPost]) -> int:
        """Insert posts, silently skipping existing ids; atomic per batch."""
        rows = [
            (
                p.id,
                p.did,
                utc_timestamp(p.created_at),
                utc_timestamp(p.created_at)[:10],
                json.dumps(list(p.langs)),
                p.cleaned_text,
                p.sentiment,
                json.dumps(p.sentiment_scores, sort_keys=True),
                p.emotion,
                json.dumps(p.emotion_scores, sort_keys=True),
                p.topic_id,
                json.dumps(list(p.hashtags)),
                json.dumps(list(p.emojis)),
                utc_timestamp(p.labeled_at),
            )
            for p in posts
        ]
        if not rows:
            return 0
        try:
            with self._conn:
                before = self.count()
                self._conn.executemany(
                    "INSERT OR IGNORE INTO labeled (id, did, created_at, created_date, langs,"
                    " cleaned_text, sentiment, sentiment_scores, emotion, emotion_scores,"
                    " topic_id, hashtags, emojis, labeled_at)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    rows,
                )
                return self.count() - before
        except sqlite3.Error as exc:
            raise StoreUnavailable(str(exc)) from exc

    def query_window(self, end_date: date, window_days: int = 7) -> list[LabeledPost]:
        """All posts whose UTC calendar day falls in the trailing window."""
        if window_days < 1:
            raise ValueError("window_days must be >= 1")
        start = end_date - timedelta(days=window_days - 1)
        cur = self._conn.execute(
            "SELECT id, did, created_at, langs, cleaned_text, sentiment, sentiment_scores,"
            " emotion, emotion_scores, topic_id, hashtags, emojis, labeled_at"
            " FROM labeled WHERE created_date >= ? AND created_date <= ?"
            " ORDER BY created_at, id",
            (start.isoformat(), end_date.isoformat()),
        )
        return [self._row_to_post(r) for r in cur.fetchall()]

    def update_topic_ids(self, assignments: dict[str, int]) -> int:
        """Overwrite topic ids for the given post ids; returns rows updated."""
        if not assignments:
            return 0
        try:
            with self._conn:
                cur = self._conn.executemany(
                    "UPDATE labeled SET topic_id = ? WHERE id = ?",
                    [(tid, pid) for pid, tid in sorted(assignments.items())],
                )
                return cur.rowcount if cur.rowcount >= 0 else 0
        except sqlite3.Error as exc:
            raise StoreUnavailable(str(exc)) from exc

    def count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM labeled").fetchone()[0]

    def all_ids(self) -> list[str]:
        return [r[0] for r in self._conn.execute("SELECT id FROM labeled ORDER BY id")]

    @staticmethod
    def _row_to_post(r: tuple) -> LabeledPost:
        return LabeledPost(
            id=r[0],
            did=r[1],
            created_at=parse_timestamp(r[2]),
            langs=tuple(json.loads(r[3])),
            cleaned_text=r[4],
            sentiment=r[5],
            sentiment_scores=json.loads(r[6]),
            emotion=r[7],
            emotion_scores=json.loads(r[8]),
            topic_id=r[9],
            hashtags=tuple(json.loads(r[10])),
            emojis=tuple(json.loads(r[11])),
            labeled_at=parse_timestamp(r[12]),
        )
