"""Canonical JSON snapshot family over a rolling window of labeled posts.

Seven files (meta, activity, sentiment, emotion, topics, hashtags, emojis)
plus a manifest of SHA-256 hashes. Serialization is canonical (sorted keys,
no insignificant whitespace, UTF-8, LF line endings), so identical store
content always produces byte-identical files and unchanged files are skipped
by hash comparison instead of rewritten.

Privacy contract: no post text, no DIDs, no post ids appear in any output;
user identifiers are only ever counted.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import date, timedelta
from itertools import combinations
from typing import Iterable, Sequence

from .labeling import EMOTION_LABELS, SENTIMENT_LABELS, LabeledPost
from .topics import TopicModel, top_keywords

SNAPSHOT_FILES = (
    "meta.json",
    "activity.json",
    "sentiment.json",
    "emotion.json",
    "topics.json",
    "hashtags.json",
    "emojis.json",
)
MANIFEST_FILE = "manifest.json"


def canonical_bytes(doc: object) -> bytes:
    """Canonical JSON encoding: sorted keys, compact, UTF-8, trailing LF."""
    return (
        json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
    ).encode("utf-8")


def content_hash(file_bytes: bytes) -> str:
    return hashlib.sha256(file_bytes).hexdigest()


@dataclass(frozen=True)
class SnapshotSet:
    files: dict[str, bytes]  # name -> canonical bytes
    manifest: dict[str, str]  # name -> sha256 hex

    @staticmethod
    def from_documents(docs: dict[str, object]) -> "SnapshotSet":
        files = {name: canonical_bytes(doc) for name, doc in docs.items()}
        return SnapshotSet(files=files, manifest={n: content_hash(b) for n, b in files.items()})


def _cooccurrence(items_per_post: Iterable[Sequence[str]]) -> dict:
    """Within-post pairing graph: node counts are total occurrences, edge
    weights count posts containing both items. Edges are canonical (a < b)."""
    nodes: dict[str, int] = {}
    edges: dict[tuple[str, str], int] = {}
    for items in items_per_post:
        for item in items:
            nodes[item] = nodes.get(item, 0) + 1
        for a, b in combinations(sorted(set(items)), 2):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    return {
        "nodes": nodes,
        "edges": [
            {"a": a, "b": b, "weight": w} for (a, b), w in sorted(edges.items())
        ],
    }


def _top_counts(counter: dict[str, int], n: int) -> list[dict]:
    ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return [{"item": k, "count": c} for k, c in ranked[:n]]


def summarize_window(
    posts: Sequence[LabeledPost],
    model: TopicModel | None,
    end_date: date,
    window_days: int = 7,
    sentiment_labels: Sequence[str] = SENTIMENT_LABELS,
    emotion_labels: Sequence[str] = EMOTION_LABELS,
    top_n: int = 20,
    keywords_per_topic: int = 10,
) -> SnapshotSet:
    """Build the seven snapshot documents for the window ending end_date.

    Daily rows cover every date in the window (zero-filled for silent days).
    generated_at is the window's data-cutoff instant, not the wall clock, so
    identical inputs serialize identically.
    """
    days = [end_date - timedelta(days=window_days - 1 - i) for i in range(window_days)]
    day_keys = [d.isoformat() for d in days]
    start = days[0]
    posts = [p for p in posts if start <= p.created_at.date() <= end_date]
    by_day: dict[str, list[LabeledPost]] = {k: [] for k in day_keys}
    for p in posts:
        by_day[p.created_at.date().isoformat()].append(p)

    activity_rows = []
    sentiment_rows = []
    emotion_rows = []
    for key in day_keys:
        day_posts = by_day[key]
        s_counts = {lab: 0 for lab in sentiment_labels}
        e_counts = {lab: 0 for lab in emotion_labels}
        dids = set()
        for p in day_posts:
            s_counts[p.sentiment] = s_counts.get(p.sentiment, 0) + 1
            e_counts[p.emotion] = e_counts.get(p.emotion, 0) + 1
            dids.add(p.did)
        activity_rows.append({"date": key, "posts": len(day_posts), "users": len(dids)})
        sentiment_rows.append({"date": key, "counts": s_counts})
        emotion_rows.append({"date": key, "counts": e_counts})

    topic_ids = [-1] + (list(range(model.k)) if model is not None else [])
    keyword_lists = top_keywords(model, keywords_per_topic) if model is not None else []
    topics_rows = []
    for tid in topic_ids:
        members = [p for p in posts if p.topic_id == tid]
        s_counts = {lab: 0 for lab in sentiment_labels}
        e_counts = {lab: 0 for lab in emotion_labels}
        for p in members:
            s_counts[p.sentiment] = s_counts.get(p.sentiment, 0) + 1
            e_counts[p.emotion] = e_counts.get(p.emotion, 0) + 1
        topics_rows.append(
            {
                "topic_id": tid,
                "count": len(members),
                "keywords": [] if tid == -1 else list(keyword_lists[tid]),
                "sentiment_counts": s_counts,
                "emotion_counts": e_counts,
            }
        )

    hashtag_counter: dict[str, int] = {}
    emoji_counter: dict[str, int] = {}
    lang_counter: dict[str, int] = {}
    for p in posts:
        for tag in p.hashtags:
            hashtag_counter[tag] = hashtag_counter.get(tag, 0) + 1
        for em in p.emojis:
            emoji_counter[em] = emoji_counter.get(em, 0) + 1
        for lang in p.langs:
            lang_counter[lang] = lang_counter.get(lang, 0) + 1

    cutoff = (end_date + timedelta(days=1)).isoformat() + "T00:00:00Z"
    meta = {
        "generated_at": cutoff,
        "window_days": window_days,
        "total_posts": len(posts),
        "unique_users": len({p.did for p in posts}),
        "top_hashtags": _top_counts(hashtag_counter, top_n),
        "top_emojis": _top_counts(emoji_counter, top_n),
        "languages": lang_counter,
    }
    docs = {
        "meta.json": meta,
        "activity.json": {"days": activity_rows},
        "sentiment.json": {"days": sentiment_rows},
        "emotion.json": {"days": emotion_rows},
        "topics.json": {"topics": topics_rows},
        "hashtags.json": _cooccurrence([p.hashtags for p in posts]),
        "emojis.json": _cooccurrence([p.emojis for p in posts]),
    }
    return SnapshotSet.from_documents(docs)


@dataclass
class WriteReport:
    written: list[str]
    skipped: list[str]

    def as_dict(self) -> dict:
        return {"written": self.written, "skipped": self.skipped}


def read_manifest(out_dir: str) -> dict[str, str]:
    path = os.path.join(out_dir, MANIFEST_FILE)
    if not os.path.exists(path):
        return {}
    try:
        with open(path, "rb") as fh:
            return dict(json.load(fh).get("files", {}))
    except (json.JSONDecodeError, OSError):
        return {}


def _atomic_write(path: str, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp-snapshot-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_snapshots(
    snapshot: SnapshotSet, out_dir: str, previous_manifest: dict[str, str] | None = None
) -> WriteReport:
    """Write changed files atomically, skip files whose hash is unchanged.

    A file is skipped only when the previous manifest lists its exact content
    hash and the file is still present on disk. The manifest is updated last
    so a crash mid-write never records hashes for bytes that were not
    written.
    """
    os.makedirs(out_dir, exist_ok=True)
    previous = previous_manifest if previous_manifest is not None else read_manifest(out_dir)
    written: list[str] = []
    skipped: list[str] = []
    for name, data in sorted(snapshot.files.items()):
        digest = snapshot.manifest[name]
        path = os.path.join(out_dir, name)
        if previous.get(name) == digest and os.path.exists(path):
            skipped.append(name)
            continue
        _atomic_write(path, data)
        written.append(name)
    _atomic_write(
        os.path.join(out_dir, MANIFEST_FILE), canonical_bytes({"files": snapshot.manifest})
    )
    return WriteReport(written=written, skipped=skipped)


def weekly_window_end(end_date: date) -> date:
    """Most recent completed UTC Sunday: the block ending on end_date itself
    does not count because that day is not over yet."""
    days_since_sunday = (end_date.weekday() + 1) % 7  # Monday=0 ... Sunday=6
    if days_since_sunday == 0:
        return end_date - timedelta(days=7)
    return end_date - timedelta(days=days_since_sunday)


def generate(
    store,
    model: TopicModel | None,
    end_date: date,
    cadence: str,
    out_dir: str,
    window_days: int = 7,
    top_n: int = 20,
) -> WriteReport:
    """Daily cadence: rolling window ending end_date into out_dir/daily/.
    Weekly cadence: last completed Monday-Sunday block into out_dir/weekly/.
    """
    if cadence == "daily":
        window_end = end_date
        target = os.path.join(out_dir, "daily")
    elif cadence == "weekly":
        window_end = weekly_window_end(end_date)
        target = os.path.join(out_dir, "weekly")
        window_days = 7
    else:
        raise ValueError(f"unknown cadence {cadence!r}")
    posts = store.query_window(window_end, window_days)
    snapshot = summarize_window(posts, model, window_end, window_days, top_n=top_n)
    return write_snapshots(snapshot, target)
