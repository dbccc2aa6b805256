from __future__ import annotations

import itertools
from datetime import datetime, timezone
from pathlib import Path

import pytest

from narrative.errors import StoreUnavailable
from narrative.ingest import RawPost
from narrative.labeling import LabeledPost

FIXTURES = Path(__file__).parent / "fixtures"
REPLAY_PATH = FIXTURES / "replay_500.ndjson"

KEYWORDS = ["depression", "therapy", "panic attack", "burnout", "healing"]

_seq = itertools.count()


def make_raw_post(
    text: str = "therapy is helping me so much today",
    post_id: str | None = None,
    did: str = "did:plc:abc123",
    created_at: datetime | None = None,
    langs: tuple[str, ...] = ("en",),
) -> RawPost:
    i = next(_seq)
    ts = created_at or datetime(2025, 6, 5, 12, 0, 0, tzinfo=timezone.utc)
    return RawPost(
        id=post_id or f"at://{did}/app.bsky.feed.post/3t{i:06d}",
        cid=f"bafy{i:012d}",
        did=did,
        created_at=ts,
        text=text,
        langs=langs,
        ingested_at=ts,
    )


def make_labeled_post(
    post_id: str | None = None,
    did: str = "did:plc:abc123",
    created_at: datetime | None = None,
    sentiment: str = "neutral",
    emotion: str = "neutral",
    topic_id: int = -1,
    hashtags: tuple[str, ...] = (),
    emojis: tuple[str, ...] = (),
    langs: tuple[str, ...] = ("en",),
    cleaned_text: str = "feeling okay about things today",
) -> LabeledPost:
    i = next(_seq)
    ts = created_at or datetime(2025, 6, 5, 12, 0, 0, tzinfo=timezone.utc)
    s_scores = {"positive": 0.0, "neutral": 0.0, "negative": 0.0}
    s_scores[sentiment] = 1.0
    e_scores = {k: 0.0 for k in ("anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise")}
    e_scores[emotion] = 1.0
    return LabeledPost(
        id=post_id or f"at://{did}/app.bsky.feed.post/3l{i:06d}",
        did=did,
        created_at=ts,
        langs=langs,
        cleaned_text=cleaned_text,
        sentiment=sentiment,
        sentiment_scores=s_scores,
        emotion=emotion,
        emotion_scores=e_scores,
        topic_id=topic_id,
        hashtags=hashtags,
        emojis=emojis,
        labeled_at=ts,
    )


class FailingSink:
    """Staging-store stand-in that fails the first `fail_times` inserts."""

    def __init__(self, fail_times: int = 0) -> None:
        self.fail_times = fail_times
        self.calls = 0
        self.inserted: list[RawPost] = []

    def staging_insert_batch(self, posts):
        self.calls += 1
        if self.calls <= self.fail_times:
            raise StoreUnavailable("simulated outage")
        self.inserted.extend(posts)
        return len(posts)


@pytest.fixture
def staging_store(tmp_path):
    from narrative.store import StagingStore

    store = StagingStore(str(tmp_path / "staging.db"))
    yield store
    store.close()


@pytest.fixture
def labeled_store(tmp_path):
    from narrative.store import LabeledStore

    store = LabeledStore(str(tmp_path / "labeled.db"))
    yield store
    store.close()
