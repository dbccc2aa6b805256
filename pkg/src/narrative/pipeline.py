"""Label and snapshot jobs wired over the stores.

These are the one-shot bodies behind the CLI subcommands, importable so
tests can drive them without a subprocess.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from datetime import date

from . import labeling, snapshot, textproc, topics
from .clock import Clock, SystemClock
from .config import PipelineConfig, load_stopwords
from .errors import EmptyCorpus, EmptyMatrix, EmptyVocabulary, SnapshotLocked
from .store import LabeledStore, StagingStore

logger = logging.getLogger(__name__)


def build_classifiers(config: PipelineConfig):
    """Default lexicon backends, or remote adapters when a URL is configured."""
    if config.adapter_url:
        sentiment = labeling.RemoteClassifier(
            labeling.AdapterConfig(
                url=config.adapter_url, task="sentiment", labels=labeling.SENTIMENT_LABELS
            )
        )
        emotion = labeling.RemoteClassifier(
            labeling.AdapterConfig(
                url=config.adapter_url, task="emotion", labels=labeling.EMOTION_LABELS
            )
        )
        return sentiment, emotion
    sentiment = labeling.LexiconSentimentClassifier(labeling.load_lexicon(config.lexicon_path))
    emotion = labeling.LexiconEmotionClassifier(
        labeling.load_emotion_lexicon(config.emotion_lexicon_path)
    )
    return sentiment, emotion


@dataclass
class LabelReport:
    batches: int = 0
    labeled: int = 0
    rejected: int = 0
    inserted: int = 0
    purged: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def run_label_job(
    config: PipelineConfig,
    staging: StagingStore,
    labeled_store: LabeledStore,
    clock: Clock | None = None,
) -> LabelReport:
    """Drain staging in batches: label, archive, then purge.

    Purge strictly follows a successful labeled insert, so a crash in
    between leaves the post both staged and labeled; the rerun inserts 0,
    purges 1, and nothing is lost or duplicated. Minimum-content rejects are
    purged too, with an audit counter.
    """
    clock = clock or SystemClock()
    sentiment_clf, emotion_clf = build_classifiers(config)
    report = LabelReport()
    while True:
        batch = staging.staging_read_batch(config.batch_size)
        if not batch:
            break
        labeled, rejected = labeling.label_batch(
            batch, sentiment_clf, emotion_clf, config.min_tokens, now=clock.now()
        )
        inserted = labeled_store.labeled_insert_or_ignore(labeled)
        purged = staging.staging_purge([p.id for p in labeled] + rejected)
        report.batches += 1
        report.labeled += len(labeled)
        report.rejected += len(rejected)
        report.inserted += inserted
        report.purged += purged
    return report


def fit_window_topics(
    config: PipelineConfig, labeled_store: LabeledStore, window_end: date, window_days: int
) -> topics.TopicModel | None:
    """Refit the topic model on the window corpus and persist assignments.

    Returns None (all posts unassigned) when the window is empty or nothing
    survives the vocabulary thresholds.
    """
    posts = labeled_store.query_window(window_end, window_days)
    if not posts:
        return None
    stop_words = load_stopwords(config.stopwords_path)
    corpus = [textproc.tokenize(p.cleaned_text) for p in posts]
    try:
        model, W = topics.fit_topics(
            corpus,
            config.nmf,
            min_df=config.min_df,
            max_df_ratio=config.max_df_ratio,
            max_terms=config.max_terms,
            stop_words=stop_words,
        )
    except (EmptyCorpus, EmptyVocabulary, EmptyMatrix) as exc:
        logger.info("window corpus not clusterable (%s); all posts unassigned", exc)
        labeled_store.update_topic_ids({p.id: -1 for p in posts})
        return None
    assignments = {
        post.id: topics.assign_topic(model, W[i]) for i, post in enumerate(posts)
    }
    labeled_store.update_topic_ids(assignments)
    return model


class snapshot_lock:
    """Exclusive lock over a snapshot output directory (concurrent
    generators are an error, not a queue)."""

    def __init__(self, out_dir: str) -> None:
        os.makedirs(out_dir, exist_ok=True)
        self.path = os.path.join(out_dir, ".lock")
        self._fd: int | None = None

    def __enter__(self):
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise SnapshotLocked(f"another snapshot run holds {self.path}")
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc):
        if self._fd is not None:
            os.close(self._fd)
            os.unlink(self.path)
        return False


def run_snapshot_job(
    config: PipelineConfig,
    labeled_store: LabeledStore,
    end_date: date,
    cadence: str,
    out_dir: str | None = None,
) -> snapshot.WriteReport:
    """Refit topics on the snapshot window, then generate the file family."""
    out_dir = out_dir or config.snapshot_dir
    if cadence == "daily":
        window_end, window_days = end_date, config.window_days
    else:
        window_end, window_days = snapshot.weekly_window_end(end_date), 7
    with snapshot_lock(out_dir):
        model = fit_window_topics(config, labeled_store, window_end, window_days)
        return snapshot.generate(
            labeled_store,
            model,
            end_date,
            cadence,
            out_dir,
            window_days=config.window_days,
            top_n=config.top_n,
        )
