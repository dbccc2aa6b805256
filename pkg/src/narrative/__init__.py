"""Keyword-filtered firehose ingestion, affect labeling, NMF topic
clustering, and canonical JSON snapshot export."""

__version__ = "0.1.0"

from .clock import ManualClock, SystemClock
from .config import PipelineConfig, load_config
from .ingest import (
    FirehoseEvent,
    IngestBuffer,
    IngestSession,
    KeywordFilter,
    RawPost,
    compile_filter,
)
from .labeling import LabeledPost, label_batch, softmax
from .snapshot import SnapshotSet, content_hash, summarize_window, write_snapshots
from .store import LabeledStore, StagingStore
from .topics import NmfConfig, TopicModel, build_vocabulary, nmf_fit, tfidf_vectorize

__all__ = [
    "__version__",
    "FirehoseEvent",
    "IngestBuffer",
    "IngestSession",
    "KeywordFilter",
    "LabeledPost",
    "LabeledStore",
    "ManualClock",
    "NmfConfig",
    "PipelineConfig",
    "RawPost",
    "SnapshotSet",
    "StagingStore",
    "SystemClock",
    "TopicModel",
    "build_vocabulary",
    "compile_filter",
    "content_hash",
    "label_batch",
    "load_config",
    "nmf_fit",
    "softmax",
    "summarize_window",
    "tfidf_vectorize",
    "write_snapshots",
]
