"""Sentiment and emotion labeling over staged posts.

Three classifier backends share one batch interface: a softmax head over
provided embeddings, a deterministic lexicon baseline (the default; runs
with zero model downloads), and a remote HTTP adapter for transformer
inference. Classifiers are read-only after construction and safe to share
across concurrent batch workers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Protocol, Sequence

import numpy as np

from . import textproc
from .errors import (
    AdapterProtocolError,
    AdapterTimeout,
    BatchTooLarge,
    DimensionMismatch,
    EmptyInput,
    NonFiniteInput,
)
from .ingest import RawPost

logger = logging.getLogger(__name__)

SENTIMENT_LABELS = ("positive", "neutral", "negative")
EMOTION_LABELS = ("anger", "disgust", "fear", "joy", "neutral", "sadness", "surprise")

MAX_BATCH = 64


@dataclass(frozen=True)
class LabeledPost:
    id: str
    did: str
    created_at: datetime
    langs: tuple[str, ...]
    cleaned_text: str
    sentiment: str
    sentiment_scores: dict[str, float]
    emotion: str
    emotion_scores: dict[str, float]
    topic_id: int
    hashtags: tuple[str, ...]
    emojis: tuple[str, ...]
    labeled_at: datetime


def softmax(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Numerically stable softmax via max subtraction."""
    x = np.asarray(logits, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("softmax of empty vector")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"non-finite logits: {x}")
    e = np.exp(x - np.max(x))
    return e / np.sum(e)


@dataclass(frozen=True)
class ClassifierHead:
    """Linear-plus-softmax head mapping an embedding to label probabilities."""

    weights: np.ndarray  # (num_labels, d)
    bias: np.ndarray  # (num_labels,)
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.weights.shape[0] != len(self.labels) or self.bias.shape != (len(self.labels),):
            raise DimensionMismatch(
                f"head shapes inconsistent: W {self.weights.shape}, b {self.bias.shape},"
                f" {len(self.labels)} labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")


def classify(head: ClassifierHead, embedding: Sequence[float] | np.ndarray) -> tuple[str, np.ndarray]:
    """Label an embedding; ties break to the lowest label index."""
    emb = np.asarray(embedding, dtype=np.float64)
    if emb.shape != (head.weights.shape[1],):
        raise DimensionMismatch(
            f"embedding dimension {emb.shape} does not match head ({head.weights.shape[1]},)"
        )
    probs = softmax(head.weights @ emb + head.bias)
    return head.labels[int(np.argmax(probs))], probs


def lexicon_classify(lexicon: dict[str, float], tokens: Sequence[str]) -> tuple[str, np.ndarray]:
    """Deterministic sentiment baseline: sum of per-token lexicon scores.

    s > 0 is positive, s < 0 negative, s = 0 neutral; the reported scores are
    softmax([s, 0, -s]) over (positive, neutral, negative).
    """
    s = float(sum(lexicon.get(t, 0.0) for t in tokens))
    scores = softmax([s, 0.0, -s])
    if s > 0:
        label = "positive"
    elif s < 0:
        label = "negative"
    else:
        label = "neutral"
    return label, scores


def load_lexicon(path: str) -> dict[str, float]:
    """Sentiment lexicon file: lines of token<TAB>score, # comments allowed."""
    lex: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            token, score = line.split("\t")
            lex[token] = float(score)
    return lex


def load_emotion_lexicon(path: str) -> dict[str, tuple[str, float]]:
    """Emotion lexicon file: lines of token<TAB>emotion[<TAB>weight]."""
    lex: dict[str, tuple[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            weight = float(parts[2]) if len(parts) > 2 else 1.0
            lex[parts[0]] = (parts[1], weight)
    return lex


class BatchClassifier(Protocol):
    labels: tuple[str, ...]

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[str, dict[str, float]]]: ...


def _scores_dict(labels: Sequence[str], probs: np.ndarray) -> dict[str, float]:
    return {lab: float(p) for lab, p in zip(labels, probs)}


class LexiconSentimentClassifier:
    """Wraps lexicon_classify behind the batch interface."""

    labels = SENTIMENT_LABELS

    def __init__(self, lexicon: dict[str, float]) -> None:
        self.lexicon = dict(lexicon)

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[str, dict[str, float]]]:
        out = []
        for text in texts:
            label, scores = lexicon_classify(self.lexicon, textproc.tokenize(text))
            out.append((label, _scores_dict(self.labels, scores)))
        return out


class LexiconEmotionClassifier:
    """Keyword-vote emotion baseline over the configured label set.

    Per-emotion logits are summed token weights; neutral carries a constant
    prior so that texts with no emotion hits come out neutral.
    """

    def __init__(
        self,
        lexicon: dict[str, tuple[str, float]],
        labels: tuple[str, ...] = EMOTION_LABELS,
        neutral_bias: float = 0.5,
    ) -> None:
        if "neutral" not in labels:
            raise ValueError("emotion label set must include 'neutral'")
        self.labels = tuple(labels)
        self.lexicon = dict(lexicon)
        self.neutral_bias = neutral_bias

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[str, dict[str, float]]]:
        out = []
        index = {lab: i for i, lab in enumerate(self.labels)}
        for text in texts:
            logits = np.zeros(len(self.labels))
            logits[index["neutral"]] = self.neutral_bias
            for tok in textproc.tokenize(text):
                hit = self.lexicon.get(tok)
                if hit is not None and hit[0] in index:
                    logits[index[hit[0]]] += hit[1]
            probs = softmax(logits)
            label = self.labels[int(np.argmax(probs))]
            out.append((label, _scores_dict(self.labels, probs)))
        return out


@dataclass(frozen=True)
class AdapterConfig:
    url: str
    task: str  # "sentiment" | "emotion"
    labels: tuple[str, ...]
    timeout: float = 10.0
    retries: int = 2
    retry_wait: float = 1.0


def remote_classify(
    config: AdapterConfig,
    texts: Sequence[str],
    sleep: Callable[[float], None] | None = None,
) -> list[tuple[str, dict[str, float]]]:
    """One POST per batch against the adapter wire protocol.

    Request: {"task": ..., "texts": [...]}. Response: {"results":
    [{"label": ..., "scores": {label: p, ...}}, ...]} in input order.
    Transport failures are retried (config.retries extra attempts), protocol
    violations are not.
    """
    import requests

    if len(texts) > MAX_BATCH:
        raise BatchTooLarge(f"{len(texts)} texts exceeds adapter batch limit {MAX_BATCH}")
    if not texts:
        return []
    if sleep is None:
        import time

        sleep = time.sleep
    payload = {"task": config.task, "texts": list(texts)}
    last_exc: Exception | None = None
    for attempt in range(config.retries + 1):
        try:
            resp = requests.post(config.url, json=payload, timeout=config.timeout)
        except requests.Timeout as exc:
            last_exc = exc
            if attempt < config.retries:
                sleep(config.retry_wait)
            continue
        except requests.RequestException as exc:
            last_exc = exc
            if attempt < config.retries:
                sleep(config.retry_wait)
            continue
        if resp.status_code != 200:
            raise AdapterProtocolError(f"adapter returned HTTP {resp.status_code}")
        return _validate_adapter_response(config, texts, resp)
    raise AdapterTimeout(f"adapter unreachable after {config.retries + 1} attempts: {last_exc}")


def _validate_adapter_response(
    config: AdapterConfig, texts: Sequence[str], resp
) -> list[tuple[str, dict[str, float]]]:
    try:
        body = resp.json()
    except (ValueError, json.JSONDecodeError) as exc:
        raise AdapterProtocolError(f"adapter returned non-JSON body: {exc}") from exc
    results = body.get("results") if isinstance(body, dict) else None
    if not isinstance(results, list) or len(results) != len(texts):
        raise AdapterProtocolError(
            f"expected {len(texts)} results, got {type(results).__name__}"
        )
    out = []
    for i, item in enumerate(results):
        if not isinstance(item, dict) or "label" not in item or "scores" not in item:
            raise AdapterProtocolError(f"result {i} malformed: {item!r:.100}")
        label, scores = item["label"], item["scores"]
        if label not in config.labels:
            raise AdapterProtocolError(f"result {i} label {label!r} not in expected set")
        if not isinstance(scores, dict) or set(scores) != set(config.labels):
            raise AdapterProtocolError(f"result {i} score keys do not match label set")
        total = sum(float(v) for v in scores.values())
        if abs(total - 1.0) > 1e-6:
            raise AdapterProtocolError(f"result {i} scores sum to {total}, not 1")
        out.append((label, {k: float(v) for k, v in scores.items()}))
    return out


class RemoteClassifier:
    """Batch classifier backed by a remote inference endpoint."""

    def __init__(self, config: AdapterConfig, sleep: Callable[[float], None] | None = None) -> None:
        self.config = config
        self.labels = config.labels
        self._sleep = sleep

    def classify_batch(self, texts: Sequence[str]) -> list[tuple[str, dict[str, float]]]:
        return remote_classify(self.config, texts, sleep=self._sleep)


def label_batch(
    posts: Sequence[RawPost],
    sentiment_clf: BatchClassifier,
    emotion_clf: BatchClassifier,
    min_tokens: int = 3,
    now: datetime | None = None,
) -> tuple[list[LabeledPost], list[str]]:
    """Label up to 64 staged posts; returns (labeled, rejected ids).

    Posts failing the minimum-content rule after normalization are rejected.
    Survivors get sentiment and emotion labels plus hashtag/emoji extraction;
    topic_id stays -1 until the topics stage assigns one. Batch intermediates
    are local and become collectable when the call returns.
    """
    if len(posts) > MAX_BATCH:
        raise BatchTooLarge(f"batch of {len(posts)} exceeds limit {MAX_BATCH}")
    now = now or datetime.now().astimezone()
    labeled: list[LabeledPost] = []
    rejected: list[str] = []
    survivors: list[tuple[RawPost, str]] = []
    for post in posts:
        norm = textproc.normalize(post.text)
        if not textproc.is_valid_content(norm, min_tokens):
            rejected.append(post.id)
        else:
            survivors.append((post, norm.cleaned))
    texts = [cleaned for _, cleaned in survivors]
    sentiments = sentiment_clf.classify_batch(texts)
    emotions = emotion_clf.classify_batch(texts)
    for (post, cleaned), (s_label, s_scores), (e_label, e_scores) in zip(
        survivors, sentiments, emotions
    ):
        labeled.append(
            LabeledPost(
                id=post.id,
                did=post.did,
                created_at=post.created_at,
                langs=post.langs,
                cleaned_text=cleaned,
                sentiment=s_label,
                sentiment_scores=s_scores,
                emotion=e_label,
                emotion_scores=e_scores,
                topic_id=-1,
                hashtags=tuple(textproc.extract_hashtags(post.text)),
                emojis=tuple(textproc.extract_emojis(post.text)),
                labeled_at=now,
            )
        )
    return labeled, rejected
