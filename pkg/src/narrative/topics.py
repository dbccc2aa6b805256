"""TF-IDF vectorization and minibatch NMF topic clustering.

Documents are tokenized post texts; the doc-term matrix X (docs x terms,
L2-normalized smoothed TF-IDF) is factorized as X ~ W H with W, H >= 0 by
multiplicative updates over shuffled row batches, minimizing
F(W, H) = 0.5 * ||X - W H||_F^2.

Fitting is single-threaded and deterministic for a given seed and config:
batch order comes from a seeded RNG and all reductions use numpy's fixed
summation order. A fitted TopicModel is immutable and safe to share across
concurrent transform/assign calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    EmptyCorpus,
    EmptyMatrix,
    EmptyVocabulary,
    RankTooLarge,
    VocabularyMismatch,
)

TokenList = Sequence[str]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    index: dict[str, int]
    document_frequency: dict[str, int]
    n_docs_fitted: int


@dataclass(frozen=True)
class NmfConfig:
    k: int = 5
    batch_size: int = 1024
    max_epochs: int = 200
    tol: float = 1e-4
    epsilon: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.batch_size < 1 or self.tol <= 0:
            raise ValueError("k >= 1, batch_size >= 1, tol > 0 required")


@dataclass(frozen=True)
class TopicModel:
    k: int
    H: np.ndarray  # (k, n_terms), non-negative
    vocabulary: Vocabulary
    objective_trace: tuple[float, ...]
    config: NmfConfig

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "terms": list(self.vocabulary.terms),
            "document_frequency": {t: self.vocabulary.document_frequency[t] for t in self.vocabulary.terms},
            "n_docs_fitted": self.vocabulary.n_docs_fitted,
            "H": self.H.tolist(),
            "objective_trace": list(self.objective_trace),
            "config": {
                "k": self.config.k,
                "batch_size": self.config.batch_size,
                "max_epochs": self.config.max_epochs,
                "tol": self.config.tol,
                "epsilon": self.config.epsilon,
                "seed": self.config.seed,
            },
        }
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "TopicModel":
        doc = json.loads(text)
        terms = tuple(doc["terms"])
        vocab = Vocabulary(
            terms=terms,
            index={t: i for i, t in enumerate(terms)},
            document_frequency={t: int(c) for t, c in doc["document_frequency"].items()},
            n_docs_fitted=int(doc["n_docs_fitted"]),
        )
        return TopicModel(
            k=int(doc["k"]),
            H=np.asarray(doc["H"], dtype=np.float64),
            vocabulary=vocab,
            objective_trace=tuple(doc["objective_trace"]),
            config=NmfConfig(**doc["config"]),
        )


def build_vocabulary(
    corpus: Sequence[TokenList],
    min_df: int = 2,
    max_df_ratio: float = 0.95,
    max_terms: int = 5000,
    stop_words: frozenset[str] | set[str] = frozenset(),
) -> Vocabulary:
    """Document-frequency thresholded vocabulary, lexicographically indexed.

    Terms must appear in at least min_df documents and at most
    max_df_ratio * N; when more than max_terms survive, the highest-df terms
    are kept (ties lexicographic).
    """
    if not corpus:
        raise EmptyCorpus("no documents")
    n_docs = len(corpus)
    df: dict[str, int] = {}
    for tokens in corpus:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    max_df = max_df_ratio * n_docs
    kept = [
        (t, c)
        for t, c in df.items()
        if c >= min_df and c <= max_df and t not in stop_words
    ]
    if not kept:
        raise EmptyVocabulary(
            f"no terms survive min_df={min_df}, max_df_ratio={max_df_ratio} over {n_docs} docs"
        )
    if len(kept) > max_terms:
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        kept = kept[:max_terms]
    terms = tuple(sorted(t for t, _ in kept))
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        document_frequency={t: df[t] for t in terms},
        n_docs_fitted=n_docs,
    )


def tfidf_vectorize(corpus: Sequence[TokenList], vocab: Vocabulary) -> sp.csr_matrix:
    """Smoothed TF-IDF doc-term matrix with L2-normalized rows.

    weight(d, t) = count(d, t) * (ln((1 + N)/(1 + df(t))) + 1) with N and df
    from the fitted vocabulary; out-of-vocabulary tokens are ignored and
    all-zero rows are allowed.
    """
    n = vocab.n_docs_fitted
    idf = np.array(
        [np.log((1.0 + n) / (1.0 + vocab.document_frequency[t])) + 1.0 for t in vocab.terms]
    )
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for tokens in corpus:
        counts: dict[int, int] = {}
        for tok in tokens:
            col = vocab.index.get(tok)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        row_cols = sorted(counts)
        row_vals = np.array([counts[c] * idf[c] for c in row_cols])
        norm = np.sqrt(np.sum(row_vals**2))
        if norm > 0:
            row_vals = row_vals / norm
        indices.extend(row_cols)
        data.extend(row_vals.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int32), np.array(indptr, dtype=np.int32)),
        shape=(len(corpus), len(vocab.terms)),
    )


def _objective(X: sp.csr_matrix, W: np.ndarray, H: np.ndarray, x_sq: float) -> float:
    """0.5 * ||X - W H||_F^2 without densifying X."""
    cross = float(np.sum(W * (X @ H.T)))
    gram = float(np.sum((W.T @ W) * (H @ H.T)))
    return 0.5 * (x_sq - 2.0 * cross + gram)


def _init_factors(rng: np.random.Generator, n: int, m: int, k: int, mean: float) -> tuple[np.ndarray, np.ndarray]:
    scale = np.sqrt(mean / k) if mean > 0 else 1e-3
    W = rng.random((n, k)) * scale
    H = rng.random((k, m)) * scale
    return W, H


def _update_w_rows(Xb, Wb: np.ndarray, H: np.ndarray, eps: float, steps: int = 2) -> np.ndarray:
    HHt = H @ H.T
    XbHt = Xb @ H.T
    if sp.issparse(XbHt):
        XbHt = np.asarray(XbHt.todense())
    for _ in range(steps):
        Wb = Wb * XbHt / (Wb @ HHt + eps)
    return Wb


def nmf_fit(X: sp.csr_matrix, config: NmfConfig) -> tuple[TopicModel, np.ndarray]:
    """Fit X ~ W H by minibatch multiplicative updates.

    Per epoch, row batches of config.batch_size are visited in seeded
    shuffled order; each batch gets two multiplicative W-row steps with H
    fixed, then one H step from the batch statistics. The full objective is
    recorded after every epoch and iteration stops when its relative change
    drops below tol. With batch_size >= n_docs this is classic full-batch
    multiplicative updating.

    Returns the fitted model (which owns H) and the doc-topic matrix W. The
    vocabulary slot on the returned model is empty; fit_topics() attaches it.
    """
    X = sp.csr_matrix(X, dtype=np.float64)
    n, m = X.shape
    if n == 0 or m == 0 or X.nnz == 0:
        raise EmptyMatrix("matrix has no nonzero rows")
    if config.k > min(n, m):
        raise RankTooLarge(f"k={config.k} exceeds min(n_docs={n}, n_terms={m})")
    eps = config.epsilon
    rng = np.random.default_rng(config.seed)
    mean = X.sum() / (n * m)
    W, H = _init_factors(rng, n, m, config.k, mean)
    x_sq = float(X.multiply(X).sum())
    trace: list[float] = []
    prev = None
    for _epoch in range(config.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            rows = np.sort(order[start : start + config.batch_size])
            Xb = X[rows]
            Wb = _update_w_rows(Xb, W[rows], H, eps)
            W[rows] = Wb
            WtX = Wb.T @ Xb
            if sp.issparse(WtX):
                WtX = np.asarray(WtX.todense())
            H = H * WtX / (Wb.T @ Wb @ H + eps)
        if __debug__:
            assert np.all(W >= 0) and np.all(H >= 0), "factor went negative"
        obj = _objective(X, W, H, x_sq)
        trace.append(obj)
        if prev is not None and prev > 0 and abs(prev - obj) / prev < config.tol:
            break
        prev = obj
    empty_vocab = Vocabulary(terms=(), index={}, document_frequency={}, n_docs_fitted=0)
    model = TopicModel(
        k=config.k, H=H, vocabulary=empty_vocab, objective_trace=tuple(trace), config=config
    )
    return model, W


def transform(model: TopicModel, X_new: sp.csr_matrix, max_steps: int = 50) -> np.ndarray:
    """Project new rows onto the fitted topics (H fixed).

    W_new is initialized as in fit and refined by multiplicative W steps
    until the relative objective change drops below config.tol or max_steps
    is reached. All-zero input rows stay all-zero.
    """
    X_new = sp.csr_matrix(X_new, dtype=np.float64)
    n, m = X_new.shape
    if m != model.H.shape[1]:
        raise VocabularyMismatch(f"{m} columns vs model vocabulary of {model.H.shape[1]}")
    if n == 0:
        return np.zeros((0, model.k))
    eps = model.config.epsilon
    rng = np.random.default_rng(model.config.seed)
    mean = X_new.sum() / (n * m) if X_new.nnz else 0.0
    W = _init_factors(rng, n, m, model.k, mean)[0]
    H = model.H
    HHt = H @ H.T
    XHt = X_new @ H.T
    if sp.issparse(XHt):
        XHt = np.asarray(XHt.todense())
    x_sq = float(X_new.multiply(X_new).sum())
    prev = None
    for _ in range(max_steps):
        W = W * XHt / (W @ HHt + eps)
        obj = _objective(X_new, W, H, x_sq)
        if prev is not None and prev > 0 and abs(prev - obj) / prev < model.config.tol:
            break
        prev = obj
    zero_rows = np.asarray(X_new.getnnz(axis=1) == 0)
    W[zero_rows] = 0.0
    return W


def assign_topic(model: TopicModel, doc_weights: np.ndarray) -> int:
    """Dominant-topic index; ties to the lowest index; all-zero rows get -1."""
    w = np.asarray(doc_weights, dtype=np.float64)
    if w.shape != (model.k,):
        raise VocabularyMismatch(f"weight row has shape {w.shape}, expected ({model.k},)")
    if np.all(w == 0):
        return -1
    return int(np.argmax(w))


def top_keywords(model: TopicModel, n: int = 10) -> list[list[str]]:
    """Per-topic n highest-weight terms, descending; ties lexicographic."""
    terms = model.vocabulary.terms
    out = []
    for row in model.H:
        ranked = sorted(zip(row, terms), key=lambda wt: (-wt[0], wt[1]))
        out.append([t for _, t in ranked[: min(n, len(terms))]])
    return out


def fit_topics(
    corpus: Sequence[TokenList],
    config: NmfConfig,
    min_df: int = 2,
    max_df_ratio: float = 0.95,
    max_terms: int = 5000,
    stop_words: frozenset[str] | set[str] = frozenset(),
) -> tuple[TopicModel, np.ndarray]:
    """Vocabulary + TF-IDF + NMF in one step over a token corpus.

    k is clamped to min(n_docs, n_terms) so small windows still fit.
    """
    vocab = build_vocabulary(corpus, min_df, max_df_ratio, max_terms, stop_words)
    X = tfidf_vectorize(corpus, vocab)
    k = min(config.k, min(X.shape))
    cfg = replace(config, k=k) if k != config.k else config
    model, W = nmf_fit(X, cfg)
    model = replace(model, vocabulary=vocab)
    return model, W
