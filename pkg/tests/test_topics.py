import math
import random

import numpy as np
import pytest
import scipy.sparse as sp

from narrative import topics
from narrative.errors import (
    EmptyCorpus,
    EmptyMatrix,
    EmptyVocabulary,
    RankTooLarge,
    VocabularyMismatch,
)


def brute_force_tfidf(corpus, vocab):
    """Independent per-entry oracle: plain Python, no shared code paths."""
    n = vocab.n_docs_fitted
    rows = []
    for tokens in corpus:
        row = []
        for term in vocab.terms:
            tf = sum(1 for t in tokens if t == term)
            df = vocab.document_frequency[term]
            row.append(tf * (math.log((1 + n) / (1 + df)) + 1.0))
        norm = math.sqrt(sum(v * v for v in row))
        rows.append([v / norm if norm > 0 else 0.0 for v in row])
    return rows


CORPUS3 = [["cat", "sat"], ["cat", "ran"], ["dog", "ran"]]


class TestBuildVocabulary:
    def test_term_in_every_doc_excluded_at_095(self):
        corpus = [["omnipresent", "a1"], ["omnipresent", "b1"], ["omnipresent", "c1"]]
        vocab = topics.build_vocabulary(corpus, min_df=1, max_df_ratio=0.95)
        assert "omnipresent" not in vocab.terms  # df=3 > 0.95*3=2.85

    def test_min_df_one_keeps_all(self):
        vocab = topics.build_vocabulary(CORPUS3, min_df=1)
        assert vocab.terms == ("cat", "dog", "ran", "sat")
        assert vocab.document_frequency == {"cat": 2, "dog": 1, "ran": 2, "sat": 1}
        assert vocab.n_docs_fitted == 3

    def test_all_stopwords_raises(self):
        with pytest.raises(EmptyVocabulary):
            topics.build_vocabulary([["the", "and"], ["the"]], min_df=1, stop_words={"the", "and"})

    def test_empty_corpus_raises(self):
        with pytest.raises(EmptyCorpus):
            topics.build_vocabulary([])

    def test_max_terms_keeps_highest_df(self):
        corpus = [["common", "rare1"], ["common", "rare2"], ["common", "mid"], ["mid"]]
        vocab = topics.build_vocabulary(corpus, min_df=1, max_df_ratio=1.0, max_terms=2)
        assert vocab.terms == ("common", "mid")

    def test_max_terms_tie_lexicographic(self):
        corpus = [["bb", "aa"], ["cc", "aa"]]
        vocab = topics.build_vocabulary(corpus, min_df=1, max_df_ratio=1.0, max_terms=2)
        # df: aa=2, bb=1, cc=1; tie between bb and cc broken lexicographically
        assert vocab.terms == ("aa", "bb")

    def test_index_consistent(self):
        vocab = topics.build_vocabulary(CORPUS3, min_df=1)
        assert [vocab.terms[i] for i in vocab.index.values()] == list(vocab.index.keys())


class TestTfidf:
    def test_three_doc_fixture_frozen_oracle(self):
        vocab = topics.build_vocabulary(CORPUS3, min_df=1)
        X = topics.tfidf_vectorize(CORPUS3, vocab).toarray()
        # frozen from hand computation: idf(cat)=ln(4/3)+1, idf(sat)=ln(2)+1
        cat, sat = vocab.index["cat"], vocab.index["sat"]
        assert X[0, cat] == pytest.approx(0.605348508106, abs=1e-9)
        assert X[0, sat] == pytest.approx(0.795960541568, abs=1e-9)
        oracle = brute_force_tfidf(CORPUS3, vocab)
        np.testing.assert_allclose(X, oracle, atol=1e-9)

    def test_out_of_vocab_doc_is_zero_row(self):
        vocab = topics.build_vocabulary(CORPUS3, min_df=1)
        X = topics.tfidf_vectorize([["unseen", "words"]], vocab)
        assert X.nnz == 0

    def test_single_doc_single_term(self):
        vocab = topics.build_vocabulary([["solo"]], min_df=1, max_df_ratio=1.0)
        X = topics.tfidf_vectorize([["solo"]], vocab).toarray()
        assert X[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_nonzero_rows_unit_norm(self):
        rng = random.Random(11)
        words = [f"w{i}" for i in range(30)]
        corpus = [[rng.choice(words) for _ in range(rng.randint(1, 15))] for _ in range(10)]
        vocab = topics.build_vocabulary(corpus, min_df=1, max_df_ratio=1.0)
        X = topics.tfidf_vectorize(corpus, vocab)
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        for norm in norms:
            if norm > 0:
                assert norm == pytest.approx(1.0, abs=1e-9)

    def test_matches_brute_force_on_random_corpora(self):
        rng = random.Random(5)
        for trial in range(5):
            words = [f"t{i}" for i in range(12)]
            corpus = [
                [rng.choice(words) for _ in range(rng.randint(0, 10))] for _ in range(rng.randint(1, 10))
            ]
            try:
                vocab = topics.build_vocabulary(corpus, min_df=1, max_df_ratio=1.0)
            except EmptyVocabulary:
                continue
            X = topics.tfidf_vectorize(corpus, vocab).toarray()
            np.testing.assert_allclose(X, brute_force_tfidf(corpus, vocab), atol=1e-9)

    def test_weights_nonnegative(self):
        vocab = topics.build_vocabulary(CORPUS3, min_df=1)
        X = topics.tfidf_vectorize(CORPUS3, vocab)
        assert (X.data >= 0).all()


def _full_batch_config(**kw):
    defaults = dict(k=5, batch_size=10_000, max_epochs=120, tol=1e-300, epsilon=1e-10, seed=42)
    defaults.update(kw)
    return topics.NmfConfig(**defaults)


class TestNmfFit:
    def test_rank_one_exactly_factorable(self):
        X = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
        model, W = topics.nmf_fit(X, _full_batch_config(k=1, max_epochs=500))
        recon = W @ model.H
        rel = np.linalg.norm(X.toarray() - recon) / np.linalg.norm(X.toarray())
        assert rel < 1e-6

    def test_full_batch_objective_monotone(self):
        rng = np.random.default_rng(123)
        X = sp.csr_matrix(rng.random((50, 30)))
        model, _ = topics.nmf_fit(X, _full_batch_config(max_epochs=120))
        trace = model.objective_trace
        assert len(trace) >= 100
        rises = [trace[i + 1] - trace[i] for i in range(len(trace) - 1)]
        assert max(rises) <= 1e-10

    def test_factors_nonnegative(self):
        rng = np.random.default_rng(9)
        X = sp.csr_matrix(rng.random((20, 12)))
        model, W = topics.nmf_fit(X, _full_batch_config(k=3, max_epochs=50))
        assert np.all(W >= 0)
        assert np.all(model.H >= 0)

    def test_bit_identical_for_same_seed(self):
        rng = np.random.default_rng(77)
        X = sp.csr_matrix(rng.random((25, 15)))
        cfg = topics.NmfConfig(k=4, batch_size=8, max_epochs=30, tol=1e-300, seed=99)
        m1, w1 = topics.nmf_fit(X, cfg)
        m2, w2 = topics.nmf_fit(X, cfg)
        assert np.array_equal(w1, w2)
        assert np.array_equal(m1.H, m2.H)
        assert m1.objective_trace == m2.objective_trace

    def test_different_seed_differs(self):
        rng = np.random.default_rng(77)
        X = sp.csr_matrix(rng.random((25, 15)))
        m1, _ = topics.nmf_fit(X, topics.NmfConfig(k=4, max_epochs=5, tol=1e-300, seed=1))
        m2, _ = topics.nmf_fit(X, topics.NmfConfig(k=4, max_epochs=5, tol=1e-300, seed=2))
        assert not np.array_equal(m1.H, m2.H)

    def test_minibatch_trend_on_fixture_corpus(self):
        corpus = _clustered_corpus()
        vocab = topics.build_vocabulary(corpus, min_df=2, max_df_ratio=0.95)
        X = topics.tfidf_vectorize(corpus, vocab)
        cfg = topics.NmfConfig(k=3, batch_size=16, max_epochs=12, tol=1e-300, seed=5)
        model, _ = topics.nmf_fit(X, cfg)
        assert len(model.objective_trace) >= 10
        assert model.objective_trace[9] <= model.objective_trace[0]

    def test_rank_too_large(self):
        X = sp.csr_matrix(np.ones((3, 4)))
        with pytest.raises(RankTooLarge):
            topics.nmf_fit(X, topics.NmfConfig(k=4))

    def test_empty_matrix(self):
        with pytest.raises(EmptyMatrix):
            topics.nmf_fit(sp.csr_matrix((4, 5)), topics.NmfConfig(k=2))

    def test_tol_stops_early(self):
        X = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
        model, _ = topics.nmf_fit(X, topics.NmfConfig(k=1, max_epochs=500, tol=1e-4, seed=0))
        assert len(model.objective_trace) < 500


def _clustered_corpus(seed=13, docs_per_cluster=20):
    """Three vocabularies with minimal overlap: a clusterable fixture."""
    rng = random.Random(seed)
    clusters = [
        ["sleep", "insomnia", "dreams", "night", "rest", "tired"],
        ["therapy", "session", "therapist", "progress", "talking", "feelings"],
        ["exercise", "running", "outside", "walking", "sunshine", "energy"],
    ]
    corpus = []
    for words in clusters:
        for _ in range(docs_per_cluster):
            corpus.append([rng.choice(words) for _ in range(rng.randint(4, 8))])
    return corpus


class TestAssignAndTransform:
    def _fitted(self):
        corpus = _clustered_corpus()
        vocab = topics.build_vocabulary(corpus, min_df=2, max_df_ratio=0.95)
        X = topics.tfidf_vectorize(corpus, vocab)
        cfg = topics.NmfConfig(k=3, batch_size=1024, max_epochs=300, tol=1e-9, seed=21)
        model, W = topics.nmf_fit(X, cfg)
        from dataclasses import replace

        return replace(model, vocabulary=vocab), W, X, corpus

    def test_assign_argmax(self):
        model, _, _, _ = self._fitted()
        assert topics.assign_topic(model, np.array([0.1, 0.7, 0.2])) == 1

    def test_assign_zero_row_sentinel(self):
        model, _, _, _ = self._fitted()
        assert topics.assign_topic(model, np.zeros(3)) == -1

    def test_assign_tie_lowest_index(self):
        corpus = CORPUS3
        vocab = topics.build_vocabulary(corpus, min_df=1)
        X = topics.tfidf_vectorize(corpus, vocab)
        model, _ = topics.nmf_fit(X, topics.NmfConfig(k=2, max_epochs=5, tol=1e-300, seed=0))
        assert topics.assign_topic(model, np.array([0.5, 0.5])) == 0

    def test_transform_training_rows_keep_assignment(self):
        model, W, X, _ = self._fitted()
        W_new = topics.transform(model, X)
        train = [topics.assign_topic(model, W[i]) for i in range(X.shape[0])]
        projected = [topics.assign_topic(model, W_new[i]) for i in range(X.shape[0])]
        agreement = sum(t == p for t, p in zip(train, projected)) / len(train)
        assert agreement == 1.0

    def test_transform_zero_row(self):
        model, _, X, _ = self._fitted()
        zero = sp.csr_matrix((1, X.shape[1]))
        W_new = topics.transform(model, zero)
        assert topics.assign_topic(model, W_new[0]) == -1

    def test_transform_column_mismatch(self):
        model, _, _, _ = self._fitted()
        with pytest.raises(VocabularyMismatch):
            topics.transform(model, sp.csr_matrix((2, 3)))

    def test_transform_nonnegative(self):
        model, _, X, _ = self._fitted()
        assert np.all(topics.transform(model, X) >= 0)


class TestTopKeywords:
    def _model(self):
        corpus = _clustered_corpus()
        vocab = topics.build_vocabulary(corpus, min_df=2, max_df_ratio=0.95)
        X = topics.tfidf_vectorize(corpus, vocab)
        model, _ = topics.nmf_fit(X, topics.NmfConfig(k=3, max_epochs=100, tol=1e-9, seed=21))
        from dataclasses import replace

        return replace(model, vocabulary=vocab)

    def test_dominant_term_first(self):
        model = self._model()
        for row, kws in zip(model.H, topics.top_keywords(model, 1)):
            best = np.max(row)
            idx = model.vocabulary.index[kws[0]]
            assert row[idx] == pytest.approx(best)

    def test_clamped_to_vocabulary(self):
        model = self._model()
        lists = topics.top_keywords(model, 10_000)
        assert all(len(kws) == len(model.vocabulary.terms) for kws in lists)

    def test_matches_sort_oracle(self):
        model = self._model()
        lists = topics.top_keywords(model, 5)
        for row, kws in zip(model.H, lists):
            pairs = sorted(zip(row, model.vocabulary.terms), key=lambda wt: (-wt[0], wt[1]))
            assert kws == [t for _, t in pairs[:5]]


class TestModelSerialization:
    def test_json_roundtrip_bit_exact(self):
        corpus = _clustered_corpus()
        model, _ = topics.fit_topics(corpus, topics.NmfConfig(k=3, max_epochs=20, tol=1e-300, seed=8), min_df=2)
        restored = topics.TopicModel.from_json(model.to_json())
        assert np.array_equal(restored.H, model.H)
        assert restored.vocabulary == model.vocabulary
        assert restored.objective_trace == model.objective_trace
        assert restored.config == model.config

    def test_fit_topics_clamps_k(self):
        model, W = topics.fit_topics(
            [["aa", "bb"], ["aa", "bb"]], topics.NmfConfig(k=5, max_epochs=10), min_df=1, max_df_ratio=1.0
        )
        assert model.k <= 2
        assert W.shape[1] == model.k
