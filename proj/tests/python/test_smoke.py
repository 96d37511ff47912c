import json
import math

import pytest

import npam


def test_ingest_and_load():
    c = npam.ingest_text(["cat dog", "dog dog"])
    assert c.vocab_size == 2
    assert c.documents == [[0, 1], [1, 1]]
    b = npam.load_bow([(0, 1, 2), (0, 0, 1)], 2)
    assert b.documents == [[0, 1, 1]]
    with pytest.raises(npam.NpamError):
        npam.load_bow([], 5)


def test_crp_weights():
    w = npam.crp_weights([3, 1], 1.0)
    assert w == pytest.approx([0.6, 0.2, 0.2], abs=1e-15)
    with pytest.raises(npam.ParameterError):
        npam.crp_weights([1], 0.0)


def test_synthetic_and_folds():
    corpus, truth = npam.generate_synthetic(grid=5, num_super=2, num_sub=4, num_docs=10, doc_length=20, seed=3)
    assert corpus.vocab_size == 25
    assert corpus.num_tokens == 200
    assert truth.num_tokens == 200
    folds = npam.split_folds(corpus, 5, seed=1)
    assert [len(f[2]) for f in folds] == [2] * 5
    with pytest.raises(npam.SpecError):
        npam.generate_synthetic(grid=5, num_sub=11)


def test_train_export_and_score():
    corpus, truth = npam.generate_synthetic(num_docs=8, doc_length=30, seed=2)
    snaps = npam.train(corpus, burn_in=5, n_samples=2, sample_lag=2, seed=4)
    assert [s.sweep for s in snaps] == [7, 9]
    again = npam.train(corpus, burn_in=5, n_samples=2, sample_lag=2, seed=4)
    assert snaps[-1].to_json() == again[-1].to_json()

    s = snaps[-1]
    mix = s.super_mixture(0)
    assert len(mix) == s.num_super + 1
    assert sum(mix) == pytest.approx(1.0, abs=1e-12)
    assert sum(s.word_distribution(0)) == pytest.approx(1.0, abs=1e-12)
    restored = npam.TopicSnapshot.from_json(s.to_json())
    assert json.loads(restored.to_json()) == json.loads(s.to_json())

    report = npam.score_structure(truth, s.assignments)
    assert 0.0 <= report["super_accuracy"] <= 100.0
    perfect = npam.score_structure(truth, truth.labels)
    assert perfect["super_accuracy"] == 100.0
    assert perfect["sub_accuracy"] == 100.0

    topics = npam.export_topics(s, top_n=3, corpus=corpus)
    assert topics["num_sub"] == s.num_sub
    assert all(len(t["top_words"]) == 3 for t in topics["sub_topics"])

    doc = npam.generate_document(s, 15, seed=1)
    assert len(doc) == 15 and all(0 <= w < 25 for w in doc)


def test_pam_and_likelihood():
    corpus, _ = npam.generate_synthetic(num_docs=10, doc_length=40, seed=5)
    train, test, _ = npam.split_folds(corpus, 2, seed=0)[0]
    npam_snaps = npam.train(train, burn_in=5, n_samples=2, sample_lag=2, seed=1)
    pam_snaps = npam.pam_train(train, s2=2, s3=4, burn_in=5, n_samples=2, sample_lag=2, seed=1)
    a = npam.empirical_likelihood(npam_snaps, [], test, n_generated=50, pseudo_len=40, seed=3)
    b = npam.empirical_likelihood([], pam_snaps, test, n_generated=50, pseudo_len=40, seed=3)
    for r in (a, b):
        assert len(r["fold_log_likelihood"]) == 1
        assert math.isfinite(r["mean_log_likelihood"])
        assert r["mean_log_likelihood"] < 0
