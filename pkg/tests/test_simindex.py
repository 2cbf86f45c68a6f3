import numpy as np
import pytest

from jobrec.errors import LengthMismatch, UnknownCandidate, UnknownJob, ZeroVector
from jobrec.simindex import (
    SimilarityIndex,
    cosine,
    similar_candidates,
    similar_jobs,
)


def test_cosine_basic_identities():
    a = np.array([1.0, 0.0])
    assert cosine(a, a) == 1.0
    assert cosine(a, np.array([0.0, 1.0])) == 0.0
    assert cosine(a, -a) == -1.0
    v = np.random.default_rng(0).normal(size=32)
    assert cosine(v, v) == 1.0  # clamp holds under rounding
    with pytest.raises(LengthMismatch):
        cosine(a, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ZeroVector):
        cosine(a, np.zeros(2))


def test_index_excludes_zero_vectors():
    idx = SimilarityIndex({"a": np.array([1.0, 0.0]),
                           "z": np.zeros(2)})
    assert "a" in idx and "z" not in idx
    with pytest.raises(KeyError):
        idx.query("z", ["a"], 0.0)


def test_query_threshold_ordering_and_self_exclusion():
    vecs = {
        "q": np.array([1.0, 0.0]),
        "close": np.array([0.9, 0.1]),
        "mid": np.array([1.0, 1.0]),
        "far": np.array([-1.0, 0.0]),
    }
    idx = SimilarityIndex(vecs)
    result = idx.query("q", vecs.keys(), threshold=0.5)
    assert result.ids == ["close", "mid"]
    assert result.entries[0].score > result.entries[1].score
    assert "q" not in result.ids
    tight = idx.query("q", vecs.keys(), threshold=0.99)
    assert tight.ids == ["close"]  # cos(q, close) ~ 0.9939, mid ~ 0.7071


def test_query_tie_break_is_id_ascending():
    v = np.array([3.0, 4.0])
    idx = SimilarityIndex({"q": v, "b": 2 * v, "a": 5 * v, "c": v.copy()})
    result = idx.query("q", ["c", "b", "a"], threshold=0.99)
    assert result.ids == ["a", "b", "c"]
    assert all(e.score == 1.0 for e in result.entries)


def test_query_matches_brute_force_exactly():
    rng = np.random.default_rng(42)
    ids = [f"v{i:03d}" for i in range(80)]
    vecs = {i: rng.normal(size=6) for i in ids}
    idx = SimilarityIndex(vecs)
    for threshold in (0.0, 0.3, 0.7, 0.9):
        got = idx.query("v000", ids, threshold)
        expected = []
        for other in ids:
            if other == "v000":
                continue
            score = cosine(vecs["v000"], vecs[other])
            if score >= threshold:
                expected.append((other, score))
        expected.sort(key=lambda t: (-t[1], t[0]))
        assert [(e.id, e.score) for e in got.entries] == expected


def test_typed_wrappers_raise_on_unknown_query():
    idx = SimilarityIndex({"a": np.array([1.0, 0.0])})
    with pytest.raises(UnknownJob):
        similar_jobs("ghost", ["a"], idx)
    with pytest.raises(UnknownCandidate):
        similar_candidates("ghost", ["a"], idx)
    assert similar_jobs("a", ["a"], idx, threshold=0.1).ids == []
