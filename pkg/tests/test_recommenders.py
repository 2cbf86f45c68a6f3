import numpy as np
import pytest

from helpers import make_candidate, make_dataset, make_interaction, make_job
from jobrec.errors import NoInteractionHistory
from jobrec.featurize import build_featurizer
from jobrec.recommenders import (
    RankedEntry,
    RankedJobs,
    Source,
    ml_recommend,
    similar_candidates_recommend,
    similar_jobs_recommend,
)
from jobrec.seqnet import init_params
from jobrec.simindex import SimilarityIndex


def test_ranked_jobs_rejects_duplicates_and_filters():
    entries = tuple(RankedEntry(job_id=j, source=Source.EDGE_CASE)
                    for j in ("a", "b", "c"))
    ranked = RankedJobs(source=Source.EDGE_CASE, entries=entries)
    assert ranked.job_ids == ["a", "b", "c"]
    assert ranked.without({"b"}).job_ids == ["a", "c"]
    with pytest.raises(ValueError):
        RankedJobs(source=Source.EDGE_CASE,
                   entries=entries + (entries[0],))


def _ml_fixture():
    cand = make_candidate("c1")
    jobs = [
        make_job("j1", created_on=300),
        make_job("j2", created_on=100),
        make_job("j3", created_on=200),
        make_job("j4", created_on=200),
    ]
    inters = [make_interaction("c1", "j1", "apply", 20)]
    ds = make_dataset([cand], jobs, inters)
    feat = build_featurizer(ds, embed_dim=2, competency_k=2, hash_width=4,
                            seed=0)
    model = init_params(feat.pair_width, hidden1=4, hidden2=3, seed=0)
    return cand, ds, feat, model


def test_ml_recommend_orders_by_created_on_then_id():
    cand, ds, feat, model = _ml_fixture()
    ranked = ml_recommend(cand, {"j1", "j2", "j3", "j4"}, model, feat, ds,
                          cutoff=0.0)
    assert ranked.source is Source.MACHINE_LEARNING
    assert ranked.job_ids == ["j1", "j3", "j4", "j2"]
    for entry in ranked.entries:
        assert 0.0 < entry.provenance < 1.0


def test_ml_recommend_applies_cutoff():
    cand, ds, feat, model = _ml_fixture()
    ranked = ml_recommend(cand, {"j1", "j2", "j3", "j4"}, model, feat, ds,
                          cutoff=1.0)
    assert ranked.job_ids == []


def test_ml_recommend_requires_positive_history():
    cand, ds, feat, model = _ml_fixture()
    cold = make_candidate("c2")
    ds2 = make_dataset([cand, cold], list(ds.jobs.values()),
                       ds.interactions)
    with pytest.raises(NoInteractionHistory):
        ml_recommend(cold, {"j1"}, model, feat, ds2)


def _retrieval_fixture():
    cand = make_candidate("c1")
    jobs = [
        make_job("j1", created_on=10),
        make_job("j2", created_on=40),
        make_job("j3", created_on=30),
        make_job("j4", created_on=20),
    ]
    inters = [
        make_interaction("c1", "j1", "apply", 5),
        make_interaction("c1", "j3", "expand", 6),  # positive but not Apply
    ]
    ds = make_dataset([cand], jobs, inters)
    job_index = SimilarityIndex({
        "j1": np.array([1.0, 0.0]),
        "j2": np.array([0.95, 0.22]),   # cos ~ 0.974 to j1
        "j3": np.array([0.0, 1.0]),     # cos 0 to j1
        "j4": np.array([0.75, 0.60]),   # cos ~ 0.781 to j1
    })
    return cand, ds, job_index


def test_similar_jobs_uses_apply_seeds_only():
    cand, ds, job_index = _retrieval_fixture()
    pool = {"j1", "j2", "j3", "j4"}
    ranked = similar_jobs_recommend(cand, pool, job_index, ds, threshold=0.70)
    assert ranked.source is Source.SIMILAR_JOBS_APPLIED
    # j3 was only expanded, so it seeds nothing; j2 and j4 match seed j1
    assert ranked.job_ids == ["j2", "j4"]  # created_on 40 then 20
    assert all(e.provenance == "j1" for e in ranked.entries)


def test_similar_jobs_threshold_excludes_weak_matches():
    cand, ds, job_index = _retrieval_fixture()
    ranked = similar_jobs_recommend(cand, {"j2", "j4"}, job_index, ds,
                                    threshold=0.9)
    assert ranked.job_ids == ["j2"]


def test_similar_jobs_without_applied_seeds_is_empty():
    cand, ds, job_index = _retrieval_fixture()
    cold = make_candidate("c2")
    ds2 = make_dataset([cand, cold], list(ds.jobs.values()), ds.interactions)
    ranked = similar_jobs_recommend(cold, {"j1", "j2"}, job_index, ds2)
    assert ranked.job_ids == []


def _cold_start_fixture():
    cold = make_candidate("c1")
    warm = make_candidate("c2")
    other = make_candidate("c3")
    jobs = [make_job("j1", created_on=10), make_job("j2", created_on=20),
            make_job("j3", created_on=30)]
    inters = [
        make_interaction("c2", "j1", "apply", 5),
        make_interaction("c2", "j2", "apply", 6),
        make_interaction("c3", "j3", "apply", 7),
    ]
    ds = make_dataset([cold, warm, other], jobs, inters)
    candidate_index = SimilarityIndex({
        "c1": np.array([1.0, 0.0]),
        "c2": np.array([0.9, 0.3]),    # cos ~ 0.949 to c1
        "c3": np.array([0.0, 1.0]),    # cos 0
    })
    return cold, ds, candidate_index


def test_similar_candidates_pulls_neighbor_applications():
    cold, ds, candidate_index = _cold_start_fixture()
    pool = {"j1", "j2", "j3"}
    ranked = similar_candidates_recommend(cold, pool, candidate_index, ds,
                                          threshold=0.80)
    assert ranked.source is Source.SIMILAR_CANDIDATES_APPLIED
    assert ranked.job_ids == ["j2", "j1"]  # newest posting first
    assert all(e.provenance == "c2" for e in ranked.entries)


def test_similar_candidates_respects_pool_and_threshold():
    cold, ds, candidate_index = _cold_start_fixture()
    ranked = similar_candidates_recommend(cold, {"j1"}, candidate_index, ds)
    assert ranked.job_ids == ["j1"]
    strict = similar_candidates_recommend(cold, {"j1", "j2"}, candidate_index,
                                          ds, threshold=0.99)
    assert strict.job_ids == []


def test_similar_candidates_unindexed_query_is_empty():
    cold, ds, candidate_index = _cold_start_fixture()
    ghost = make_candidate("ghost")
    ds2 = make_dataset(list(ds.candidates.values()) + [ghost],
                       list(ds.jobs.values()), ds.interactions)
    ranked = similar_candidates_recommend(ghost, {"j1"}, candidate_index, ds2)
    assert ranked.job_ids == []
