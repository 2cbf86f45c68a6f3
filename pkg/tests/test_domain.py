import json

import pytest

from helpers import make_candidate, make_dataset, make_interaction, make_job, make_snapshot
from jobrec.domain import (
    Candidate,
    InteractionKind,
    Job,
    label_interaction,
    load_dataset,
    parse_timestamp,
    save_dataset,
    snapshot_at,
)
from jobrec.errors import (
    DanglingReference,
    DuplicateId,
    NoSnapshotBefore,
    ParseError,
    UnknownCandidate,
)


def test_label_positive_kinds():
    assert label_interaction(InteractionKind.RECRUITER_TAG) == 1
    assert label_interaction(InteractionKind.EXPAND) == 1
    assert label_interaction(InteractionKind.APPLY) == 1
    assert label_interaction(InteractionKind.SHOWN_IGNORED) == 0


def test_parse_timestamp_forms():
    assert parse_timestamp(1700000000) == 1700000000
    assert parse_timestamp(12.9) == 12
    # Z suffix and explicit offset agree; naive strings read as UTC.
    assert parse_timestamp("1970-01-01T00:01:00Z") == 60
    assert parse_timestamp("1970-01-01T00:01:00+00:00") == 60
    assert parse_timestamp("1970-01-01T01:00:00") == 3600
    with pytest.raises(ValueError):
        parse_timestamp(True)
    with pytest.raises(ValueError):
        parse_timestamp(None)


def test_candidate_and_job_validation():
    with pytest.raises(ValueError):
        make_candidate("c1", exp=-1.0)
    with pytest.raises(ValueError):
        make_job("j1", lo=6.0, hi=2.0)


def test_dataset_orders_interactions_and_indexes_by_candidate():
    cand = make_candidate("c1")
    jobs = [make_job("j1"), make_job("j2")]
    inters = [
        make_interaction("c1", "j2", "apply", 50),
        make_interaction("c1", "j1", "ignore", 10),
        make_interaction("c1", "j1", "expand", 30),
    ]
    ds = make_dataset([cand], jobs, inters)
    assert [i.timestamp for i in ds.interactions] == [10, 30, 50]
    assert [i.job_id for i in ds.interactions_of("c1")] == ["j1", "j1", "j2"]
    assert [i.timestamp for i in ds.positive_interactions_of("c1")] == [30, 50]
    assert ds.interactions_of("missing") == []


def test_applied_jobs_are_apply_kind_only():
    cand = make_candidate("c1")
    jobs = [make_job("j1"), make_job("j2"), make_job("j3")]
    inters = [
        make_interaction("c1", "j1", "apply", 10),
        make_interaction("c1", "j2", "expand", 20),
        make_interaction("c1", "j3", "tag", 30),
    ]
    ds = make_dataset([cand], jobs, inters)
    assert ds.applied_job_ids("c1") == {"j1"}


def test_latest_event_time_is_one_past_max():
    cand = make_candidate("c1", updated_at=500)
    job = make_job("j1")
    ds = make_dataset([cand], [job], [make_interaction("c1", "j1", "apply", 900)])
    assert ds.latest_event_time == 901
    ds2 = make_dataset([cand], [job], [make_interaction("c1", "j1", "apply", 100)])
    assert ds2.latest_event_time == 501


def test_snapshot_at_picks_latest_at_or_before():
    cand = make_candidate("c1", updated_at=1000)
    snaps = [make_snapshot(cand, 100, experience_years=1.0),
             make_snapshot(cand, 200, experience_years=2.0)]
    ds = make_dataset([cand], [make_job("j1")], [], snapshots={"c1": snaps})
    assert snapshot_at("c1", 150, ds).experience_years == 1.0
    assert snapshot_at("c1", 200, ds).experience_years == 2.0
    assert snapshot_at("c1", 999, ds).experience_years == 2.0
    with pytest.raises(NoSnapshotBefore):
        snapshot_at("c1", 50, ds)
    with pytest.raises(UnknownCandidate):
        snapshot_at("nope", 150, ds)


def test_snapshot_at_falls_back_to_profile_without_history():
    cand = make_candidate("c1", exp=7.0, updated_at=1000)
    ds = make_dataset([cand], [make_job("j1")], [])
    snap = snapshot_at("c1", 5, ds)
    assert snap.experience_years == 7.0
    assert snap.as_of == 1000


def _write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _candidate_rec(cid="c1", **extra):
    rec = {"id": cid, "skills": ["Python", " SQL "], "experience_years": 4,
           "location": "Metro", "industry": "Tech", "organization_id": "O1",
           "job_title": "Data Engineer", "updated_at": 10_000}
    rec.update(extra)
    return rec


def _job_rec(jid="j1", **extra):
    rec = {"id": jid, "required_skills": ["python"], "min_experience": 2,
           "max_experience": 6, "industry": "tech", "title": "engineer",
           "created_on": 100, "organization_id": "o2"}
    rec.update(extra)
    return rec


def _interaction_rec(**extra):
    rec = {"candidate_id": "c1", "job_id": "j1", "kind": "apply",
           "timestamp": 500}
    rec.update(extra)
    return rec


@pytest.fixture()
def corpus_paths(tmp_path):
    c = tmp_path / "candidates.jsonl"
    j = tmp_path / "jobs.jsonl"
    i = tmp_path / "interactions.jsonl"
    return str(c), str(j), str(i)


def test_load_dataset_normalizes_tokens(corpus_paths):
    cp, jp, ip = corpus_paths
    _write_jsonl(cp, [_candidate_rec()])
    _write_jsonl(jp, [_job_rec()])
    _write_jsonl(ip, [_interaction_rec()])
    ds = load_dataset(cp, jp, ip)
    cand = ds.candidates["c1"]
    assert cand.skills == frozenset({"python", "sql"})
    assert cand.industry == "tech" and cand.location == "metro"
    assert len(ds.interactions) == 1


def test_load_dataset_rejects_duplicates_and_danglers(corpus_paths):
    cp, jp, ip = corpus_paths
    _write_jsonl(cp, [_candidate_rec(), _candidate_rec()])
    _write_jsonl(jp, [_job_rec()])
    _write_jsonl(ip, [])
    with pytest.raises(DuplicateId):
        load_dataset(cp, jp, ip)

    _write_jsonl(cp, [_candidate_rec()])
    _write_jsonl(ip, [_interaction_rec(job_id="ghost")])
    with pytest.raises(DanglingReference):
        load_dataset(cp, jp, ip)

    _write_jsonl(ip, [_interaction_rec(), _interaction_rec()])
    with pytest.raises(DuplicateId):
        load_dataset(cp, jp, ip)


def test_load_dataset_parse_errors(corpus_paths):
    cp, jp, ip = corpus_paths
    _write_jsonl(cp, [_candidate_rec()])
    _write_jsonl(jp, [_job_rec()])
    with open(ip, "w") as fh:
        fh.write("{not json\n")
    with pytest.raises(ParseError):
        load_dataset(cp, jp, ip)

    _write_jsonl(ip, [_interaction_rec(kind="poke")])
    with pytest.raises(ParseError):
        load_dataset(cp, jp, ip)

    rec = _candidate_rec()
    del rec["skills"]
    _write_jsonl(cp, [rec])
    _write_jsonl(ip, [])
    with pytest.raises(ParseError):
        load_dataset(cp, jp, ip)


def test_load_dataset_snapshots(corpus_paths):
    cp, jp, ip = corpus_paths
    _write_jsonl(cp, [
        _candidate_rec(),
        _candidate_rec(as_of=2000, experience_years=1),
        _candidate_rec(as_of=6000, experience_years=3),
    ])
    _write_jsonl(jp, [_job_rec()])
    _write_jsonl(ip, [])
    ds = load_dataset(cp, jp, ip)
    assert [s.as_of for s in ds.snapshots["c1"]] == [2000, 6000]
    assert ds.snapshot_at("c1", 4000).experience_years == 1.0

    # snapshot newer than the profile is rejected
    _write_jsonl(cp, [_candidate_rec(), _candidate_rec(as_of=99_999)])
    with pytest.raises(ParseError):
        load_dataset(cp, jp, ip)

    # snapshot of an unknown candidate is rejected
    _write_jsonl(cp, [_candidate_rec(), _candidate_rec(cid="ghost", as_of=10)])
    with pytest.raises(DanglingReference):
        load_dataset(cp, jp, ip)


def test_save_load_round_trip_is_byte_stable(tmp_path):
    cand = make_candidate("c1", updated_at=9000)
    snaps = [make_snapshot(cand, 100), make_snapshot(cand, 300)]
    jobs = [make_job("j1"), make_job("j2", created_on=200)]
    inters = [make_interaction("c1", "j1", "apply", 150),
              make_interaction("c1", "j2", "ignore", 250)]
    ds = make_dataset([cand], jobs, inters, snapshots={"c1": snaps})

    first = (tmp_path / "a", tmp_path / "b", tmp_path / "c")
    second = (tmp_path / "d", tmp_path / "e", tmp_path / "f")
    save_dataset(ds, *(str(p) for p in first))
    loaded = load_dataset(*(str(p) for p in first))
    save_dataset(loaded, *(str(p) for p in second))
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()
    assert loaded.candidates.keys() == ds.candidates.keys()
    assert loaded.jobs.keys() == ds.jobs.keys()
    assert [i.key for i in loaded.interactions] == [i.key for i in ds.interactions]
    assert [s.as_of for s in loaded.snapshots["c1"]] == [100, 300]
