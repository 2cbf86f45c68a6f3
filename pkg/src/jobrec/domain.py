"""Core entities and file-backed ingestion.

Candidates, jobs, interactions and candidate snapshots are read from JSONL
files (one record per line).  A snapshot is a candidate record carrying an
extra ``as_of`` field; it freezes the profile as it looked at that time.
Datasets are immutable after load and safe to share across threads.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable

from jobrec.errors import (
    DanglingReference,
    DuplicateId,
    NoSnapshotBefore,
    ParseError,
    UnknownCandidate,
)


class InteractionKind(str, Enum):
    RECRUITER_TAG = "recruiter_tag"
    EXPAND = "expand"
    APPLY = "apply"
    SHOWN_IGNORED = "shown_ignored"


POSITIVE_KINDS = frozenset(
    {InteractionKind.RECRUITER_TAG, InteractionKind.EXPAND, InteractionKind.APPLY}
)


def label_interaction(kind: InteractionKind) -> int:
    """Binary outcome for an interaction kind: 1 for any favorable event
    (recruiter tag, expand, apply), 0 for shown-but-ignored."""
    return 1 if kind in POSITIVE_KINDS else 0


def parse_timestamp(value: object) -> int:
    """Coerce a JSON timestamp (epoch seconds or ISO-8601 string) to UTC
    integer seconds."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"not a timestamp: {value!r}")


def _clean_token(value: object) -> str:
    """Case-fold and trim a categorical token; portal data is noisy."""
    return str(value).strip().casefold()


def _clean_skills(values: Iterable[object]) -> frozenset[str]:
    cleaned = (_clean_token(v) for v in values)
    return frozenset(s for s in cleaned if s)


@dataclass(frozen=True)
class Candidate:
    id: str
    skills: frozenset[str]
    experience_years: float
    location: str
    industry: str
    organization_id: str
    job_title: str
    updated_at: int

    def __post_init__(self) -> None:
        if self.experience_years < 0:
            raise ValueError(f"candidate {self.id}: negative experience")

    def snapshot(self, as_of: int) -> "CandidateSnapshot":
        """Freeze the current profile as a snapshot at *as_of*."""
        return CandidateSnapshot(
            candidate_id=self.id,
            as_of=as_of,
            skills=self.skills,
            experience_years=self.experience_years,
            location=self.location,
            industry=self.industry,
            organization_id=self.organization_id,
            job_title=self.job_title,
        )


@dataclass(frozen=True)
class CandidateSnapshot:
    candidate_id: str
    as_of: int
    skills: frozenset[str]
    experience_years: float
    location: str
    industry: str
    organization_id: str
    job_title: str


@dataclass(frozen=True)
class Job:
    id: str
    required_skills: frozenset[str]
    min_experience: float
    max_experience: float
    industry: str
    title: str
    created_on: int
    organization_id: str

    def __post_init__(self) -> None:
        if self.min_experience > self.max_experience:
            raise ValueError(f"job {self.id}: min_experience > max_experience")


@dataclass(frozen=True)
class Interaction:
    candidate_id: str
    job_id: str
    kind: InteractionKind
    timestamp: int

    @property
    def label(self) -> int:
        return label_interaction(self.kind)

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.candidate_id, self.job_id, self.kind.value, self.timestamp)


@dataclass
class Dataset:
    """Loaded candidates, jobs, time-ordered interactions and snapshots.

    Interactions are sorted non-decreasing by timestamp; per-candidate views
    are indexed once at construction.  Instances are treated as read-only.
    """

    candidates: dict[str, Candidate]
    jobs: dict[str, Job]
    interactions: list[Interaction]
    snapshots: dict[str, list[CandidateSnapshot]]
    _by_candidate: dict[str, list[Interaction]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.interactions = sorted(self.interactions, key=lambda i: (i.timestamp, i.key))
        for snaps in self.snapshots.values():
            snaps.sort(key=lambda s: s.as_of)
        self._by_candidate = {}
        for inter in self.interactions:
            self._by_candidate.setdefault(inter.candidate_id, []).append(inter)

    def interactions_of(self, candidate_id: str) -> list[Interaction]:
        return self._by_candidate.get(candidate_id, [])

    def positive_interactions_of(self, candidate_id: str) -> list[Interaction]:
        return [i for i in self.interactions_of(candidate_id) if i.label == 1]

    def applied_job_ids(self, candidate_id: str) -> set[str]:
        """Jobs the candidate clicked *apply* on (never re-recommended)."""
        return {
            i.job_id
            for i in self.interactions_of(candidate_id)
            if i.kind is InteractionKind.APPLY
        }

    def snapshot_at(self, candidate_id: str, t: int) -> CandidateSnapshot:
        return snapshot_at(candidate_id, t, self)

    @property
    def latest_event_time(self) -> int:
        """Deterministic stand-in for "now": one tick past the last event."""
        latest = 0
        if self.interactions:
            latest = self.interactions[-1].timestamp
        for cand in self.candidates.values():
            latest = max(latest, cand.updated_at)
        return latest + 1


def snapshot_at(candidate_id: str, t: int, dataset: Dataset) -> CandidateSnapshot:
    """Latest snapshot of the candidate at or before *t*.

    When the data supplied no explicit snapshots for the candidate, the
    single current profile serves as the snapshot for all times.
    """
    if candidate_id not in dataset.candidates:
        raise UnknownCandidate(candidate_id)
    snaps = dataset.snapshots.get(candidate_id)
    if not snaps:
        cand = dataset.candidates[candidate_id]
        return cand.snapshot(cand.updated_at)
    idx = bisect.bisect_right([s.as_of for s in snaps], t)
    if idx == 0:
        raise NoSnapshotBefore(
            f"candidate {candidate_id}: no snapshot at or before t={t}"
        )
    return snaps[idx - 1]


# -- JSONL loading -------------------------------------------------------------

def _iter_jsonl(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ParseError(path, line_no, "record is not a JSON object")
            yield line_no, record


def _require(record: dict, keys: tuple[str, ...], path: str, line_no: int) -> None:
    missing = [k for k in keys if k not in record]
    if missing:
        raise ParseError(path, line_no, f"missing fields: {', '.join(missing)}")


_CANDIDATE_KEYS = (
    "id", "skills", "experience_years", "location", "industry",
    "organization_id", "job_title", "updated_at",
)
_JOB_KEYS = (
    "id", "required_skills", "min_experience", "max_experience",
    "industry", "title", "created_on", "organization_id",
)
_INTERACTION_KEYS = ("candidate_id", "job_id", "kind", "timestamp")


def load_dataset(candidates_path: str, jobs_path: str, interactions_path: str) -> Dataset:
    """Load and validate the three JSONL files into a :class:`Dataset`.

    Candidate lines carrying ``as_of`` are snapshots of an existing
    candidate.  Enforces unique ids, unique interaction keys and referential
    integrity of interactions.
    """
    candidates: dict[str, Candidate] = {}
    snapshots: dict[str, list[CandidateSnapshot]] = {}
    for line_no, rec in _iter_jsonl(candidates_path):
        _require(rec, _CANDIDATE_KEYS, candidates_path, line_no)
        try:
            cid = str(rec["id"])
            skills = _clean_skills(rec["skills"])
            exp = float(rec["experience_years"])
            loc = _clean_token(rec["location"])
            ind = _clean_token(rec["industry"])
            org = _clean_token(rec["organization_id"])
            title = _clean_token(rec["job_title"])
            updated = parse_timestamp(rec["updated_at"])
            if "as_of" in rec:
                snapshots.setdefault(cid, []).append(
                    CandidateSnapshot(
                        candidate_id=cid,
                        as_of=parse_timestamp(rec["as_of"]),
                        skills=skills,
                        experience_years=exp,
                        location=loc,
                        industry=ind,
                        organization_id=org,
                        job_title=title,
                    )
                )
                continue
            candidate = Candidate(
                id=cid, skills=skills, experience_years=exp, location=loc,
                industry=ind, organization_id=org, job_title=title,
                updated_at=updated,
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(candidates_path, line_no, str(exc)) from exc
        if candidate.id in candidates:
            raise DuplicateId(f"candidate id {candidate.id!r}")
        candidates[candidate.id] = candidate

    for cid, snaps in snapshots.items():
        if cid not in candidates:
            raise DanglingReference(f"snapshot for unknown candidate {cid!r}")
        latest = candidates[cid].updated_at
        for snap in snaps:
            if snap.as_of > latest:
                raise ParseError(
                    candidates_path, 0,
                    f"snapshot of {cid!r} at {snap.as_of} is after updated_at {latest}",
                )

    jobs: dict[str, Job] = {}
    for line_no, rec in _iter_jsonl(jobs_path):
        _require(rec, _JOB_KEYS, jobs_path, line_no)
        try:
            job = Job(
                id=str(rec["id"]),
                required_skills=_clean_skills(rec["required_skills"]),
                min_experience=float(rec["min_experience"]),
                max_experience=float(rec["max_experience"]),
                industry=_clean_token(rec["industry"]),
                title=_clean_token(rec["title"]),
                created_on=parse_timestamp(rec["created_on"]),
                organization_id=_clean_token(rec["organization_id"]),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(jobs_path, line_no, str(exc)) from exc
        if job.id in jobs:
            raise DuplicateId(f"job id {job.id!r}")
        jobs[job.id] = job

    interactions: list[Interaction] = []
    seen_keys: set[tuple[str, str, str, int]] = set()
    for line_no, rec in _iter_jsonl(interactions_path):
        _require(rec, _INTERACTION_KEYS, interactions_path, line_no)
        try:
            kind = InteractionKind(str(rec["kind"]))
        except ValueError as exc:
            raise ParseError(
                interactions_path, line_no, f"unknown interaction kind {rec['kind']!r}"
            ) from exc
        try:
            inter = Interaction(
                candidate_id=str(rec["candidate_id"]),
                job_id=str(rec["job_id"]),
                kind=kind,
                timestamp=parse_timestamp(rec["timestamp"]),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(interactions_path, line_no, str(exc)) from exc
        if inter.candidate_id not in candidates:
            raise DanglingReference(
                f"interaction at line {line_no} references missing candidate "
                f"{inter.candidate_id!r}"
            )
        if inter.job_id not in jobs:
            raise DanglingReference(
                f"interaction at line {line_no} references missing job {inter.job_id!r}"
            )
        if inter.key in seen_keys:
            raise DuplicateId(f"duplicate interaction {inter.key}")
        seen_keys.add(inter.key)
        interactions.append(inter)

    return Dataset(
        candidates=candidates, jobs=jobs, interactions=interactions,
        snapshots=snapshots,
    )


# -- JSONL saving --------------------------------------------------------------

def _candidate_record(cand: Candidate) -> dict:
    return {
        "id": cand.id,
        "skills": sorted(cand.skills),
        "experience_years": cand.experience_years,
        "location": cand.location,
        "industry": cand.industry,
        "organization_id": cand.organization_id,
        "job_title": cand.job_title,
        "updated_at": cand.updated_at,
    }


def _snapshot_record(snap: CandidateSnapshot, updated_at: int) -> dict:
    return {
        "id": snap.candidate_id,
        "skills": sorted(snap.skills),
        "experience_years": snap.experience_years,
        "location": snap.location,
        "industry": snap.industry,
        "organization_id": snap.organization_id,
        "job_title": snap.job_title,
        "updated_at": updated_at,
        "as_of": snap.as_of,
    }


def _job_record(job: Job) -> dict:
    return {
        "id": job.id,
        "required_skills": sorted(job.required_skills),
        "min_experience": job.min_experience,
        "max_experience": job.max_experience,
        "industry": job.industry,
        "title": job.title,
        "created_on": job.created_on,
        "organization_id": job.organization_id,
    }


def save_dataset(
    dataset: Dataset, candidates_path: str, jobs_path: str, interactions_path: str
) -> None:
    """Write a dataset back to JSONL in a normalized order (ids ascending,
    interactions time-ordered) so that save/load round-trips byte-stably."""
    with open(candidates_path, "w", encoding="utf-8") as fh:
        for cid in sorted(dataset.candidates):
            cand = dataset.candidates[cid]
            fh.write(json.dumps(_candidate_record(cand), sort_keys=True) + "\n")
            for snap in dataset.snapshots.get(cid, []):
                fh.write(
                    json.dumps(_snapshot_record(snap, cand.updated_at), sort_keys=True)
                    + "\n"
                )
    with open(jobs_path, "w", encoding="utf-8") as fh:
        for jid in sorted(dataset.jobs):
            fh.write(json.dumps(_job_record(dataset.jobs[jid]), sort_keys=True) + "\n")
    with open(interactions_path, "w", encoding="utf-8") as fh:
        for inter in dataset.interactions:
            rec = {
                "candidate_id": inter.candidate_id,
                "job_id": inter.job_id,
                "kind": inter.kind.value,
                "timestamp": inter.timestamp,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
