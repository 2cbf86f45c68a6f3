"""End-to-end slate composition.

Builds the relaxed job filter, routes on interaction history, blends the
machine-learned list with the two similarity lists, rescues empty results
with fuzzy matching, and applies the anti-starvation sweep.  Jobs the
candidate already applied to never appear in a slate.
"""

from __future__ import annotations

import json
import logging
import os
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from jobrec.domain import Candidate, Dataset, Job
from jobrec.errors import AllSkillsUnknown
from jobrec.featurize import Featurizer
from jobrec.recommenders import (
    RankedEntry,
    RankedJobs,
    Source,
    ml_recommend,
    similar_candidates_recommend,
    similar_jobs_recommend,
)
from jobrec.seqnet import ModelParams
from jobrec.simindex import SimilarityIndex, cosine

log = logging.getLogger(__name__)

_WORD = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class JobFilter:
    """Relaxed experience window plus optional categorical constraints."""

    min_experience: float
    max_experience: float
    industries: frozenset = frozenset()
    locations: frozenset = frozenset()

    def __post_init__(self):
        if self.min_experience > self.max_experience:
            raise ValueError("experience window is inverted")


@dataclass(frozen=True)
class RecommendationSlate:
    candidate_id: str
    entries: tuple
    composed_at: int
    reason: str | None = None

    def __post_init__(self):
        ids = [e.job_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("slate contains duplicate job ids")

    @property
    def job_ids(self) -> list[str]:
        return [e.job_id for e in self.entries]


@dataclass
class StarvationCounter:
    """Per (candidate, job) count of compositions the job went unshown.

    Counts only move for jobs inside the candidate's current filter pool;
    a shown or force-inserted job drops back to zero.
    """

    threshold: int = 50
    counts: dict = field(default_factory=dict)

    def get(self, candidate_id: str, job_id: str) -> int:
        return self.counts.get((candidate_id, job_id), 0)

    def increment(self, candidate_id: str, job_id: str) -> int:
        key = (candidate_id, job_id)
        value = self.counts.get(key, 0) + 1
        self.counts[key] = value
        return value

    def reset(self, candidate_id: str, job_id: str) -> None:
        self.counts.pop((candidate_id, job_id), None)

    def save(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for (cid, jid) in sorted(self.counts):
                record = {"candidate_id": cid, "job_id": jid,
                          "count": self.counts[(cid, jid)]}
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str, threshold: int = 50) -> "StarvationCounter":
        counter = cls(threshold=threshold)
        if not os.path.exists(path):
            return counter
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                key = (record["candidate_id"], record["job_id"])
                counter.counts[key] = int(record["count"])
        return counter


def build_indexes(dataset: Dataset, featurizer: Featurizer):
    """Vectorize every job and candidate into similarity indexes.

    Entities whose skills are entirely unknown to the vocabulary cannot be
    vectorized; they are left out (and so can neither query nor match).
    """
    job_vectors = {}
    for jid, job in dataset.jobs.items():
        try:
            job_vectors[jid] = featurizer.vectorize_job(job)
        except AllSkillsUnknown:
            log.warning("job %s has no known skills; excluded from index", jid)
    candidate_vectors = {}
    for cid, cand in dataset.candidates.items():
        try:
            candidate_vectors[cid] = featurizer.vectorize_candidate(cand)
        except AllSkillsUnknown:
            log.warning("candidate %s has no known skills; excluded from index", cid)
    return SimilarityIndex(job_vectors), SimilarityIndex(candidate_vectors)


def build_job_filter(candidate: Candidate,
                     relaxation_years: float = 1.0) -> JobFilter:
    """Experience window [max(0, e - w), e + w]; categorical fields are
    constrained only when present on the profile."""
    exp = float(candidate.experience_years)
    w = float(relaxation_years)
    industries = frozenset({candidate.industry}) if candidate.industry else frozenset()
    locations = frozenset({candidate.location}) if candidate.location else frozenset()
    return JobFilter(
        min_experience=max(0.0, exp - w),
        max_experience=exp + w,
        industries=industries,
        locations=locations,
    )


def apply_filter(job_filter: JobFilter, jobs: Iterable[Job]) -> set:
    """Jobs whose experience interval overlaps the window and that satisfy
    any categorical constraints.  Jobs carry no location field, so only the
    industry constraint applies to them."""
    kept = set()
    for job in jobs:
        if job.max_experience < job_filter.min_experience:
            continue
        if job.min_experience > job_filter.max_experience:
            continue
        if job_filter.industries and job.industry not in job_filter.industries:
            continue
        kept.add(job.id)
    return kept


def _entry_list(ranked) -> list:
    if isinstance(ranked, RankedJobs):
        return list(ranked.entries)
    return list(ranked)


def blend(r_ml, r_nml1, r_nml2, rng: np.random.Generator,
          window: int = 10, per_source: int = 2) -> list:
    """Interleave the three lists into one slate.

    With ML results present, every ML entry is kept in order and each
    window of ``window`` ML entries absorbs up to ``per_source`` fresh
    entries from each similarity list at random positions inside that
    window.  Without ML results, the two similarity lists alternate,
    starting with the first.  Duplicate job ids are skipped, consuming the
    next unconsumed entry instead.
    """
    ml = _entry_list(r_ml)
    nml1 = deque(_entry_list(r_nml1))
    nml2 = deque(_entry_list(r_nml2))

    if not ml:
        out = []
        placed = set()
        queues = [nml1, nml2]
        turn = 0
        while nml1 or nml2:
            queue = queues[turn]
            while queue and queue[0].job_id in placed:
                queue.popleft()
            if queue:
                entry = queue.popleft()
                out.append(entry)
                placed.add(entry.job_id)
            turn = 1 - turn
        return out

    placed = {e.job_id for e in ml}
    out = []
    for start in range(0, len(ml), window):
        chunk = list(ml[start:start + window])
        for queue in (nml1, nml2):
            inserted = 0
            while inserted < per_source:
                while queue and queue[0].job_id in placed:
                    queue.popleft()
                if not queue:
                    break
                entry = queue.popleft()
                pos = int(rng.integers(0, len(chunk) + 1))
                chunk.insert(pos, entry)
                placed.add(entry.job_id)
                inserted += 1
        out.extend(chunk)
    return out


def _title_tokens(text: str) -> set:
    return set(_WORD.findall(text.casefold()))


def _fuzzy_score(candidate: Candidate, job: Job, featurizer: Featurizer) -> float:
    cand_centroid = featurizer.skill_centroid(candidate.skills)
    job_centroid = featurizer.skill_centroid(job.required_skills)
    if not cand_centroid.any() or not job_centroid.any():
        skill_part = 0.0
    else:
        skill_part = max(0.0, cosine(cand_centroid, job_centroid))
    exp_ok = 1.0 if (job.min_experience <= candidate.experience_years
                     <= job.max_experience) else 0.0
    industry_ok = 1.0 if (candidate.industry and
                          candidate.industry == job.industry) else 0.0
    cand_tokens = _title_tokens(candidate.job_title)
    job_tokens = _title_tokens(job.title)
    union = cand_tokens | job_tokens
    overlap = len(cand_tokens & job_tokens) / len(union) if union else 0.0
    title_ok = 1.0 if overlap >= 0.5 else 0.0
    return 0.5 * skill_part + 0.5 * (exp_ok + industry_ok + title_ok) / 3.0


def edge_case_recommend(candidate: Candidate, j_filtered: set,
                        featurizer: Featurizer, dataset: Dataset,
                        keep_threshold: float = 0.3) -> RankedJobs:
    """Fuzzy-match rescue when the composed slate would be empty.

    Each pooled job scores half on skill-centroid cosine and half on the
    mean of three indicators: experience inside the job's own bounds,
    industry equality, and title token overlap of at least one half.
    """
    scored = []
    for jid in sorted(j_filtered):
        score = _fuzzy_score(candidate, dataset.jobs[jid], featurizer)
        if score >= keep_threshold:
            scored.append((jid, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    entries = tuple(
        RankedEntry(job_id=jid, source=Source.EDGE_CASE, provenance=score)
        for jid, score in scored)
    return RankedJobs(source=Source.EDGE_CASE, entries=entries)


def starvation_sweep(counters: StarvationCounter, candidate_id: str,
                     j_filtered: set, entries: list,
                     rng: np.random.Generator) -> list:
    """Update per-job unshown counts and force-insert the overdue ones.

    Every pooled job absent from the slate gains one count; counts above
    the threshold trigger insertion at a random position and reset.  Shown
    jobs reset.  Jobs outside the pool are untouched.
    """
    shown = {e.job_id for e in entries}
    out = list(entries)
    for jid in sorted(j_filtered):
        if jid in shown:
            counters.reset(candidate_id, jid)
            continue
        count = counters.increment(candidate_id, jid)
        if count > counters.threshold:
            pos = int(rng.integers(0, len(out) + 1))
            out.insert(pos, RankedEntry(job_id=jid, source=Source.EDGE_CASE,
                                        provenance="starvation"))
            counters.reset(candidate_id, jid)
    return out


def compose(candidate: Candidate, dataset: Dataset, model: ModelParams | None,
            featurizer: Featurizer, job_index: SimilarityIndex,
            candidate_index: SimilarityIndex, counters: StarvationCounter,
            rng: np.random.Generator,
            relaxation_years: float = 1.0,
            ml_cutoff: float = 0.5,
            similar_jobs_threshold: float = 0.70,
            similar_candidates_threshold: float = 0.80,
            blend_window: int = 10,
            blend_per_source: int = 2,
            edge_keep_threshold: float = 0.3) -> RecommendationSlate:
    """Run the full pipeline for one candidate.

    Candidates with a positive interaction get the model ranking plus both
    similarity lists; cold candidates get only the similar-candidates list.
    The slate timestamp is the dataset's latest event time, so a frozen
    dataset composes identically on every run.
    """
    now = dataset.latest_event_time
    job_filter = build_job_filter(candidate, relaxation_years)
    j_filtered = apply_filter(job_filter, dataset.jobs.values())
    applied = dataset.applied_job_ids(candidate.id)
    eligible = j_filtered - applied

    has_history = bool(dataset.positive_interactions_of(candidate.id))
    r_ml = RankedJobs(source=Source.MACHINE_LEARNING, entries=())
    r_nml1 = RankedJobs(source=Source.SIMILAR_JOBS_APPLIED, entries=())
    if has_history:
        if model is not None:
            r_ml = ml_recommend(candidate, j_filtered, model, featurizer,
                                dataset, cutoff=ml_cutoff, now=now)
        r_nml1 = similar_jobs_recommend(candidate, j_filtered, job_index,
                                        dataset, threshold=similar_jobs_threshold)
    r_nml2 = similar_candidates_recommend(
        candidate, j_filtered, candidate_index, dataset,
        threshold=similar_candidates_threshold)

    entries = blend(r_ml.without(applied), r_nml1.without(applied),
                    r_nml2.without(applied), rng,
                    window=blend_window, per_source=blend_per_source)
    if not entries:
        rescue = edge_case_recommend(candidate, eligible, featurizer, dataset,
                                     keep_threshold=edge_keep_threshold)
        entries = list(rescue.entries)

    entries = starvation_sweep(counters, candidate.id, eligible, entries, rng)
    reason = None if entries else "exhausted"
    return RecommendationSlate(
        candidate_id=candidate.id,
        entries=tuple(entries),
        composed_at=now,
        reason=reason,
    )


def ml_only_slate(candidate: Candidate, dataset: Dataset,
                  model: ModelParams | None, featurizer: Featurizer,
                  relaxation_years: float = 1.0, ml_cutoff: float = 0.5,
                  top: int | None = None) -> RecommendationSlate:
    """Model ranking alone, for A/B comparison against the blended slate."""
    now = dataset.latest_event_time
    job_filter = build_job_filter(candidate, relaxation_years)
    j_filtered = apply_filter(job_filter, dataset.jobs.values())
    applied = dataset.applied_job_ids(candidate.id)

    r_ml = RankedJobs(source=Source.MACHINE_LEARNING, entries=())
    if model is not None and dataset.positive_interactions_of(candidate.id):
        r_ml = ml_recommend(candidate, j_filtered, model, featurizer,
                            dataset, cutoff=ml_cutoff, now=now)
    entries = list(r_ml.without(applied).entries)
    if top is not None:
        entries = entries[:top]
    return RecommendationSlate(
        candidate_id=candidate.id,
        entries=tuple(entries),
        composed_at=now,
        reason=None if entries else "exhausted",
    )
