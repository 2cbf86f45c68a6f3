"""The three sub-recommenders feeding slate composition.

Machine-learned ranking over the filtered job pool, similar-jobs retrieval
seeded by the candidate's applied jobs, and similar-candidates retrieval
that borrows the applications of near-identical candidates.  All three
return only jobs from the supplied pool, ordered newest-first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from jobrec.domain import Candidate, Dataset, InteractionKind, snapshot_at
from jobrec.errors import AllSkillsUnknown, NoInteractionHistory
from jobrec.featurize import Featurizer
from jobrec.seqnet import ModelParams, TrainingExample, forward, history_anchor
from jobrec.simindex import SimilarityIndex, similar_candidates, similar_jobs


class Source(str, enum.Enum):
    """Which operation produced a recommendation entry."""

    MACHINE_LEARNING = "machine_learning"
    SIMILAR_JOBS_APPLIED = "similar_jobs_applied"
    SIMILAR_CANDIDATES_APPLIED = "similar_candidates_applied"
    EDGE_CASE = "edge_case"


@dataclass(frozen=True)
class RankedEntry:
    job_id: str
    source: Source
    provenance: object = None  # probability, score, or the id that pulled it in


@dataclass(frozen=True)
class RankedJobs:
    source: Source
    entries: tuple

    def __post_init__(self):
        ids = [e.job_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate job ids in ranked list")

    @property
    def job_ids(self) -> list[str]:
        return [e.job_id for e in self.entries]

    def without(self, excluded: set) -> "RankedJobs":
        kept = tuple(e for e in self.entries if e.job_id not in excluded)
        return RankedJobs(source=self.source, entries=kept)


def _created_on_ranked(job_ids: Iterable[str], dataset: Dataset, source: Source,
                       provenance: dict) -> RankedJobs:
    # Newest postings first; equal timestamps fall back to id order.
    ordered = sorted(job_ids,
                     key=lambda jid: (-dataset.jobs[jid].created_on, jid))
    entries = tuple(
        RankedEntry(job_id=jid, source=source, provenance=provenance.get(jid))
        for jid in ordered)
    return RankedJobs(source=source, entries=entries)


def ml_recommend(candidate: Candidate, j_filtered: set, model: ModelParams,
                 featurizer: Featurizer, dataset: Dataset,
                 cutoff: float = 0.5, now: int | None = None) -> RankedJobs:
    """Predict every pooled job and keep those at or above the cutoff.

    The sequence fed to the model pairs the candidate's state at their most
    recent positive interaction with that interaction's job, then the
    current state with the queried job.  Raises NoInteractionHistory when
    the candidate has no positive interaction to anchor on.
    """
    if now is None:
        now = dataset.latest_event_time
    anchor = history_anchor(dataset, candidate.id, now)
    anchor_snap = snapshot_at(candidate.id, anchor.timestamp, dataset)
    current = snapshot_at(candidate.id, now, dataset)
    try:
        x1 = featurizer.pair_vector(anchor_snap, dataset.jobs[anchor.job_id])
    except AllSkillsUnknown:
        raise NoInteractionHistory(
            f"candidate {candidate.id!r}: anchor interaction cannot be vectorized")
    kept = []
    provenance = {}
    for jid in sorted(j_filtered):
        try:
            x2 = featurizer.pair_vector(current, dataset.jobs[jid])
        except AllSkillsUnknown:
            continue
        out = forward(model, TrainingExample(x1, x2, 0))
        if out.probability >= cutoff:
            kept.append(jid)
            provenance[jid] = out.probability
    return _created_on_ranked(kept, dataset, Source.MACHINE_LEARNING, provenance)


def similar_jobs_recommend(candidate: Candidate, j_filtered: set,
                           job_index: SimilarityIndex, dataset: Dataset,
                           threshold: float = 0.70) -> RankedJobs:
    """Pool jobs similar to anything the candidate has applied to.

    Never-interacted jobs qualify purely on similarity, which is what makes
    new postings reachable.
    """
    seeds = sorted(
        i.job_id for i in dataset.interactions_of(candidate.id)
        if i.kind == InteractionKind.APPLY)
    found = {}
    for seed in seeds:
        if seed not in job_index:
            continue
        for entry in similar_jobs(seed, j_filtered, job_index, threshold).entries:
            # Keep the strongest seed as provenance when several match.
            prior = found.get(entry.id)
            if prior is None or entry.score > prior[1]:
                found[entry.id] = (seed, entry.score)
    provenance = {jid: seed for jid, (seed, _) in found.items()}
    return _created_on_ranked(found, dataset, Source.SIMILAR_JOBS_APPLIED,
                              provenance)


def similar_candidates_recommend(candidate: Candidate, j_filtered: set,
                                 candidate_index: SimilarityIndex,
                                 dataset: Dataset,
                                 threshold: float = 0.80) -> RankedJobs:
    """Pool jobs that near-identical candidates applied to.

    Works with zero interaction history on the querying side, which is the
    cold-start path for brand-new candidates.
    """
    if candidate.id not in candidate_index:
        return RankedJobs(source=Source.SIMILAR_CANDIDATES_APPLIED, entries=())
    neighbors = similar_candidates(
        candidate.id, dataset.candidates.keys(), candidate_index, threshold)
    found = {}
    for neighbor in neighbors.entries:
        for jid in sorted(dataset.applied_job_ids(neighbor.id)):
            if jid in j_filtered and jid not in found:
                found[jid] = neighbor.id
    return _created_on_ranked(found, dataset,
                              Source.SIMILAR_CANDIDATES_APPLIED, found)
