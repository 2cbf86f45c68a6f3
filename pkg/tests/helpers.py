"""Hand-built fixture constructors shared across test modules."""

from jobrec.domain import (
    Candidate,
    CandidateSnapshot,
    Dataset,
    Interaction,
    InteractionKind,
    Job,
)

KINDS = {
    "tag": InteractionKind.RECRUITER_TAG,
    "expand": InteractionKind.EXPAND,
    "apply": InteractionKind.APPLY,
    "ignore": InteractionKind.SHOWN_IGNORED,
}


def make_candidate(cid, skills=("python", "sql"), exp=4.0, industry="tech",
                   location="metro", title="data engineer", org="o1",
                   updated_at=10_000):
    return Candidate(
        id=cid, skills=frozenset(skills), experience_years=exp,
        location=location, industry=industry, organization_id=org,
        job_title=title, updated_at=updated_at)


def make_job(jid, skills=("python", "sql"), lo=3.0, hi=5.0, industry="tech",
             title="data engineer", created_on=100, org="o2"):
    return Job(
        id=jid, required_skills=frozenset(skills), min_experience=lo,
        max_experience=hi, industry=industry, title=title,
        created_on=created_on, organization_id=org)


def make_interaction(cid, jid, kind, t):
    return Interaction(candidate_id=cid, job_id=jid, kind=KINDS[kind],
                       timestamp=t)


def make_snapshot(cand, as_of, **changes):
    base = dict(
        candidate_id=cand.id, as_of=as_of, skills=cand.skills,
        experience_years=cand.experience_years, location=cand.location,
        industry=cand.industry, organization_id=cand.organization_id,
        job_title=cand.job_title)
    base.update(changes)
    return CandidateSnapshot(**base)


def make_dataset(candidates, jobs, interactions, snapshots=None):
    return Dataset(
        candidates={c.id: c for c in candidates},
        jobs={j.id: j for j in jobs},
        interactions=list(interactions),
        snapshots=snapshots or {})
