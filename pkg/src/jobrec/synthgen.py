"""Deterministic synthetic data with a planted progression signal.

Candidates climb career ladders over time: each ladder has its own industry
token and a rolling window of level skills, and jobs sit at fixed
(ladder, level) positions.  An interaction is positively preferred exactly
when the job is one level above the candidate's level on their own ladder
at that moment; labels flip with a small noise rate.  The preference rule
is exported so learnability tests have an oracle.
"""

from __future__ import annotations

import json
import os
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from jobrec.domain import (
    Candidate,
    CandidateSnapshot,
    Dataset,
    Interaction,
    InteractionKind,
    Job,
)
from jobrec.errors import ConfigInvalid

HORIZON = 100_000
YEARS_PER_LEVEL = 2.0

# Positive interactions split into recruiter-tag / expand / apply with these
# weights (the observed production mix).
KIND_WEIGHTS = (215218, 72794, 28486)
KIND_ORDER = (
    InteractionKind.RECRUITER_TAG,
    InteractionKind.EXPAND,
    InteractionKind.APPLY,
)


@dataclass(frozen=True)
class GeneratorConfig:
    n_candidates: int = 4208
    n_jobs: int = 2334
    n_interactions: int = 1_125_776
    n_ladders: int = 8
    ladder_depth: int = 8
    positive_rate: float = 0.281
    noise_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if min(self.n_candidates, self.n_jobs, self.n_interactions) <= 0:
            raise ConfigInvalid("candidate, job and interaction counts must be positive")
        if self.n_ladders <= 0 or self.ladder_depth < 3:
            raise ConfigInvalid("need at least one ladder with depth >= 3")
        if not (0.0 <= self.noise_rate <= 1.0 and 0.0 <= self.positive_rate <= 1.0):
            raise ConfigInvalid("rates must lie in [0, 1]")
        if self.n_jobs < self.n_ladders * self.ladder_depth:
            raise ConfigInvalid(
                f"n_jobs={self.n_jobs} cannot cover "
                f"{self.n_ladders}x{self.ladder_depth} ladder positions")
        if self.noise_rate >= 0.5:
            raise ConfigInvalid("noise_rate must be below 0.5")
        per_candidate = -(-self.n_interactions // self.n_candidates)
        if per_candidate >= HORIZON:
            raise ConfigInvalid(
                f"{per_candidate} interactions per candidate exceeds the "
                f"{HORIZON}-tick horizon")
        lo, hi = self.noise_rate, 1.0 - self.noise_rate
        if not lo <= self.positive_rate <= hi:
            raise ConfigInvalid(
                f"positive_rate {self.positive_rate} unreachable with "
                f"noise_rate {self.noise_rate}")

    @classmethod
    def small(cls, seed: int = 0) -> "GeneratorConfig":
        """Desk-scale preset: 800 candidates, 400 jobs, ~50k interactions."""
        return cls(n_candidates=800, n_jobs=400, n_interactions=50_000, seed=seed)

    @property
    def climbs(self) -> int:
        """Level advancements per candidate within the horizon."""
        return max(1, min(3, self.ladder_depth - 3))


def _skills_at(ladder: int, level: int) -> frozenset:
    # Rolling window over level skills, so neighboring levels share tokens.
    return frozenset(f"s{ladder}_{u}" for u in range(max(0, level - 2), level + 1))


def _industry(ladder: int) -> str:
    return f"industry_{ladder}"


def _title(ladder: int, level: int) -> str:
    return f"role{ladder} l{level}"


@dataclass
class GroundTruth:
    """The generator's planted preference rule and everything it needs."""

    horizon: int
    noise_rate: float
    candidate_ladder: dict
    candidate_start_level: dict
    candidate_advance_times: dict
    job_position: dict  # job id -> (ladder, level)

    def level_at(self, candidate_id: str, t: int) -> int:
        start = self.candidate_start_level[candidate_id]
        times = self.candidate_advance_times[candidate_id]
        return start + bisect_right(times, t)

    def pref(self, candidate_id: str, job_id: str, t: int) -> float:
        """1.0 exactly when the job is the next level up on the candidate's
        own ladder at time t, else 0.0."""
        ladder, level = self.job_position[job_id]
        if ladder != self.candidate_ladder[candidate_id]:
            return 0.0
        return 1.0 if level == self.level_at(candidate_id, t) + 1 else 0.0

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {"type": "meta", "horizon": self.horizon,
                      "noise_rate": self.noise_rate}
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for cid in sorted(self.candidate_ladder):
                record = {
                    "type": "candidate",
                    "id": cid,
                    "ladder": self.candidate_ladder[cid],
                    "start_level": self.candidate_start_level[cid],
                    "advance_times": list(self.candidate_advance_times[cid]),
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            for jid in sorted(self.job_position):
                ladder, level = self.job_position[jid]
                record = {"type": "job", "id": jid, "ladder": ladder,
                          "level": level}
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str) -> "GroundTruth":
        truth = cls(horizon=HORIZON, noise_rate=0.0, candidate_ladder={},
                    candidate_start_level={}, candidate_advance_times={},
                    job_position={})
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                kind = record.get("type")
                if kind == "meta":
                    truth.horizon = int(record["horizon"])
                    truth.noise_rate = float(record["noise_rate"])
                elif kind == "candidate":
                    cid = record["id"]
                    truth.candidate_ladder[cid] = int(record["ladder"])
                    truth.candidate_start_level[cid] = int(record["start_level"])
                    truth.candidate_advance_times[cid] = tuple(
                        int(t) for t in record["advance_times"])
                elif kind == "job":
                    truth.job_position[record["id"]] = (
                        int(record["ladder"]), int(record["level"]))
        return truth


def positive_kind_split(n_positives: int, seed: int) -> dict:
    """Multinomial split of positive interactions into the three kinds."""
    if n_positives < 0:
        raise ConfigInvalid("n_positives must be non-negative")
    total = float(sum(KIND_WEIGHTS))
    probs = [w / total for w in KIND_WEIGHTS]
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_positives, probs)
    return {kind: int(count) for kind, count in zip(KIND_ORDER, counts)}


def _make_jobs(config: GeneratorConfig, rng: np.random.Generator):
    jobs = {}
    position = {}
    slots = {}
    created_perm = rng.permutation(config.n_jobs)
    n_slots = config.n_ladders * config.ladder_depth
    for idx in range(config.n_jobs):
        slot = idx % n_slots
        ladder = slot // config.ladder_depth
        level = slot % config.ladder_depth
        jid = f"j{idx:05d}"
        jobs[jid] = Job(
            id=jid,
            required_skills=_skills_at(ladder, level),
            min_experience=YEARS_PER_LEVEL * level,
            max_experience=YEARS_PER_LEVEL * level + YEARS_PER_LEVEL,
            industry=_industry(ladder),
            title=_title(ladder, level),
            created_on=2 * HORIZON + int(created_perm[idx]),
            organization_id=f"org{idx % 17}",
        )
        position[jid] = (ladder, level)
        slots.setdefault((ladder, level), []).append(jid)
    return jobs, position, slots


def _candidate_state(cid: str, ladder: int, level: int, idx: int) -> dict:
    return {
        "skills": _skills_at(ladder, level),
        "experience_years": YEARS_PER_LEVEL * level + 1.0,
        "location": f"loc{idx % 11}",
        "industry": _industry(ladder),
        "organization_id": f"org{idx % 23}",
        "job_title": _title(ladder, level),
    }


def _make_candidates(config: GeneratorConfig, rng: np.random.Generator):
    candidates = {}
    snapshots = {}
    ladder_of = {}
    start_of = {}
    advances_of = {}
    max_start = config.ladder_depth - 2 - config.climbs
    for idx in range(config.n_candidates):
        cid = f"c{idx:05d}"
        ladder = idx % config.n_ladders
        start = (idx // config.n_ladders) % (max_start + 1)
        times = np.sort(rng.choice(
            np.arange(1, HORIZON), size=config.climbs, replace=False))
        advance_times = tuple(int(t) for t in times)
        snaps = []
        for step in range(config.climbs + 1):
            as_of = 0 if step == 0 else advance_times[step - 1]
            state = _candidate_state(cid, ladder, start + step, idx)
            snaps.append(CandidateSnapshot(candidate_id=cid, as_of=as_of, **state))
        final = _candidate_state(cid, ladder, start + config.climbs, idx)
        candidates[cid] = Candidate(id=cid, updated_at=HORIZON, **final)
        snapshots[cid] = snaps
        ladder_of[cid] = ladder
        start_of[cid] = start
        advances_of[cid] = advance_times
    return candidates, snapshots, ladder_of, start_of, advances_of


def generate(config: GeneratorConfig):
    """Build (Dataset, GroundTruth) for the configured scale, deterministically."""
    rng = np.random.default_rng(config.seed)
    jobs, job_position, slots = _make_jobs(config, rng)
    (candidates, snapshots, ladder_of, start_of,
     advances_of) = _make_candidates(config, rng)
    truth = GroundTruth(
        horizon=HORIZON,
        noise_rate=config.noise_rate,
        candidate_ladder=ladder_of,
        candidate_start_level=start_of,
        candidate_advance_times=advances_of,
        job_position=job_position,
    )

    # Share of interactions aimed at the preferred (next-level) job so the
    # post-noise positive share hits the target:
    #   q(1 - noise) + (1 - q)noise = positive_rate.
    q = (config.positive_rate - config.noise_rate) / (1.0 - 2.0 * config.noise_rate)

    depth = config.ladder_depth
    other_ladders = {
        ladder: [l for l in range(config.n_ladders) if l != ladder]
        for ladder in range(config.n_ladders)
    }
    base, extra = divmod(config.n_interactions, config.n_candidates)
    drafts = []  # (cid, jid, t, label)
    for idx, cid in enumerate(sorted(candidates)):
        count = base + (1 if idx < extra else 0)
        if count == 0:
            continue
        ladder = ladder_of[cid]
        times = np.sort(rng.choice(np.arange(1, HORIZON), size=count, replace=False))
        for t in (int(x) for x in times):
            level = truth.level_at(cid, t)
            if rng.random() < q:
                pool = slots[(ladder, level + 1)]
            elif rng.random() < 0.5 and config.n_ladders > 1:
                away = other_ladders[ladder]
                lad2 = away[int(rng.integers(0, len(away)))]
                lev2 = int(rng.integers(0, depth))
                pool = slots[(lad2, lev2)]
            else:
                nearby = [w for w in range(max(0, level - 2), min(depth, level + 3))
                          if w != level + 1]
                lev2 = nearby[int(rng.integers(0, len(nearby)))]
                pool = slots[(ladder, lev2)]
            jid = pool[int(rng.integers(0, len(pool)))]
            pref = truth.pref(cid, jid, t)
            label = int(pref)
            if rng.random() < config.noise_rate:
                label = 1 - label
            drafts.append((cid, jid, t, label))

    n_positive = sum(d[3] for d in drafts)
    split = positive_kind_split(n_positive, config.seed)
    kind_pool = []
    for kind in KIND_ORDER:
        kind_pool.extend([kind] * split[kind])
    order = rng.permutation(n_positive)
    interactions = []
    pos_seen = 0
    for cid, jid, t, label in drafts:
        if label == 1:
            kind = kind_pool[int(order[pos_seen])]
            pos_seen += 1
        else:
            kind = InteractionKind.SHOWN_IGNORED
        interactions.append(Interaction(candidate_id=cid, job_id=jid,
                                        kind=kind, timestamp=t))

    dataset = Dataset(candidates=candidates, jobs=jobs,
                      interactions=interactions, snapshots=snapshots)
    return dataset, truth


def write_corpus(dataset: Dataset, truth: GroundTruth, out_dir: str) -> dict:
    """Write candidates/jobs/interactions JSONL plus the ground truth file.

    Returns the path map.  Same dataset and truth always produce the same
    bytes.
    """
    from jobrec.domain import save_dataset

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "candidates": os.path.join(out_dir, "candidates.jsonl"),
        "jobs": os.path.join(out_dir, "jobs.jsonl"),
        "interactions": os.path.join(out_dir, "interactions.jsonl"),
        "ground_truth": os.path.join(out_dir, "ground_truth.jsonl"),
    }
    save_dataset(dataset, paths["candidates"], paths["jobs"], paths["interactions"])
    truth.save(paths["ground_truth"])
    return paths
