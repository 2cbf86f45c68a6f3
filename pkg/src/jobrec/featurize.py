"""Skill embeddings, latent competency groups and feature vectors.

Skills are embedded by factorizing a PPMI-transformed skill co-occurrence
matrix (counted over candidate and job skill sets) with a truncated SVD.
K-means over the embedding rows yields latent competency groups, which back
skill expansion and a candidate/job competency-similarity feature.

Entity feature vectors concatenate the mean skill embedding, a scaled
experience slot and fixed-width hashed one-hot segments for the categorical
fields, so vector length is stable across datasets.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from jobrec import ioformat
from jobrec.domain import Candidate, CandidateSnapshot, Dataset, Job
from jobrec.errors import (
    AllSkillsUnknown,
    DegenerateMatrix,
    DimensionTooLarge,
    EmptySkill,
    EmptySkillSet,
    EmptyVocabulary,
    KTooLarge,
    UnknownSkill,
)

logger = logging.getLogger(__name__)

_WHITESPACE = re.compile(r"\s+")


def normalize_skill(raw: str) -> str:
    """Lowercase, trim and collapse internal whitespace of a skill token."""
    token = _WHITESPACE.sub(" ", str(raw).strip()).casefold()
    if not token:
        raise EmptySkill(f"skill is empty after normalization: {raw!r}")
    return token


def _normalize_set(skills: Iterable[str]) -> set[str]:
    out = set()
    for raw in skills:
        try:
            out.add(normalize_skill(raw))
        except EmptySkill:
            continue
    return out


@dataclass(frozen=True)
class SkillVocabulary:
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    @property
    def size(self) -> int:
        return len(self.tokens)

    def index_of(self, token: str) -> int:
        idx = self._index.get(token)
        if idx is None:
            raise UnknownSkill(token)
        return idx

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def known_indices(self, skills: Iterable[str]) -> list[int]:
        """Vocabulary indices of the normalized known skills, sorted."""
        idx = {self._index[s] for s in _normalize_set(skills) if s in self._index}
        return sorted(idx)


def build_vocabulary(dataset: Dataset) -> SkillVocabulary:
    """Dense, sorted vocabulary over every skill seen on candidates
    (profiles and snapshots) and jobs."""
    tokens: set[str] = set()
    for cand in dataset.candidates.values():
        tokens |= _normalize_set(cand.skills)
    for snaps in dataset.snapshots.values():
        for snap in snaps:
            tokens |= _normalize_set(snap.skills)
    for job in dataset.jobs.values():
        tokens |= _normalize_set(job.required_skills)
    if not tokens:
        raise EmptyVocabulary("dataset contains no skills")
    return SkillVocabulary(tokens=tuple(sorted(tokens)))


def build_cooccurrence(dataset: Dataset, vocab: SkillVocabulary) -> np.ndarray:
    """Symmetric co-listing counts over candidate and job skill sets.

    Off-diagonal (i, j) counts entities whose skill set contains both i and
    j; the diagonal counts total occurrences of each skill.
    """
    if vocab.size == 0:
        raise EmptyVocabulary("empty vocabulary")
    counts = np.zeros((vocab.size, vocab.size), dtype=np.int64)
    entities: list[Iterable[str]] = [c.skills for c in dataset.candidates.values()]
    entities += [j.required_skills for j in dataset.jobs.values()]
    for skills in entities:
        idx = vocab.known_indices(skills)
        if idx:
            counts[np.ix_(idx, idx)] += 1
    return counts


def ppmi_transform(counts: np.ndarray) -> np.ndarray:
    """Positive pointwise mutual information of a co-occurrence matrix."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise DegenerateMatrix("all-zero co-occurrence matrix")
    row = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(counts * total / np.outer(row, row))
    pmi[~np.isfinite(pmi)] = 0.0
    return np.maximum(pmi, 0.0)


@dataclass(frozen=True)
class SkillEmbedding:
    vectors: np.ndarray  # |V| x d

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def row(self, index: int) -> np.ndarray:
        return self.vectors[index]


def embed_skills(cooccurrence: np.ndarray, d: int, seed: int = 0) -> SkillEmbedding:
    """Rank-*d* factorization of the PPMI matrix.

    Deterministic: dense SVD plus a sign convention (largest-magnitude
    component of each singular vector made positive).  *seed* is recorded by
    callers for checkpoint provenance; the factorization itself needs no
    randomness.
    """
    cooccurrence = np.asarray(cooccurrence, dtype=np.float64)
    n = cooccurrence.shape[0]
    if d < 2:
        raise ValueError(f"embedding dimension must be >= 2, got {d}")
    if d > n:
        raise DimensionTooLarge(f"d={d} exceeds vocabulary size {n}")
    if not np.allclose(cooccurrence, cooccurrence.T):
        raise ValueError("co-occurrence matrix must be symmetric")
    if np.any(cooccurrence < 0):
        raise ValueError("co-occurrence matrix must be non-negative")
    ppmi = ppmi_transform(cooccurrence)
    u, s, _ = np.linalg.svd(ppmi, full_matrices=False)
    for k in range(n):
        pivot = int(np.argmax(np.abs(u[:, k])))
        if u[pivot, k] < 0:
            u[:, k] = -u[:, k]
    vectors = u[:, :d] * np.sqrt(s[:d])
    return SkillEmbedding(vectors=np.ascontiguousarray(vectors))


@dataclass(frozen=True)
class CompetencyGroups:
    k: int
    assignment: np.ndarray  # skill index -> group id
    centroids: np.ndarray   # k x d

    def group_of(self, skill_index: int) -> int:
        return int(self.assignment[skill_index])

    def members(self, group_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == group_id)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=x.dtype)
    chosen = np.zeros(n, dtype=bool)
    first = int(rng.integers(0, n))
    centroids[0] = x[first]
    chosen[first] = True
    dist_sq = np.sum((x - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = dist_sq.sum()
        if total <= 0:
            # Remaining points coincide with chosen centroids; pick any unused.
            pool = np.flatnonzero(~chosen)
            nxt = int(pool[rng.integers(0, len(pool))]) if len(pool) else int(rng.integers(0, n))
        else:
            nxt = int(rng.choice(n, p=dist_sq / total))
        centroids[i] = x[nxt]
        chosen[nxt] = True
        dist_sq = np.minimum(dist_sq, np.sum((x - centroids[i]) ** 2, axis=1))
    return centroids


def derive_competency_groups(
    embedding: SkillEmbedding, k: int, seed: int = 0, max_iter: int = 100
) -> CompetencyGroups:
    """K-means over skill embedding rows with k-means++ seeding.

    Converges when no assignment changes or after *max_iter* Lloyd steps;
    deterministic for a fixed seed.
    """
    x = embedding.vectors
    n = x.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds vocabulary size {n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x, k, rng)
    assignment = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        dists = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = np.argmin(dists, axis=1)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for g in range(k):
            mask = assignment == g
            if np.any(mask):
                centroids[g] = x[mask].mean(axis=0)
    return CompetencyGroups(k=k, assignment=assignment, centroids=centroids)


def _cosine_rows(embedding: SkillEmbedding, a: int, b: int) -> float:
    va, vb = embedding.vectors[a], embedding.vectors[b]
    na, nb = np.sqrt(va @ va), np.sqrt(vb @ vb)
    if na == 0.0 or nb == 0.0:
        return -1.0
    return float(va @ vb / (na * nb))


def expand_skills(
    skills: Iterable[str],
    groups: CompetencyGroups,
    embedding: SkillEmbedding,
    vocab: SkillVocabulary,
    m: int,
) -> set[str]:
    """Add each skill's *m* nearest same-group skills (by cosine).

    Output is always a superset of the input; raises on skills missing from
    the vocabulary.
    """
    normalized = _normalize_set(skills)
    for token in normalized:
        if token not in vocab:
            raise UnknownSkill(token)
    expanded = set(normalized)
    if m <= 0:
        return expanded
    for token in sorted(normalized):
        idx = vocab.index_of(token)
        group = groups.group_of(idx)
        mates = [int(j) for j in groups.members(group) if int(j) != idx]
        mates.sort(key=lambda j: (-_cosine_rows(embedding, idx, j), vocab.tokens[j]))
        expanded.update(vocab.tokens[j] for j in mates[:m])
    return expanded


def competency_similarity(
    candidate_skills: Iterable[str],
    job_skills: Iterable[str],
    groups: CompetencyGroups,
    vocab: SkillVocabulary,
    embedding: SkillEmbedding | None = None,
    expand_m: int = 0,
) -> float:
    """Jaccard similarity of the competency-group sets touched by each side.

    With *expand_m* > 0 both skill sets are expanded before mapping to
    groups, so near-miss skill matches still register.
    """
    cand = _normalize_set(candidate_skills)
    jobs = _normalize_set(job_skills)
    if not cand or not jobs:
        raise EmptySkillSet("competency similarity requires non-empty skill sets")
    if expand_m > 0 and embedding is not None:
        cand = expand_skills(cand, groups, embedding, vocab, expand_m)
        jobs = expand_skills(jobs, groups, embedding, vocab, expand_m)
    else:
        for token in cand | jobs:
            if token not in vocab:
                raise UnknownSkill(token)
    groups_a = {groups.group_of(vocab.index_of(t)) for t in cand}
    groups_b = {groups.group_of(vocab.index_of(t)) for t in jobs}
    union = groups_a | groups_b
    if not union:
        return 0.0
    return len(groups_a & groups_b) / len(union)


# -- feature vectors -----------------------------------------------------------

@dataclass(frozen=True)
class FeatureLayout:
    """Named segment descriptor for entity feature vectors.

    Layout: [skill centroid (d)] [experience (1)] [industry hash (w)]
    [location-or-title hash (w)] [organization hash (w)].
    """

    embed_dim: int
    hash_width: int = 16
    experience_cap: float = 40.0

    @property
    def length(self) -> int:
        return self.embed_dim + 1 + 3 * self.hash_width

    @property
    def skill_slice(self) -> slice:
        return slice(0, self.embed_dim)

    @property
    def experience_index(self) -> int:
        return self.embed_dim

    def hash_slice(self, segment: int) -> slice:
        start = self.embed_dim + 1 + segment * self.hash_width
        return slice(start, start + self.hash_width)

    def to_dict(self) -> dict:
        return {
            "embed_dim": self.embed_dim,
            "hash_width": self.hash_width,
            "experience_cap": self.experience_cap,
        }


def hash_bucket(token: str, width: int) -> int:
    """Stable (run-independent) hash bucket for a categorical token."""
    digest = hashlib.md5(token.encode("utf-8")).hexdigest()
    return int(digest, 16) % width


def _skill_centroid(
    skills: Iterable[str], embedding: SkillEmbedding, vocab: SkillVocabulary
) -> tuple[np.ndarray, int]:
    """Mean embedding row over the known skills; also reports dropped count."""
    normalized = _normalize_set(skills)
    idx = vocab.known_indices(normalized)
    dropped = len(normalized) - len(idx)
    if not idx:
        raise AllSkillsUnknown(f"no known skills among {sorted(normalized)!r}")
    return embedding.vectors[idx].mean(axis=0), dropped


def _vectorize(
    skills: Iterable[str],
    experience: float,
    categoricals: tuple[str, str, str],
    embedding: SkillEmbedding,
    vocab: SkillVocabulary,
    layout: FeatureLayout,
) -> np.ndarray:
    centroid, dropped = _skill_centroid(skills, embedding, vocab)
    if dropped:
        logger.warning("dropped %d unknown skill(s) while vectorizing", dropped)
    vec = np.zeros(layout.length, dtype=np.float64)
    vec[layout.skill_slice] = centroid
    vec[layout.experience_index] = min(max(experience, 0.0), layout.experience_cap) / layout.experience_cap
    for seg, token in enumerate(categoricals):
        if token:
            vec[layout.hash_slice(seg).start + hash_bucket(token, layout.hash_width)] = 1.0
    return vec


def vectorize_candidate(
    snapshot: Candidate | CandidateSnapshot,
    embedding: SkillEmbedding,
    vocab: SkillVocabulary,
    layout: FeatureLayout,
) -> np.ndarray:
    return _vectorize(
        snapshot.skills,
        snapshot.experience_years,
        (snapshot.industry, snapshot.location, snapshot.organization_id),
        embedding, vocab, layout,
    )


def vectorize_job(
    job: Job,
    embedding: SkillEmbedding,
    vocab: SkillVocabulary,
    layout: FeatureLayout,
) -> np.ndarray:
    midpoint = (job.min_experience + job.max_experience) / 2.0
    return _vectorize(
        job.required_skills,
        midpoint,
        (job.industry, job.title, job.organization_id),
        embedding, vocab, layout,
    )


# -- facade --------------------------------------------------------------------

CHECKPOINT_VERSION = 1


@dataclass
class Featurizer:
    """Bundles vocabulary, embedding, competency groups and vector layout.

    Built once from a dataset and then immutable; every method is a pure
    read-only computation, safe for concurrent use.
    """

    vocab: SkillVocabulary
    embedding: SkillEmbedding
    groups: CompetencyGroups
    layout: FeatureLayout
    expand_m: int = 2
    append_competency_feature: bool = True
    expand_for_vectors: bool = False
    seed: int = 0

    def _maybe_expand(self, skills: Iterable[str]) -> set[str]:
        known = {t for t in _normalize_set(skills) if t in self.vocab}
        if self.expand_for_vectors and self.expand_m > 0 and known:
            return expand_skills(known, self.groups, self.embedding, self.vocab, self.expand_m)
        return known if known else _normalize_set(skills)

    def vectorize_candidate(self, snapshot: Candidate | CandidateSnapshot) -> np.ndarray:
        return _vectorize(
            self._maybe_expand(snapshot.skills),
            snapshot.experience_years,
            (snapshot.industry, snapshot.location, snapshot.organization_id),
            self.embedding, self.vocab, self.layout,
        )

    def vectorize_job(self, job: Job) -> np.ndarray:
        midpoint = (job.min_experience + job.max_experience) / 2.0
        return _vectorize(
            self._maybe_expand(job.required_skills),
            midpoint,
            (job.industry, job.title, job.organization_id),
            self.embedding, self.vocab, self.layout,
        )

    def competency(self, candidate_skills: Iterable[str], job_skills: Iterable[str]) -> float:
        """Competency-group similarity with unknown skills dropped; 0.0 when
        either side has no known skills."""
        cand = {t for t in _normalize_set(candidate_skills) if t in self.vocab}
        jobs = {t for t in _normalize_set(job_skills) if t in self.vocab}
        if not cand or not jobs:
            return 0.0
        return competency_similarity(
            cand, jobs, self.groups, self.vocab, self.embedding, self.expand_m
        )

    def skill_centroid(self, skills: Iterable[str]) -> np.ndarray:
        """Mean skill embedding; zero vector when nothing is known."""
        idx = self.vocab.known_indices(skills)
        if not idx:
            return np.zeros(self.embedding.d, dtype=np.float64)
        return self.embedding.vectors[idx].mean(axis=0)

    @property
    def pair_width(self) -> int:
        width = 2 * self.layout.length
        return width + 1 if self.append_competency_feature else width

    def pair_vector(self, snapshot: Candidate | CandidateSnapshot, job: Job) -> np.ndarray:
        """Concatenated (candidate, job) features for one model timestep."""
        cand = self.vectorize_candidate(snapshot)
        jobv = self.vectorize_job(job)
        if self.append_competency_feature:
            comp = self.competency(snapshot.skills, job.required_skills)
            return np.concatenate([cand, jobv, [comp]])
        return np.concatenate([cand, jobv])

    def save(self, path: str) -> None:
        meta = {
            "kind": "featurizer",
            "version": CHECKPOINT_VERSION,
            "vocabulary": list(self.vocab.tokens),
            "embed_dim": self.embedding.d,
            "k": self.groups.k,
            "layout": self.layout.to_dict(),
            "expand_m": self.expand_m,
            "append_competency_feature": self.append_competency_feature,
            "expand_for_vectors": self.expand_for_vectors,
            "seed": self.seed,
        }
        arrays = {
            "embedding": self.embedding.vectors,
            "assignment": self.groups.assignment,
            "centroids": self.groups.centroids,
        }
        ioformat.save_arrays(path, meta, arrays)

    @classmethod
    def load(cls, path: str) -> "Featurizer":
        meta, arrays = ioformat.load_arrays(path)
        if meta.get("kind") != "featurizer":
            raise ValueError(f"{path}: not a featurizer checkpoint")
        layout = FeatureLayout(**meta["layout"])
        return cls(
            vocab=SkillVocabulary(tokens=tuple(meta["vocabulary"])),
            embedding=SkillEmbedding(vectors=arrays["embedding"]),
            groups=CompetencyGroups(
                k=int(meta["k"]),
                assignment=arrays["assignment"],
                centroids=arrays["centroids"],
            ),
            layout=layout,
            expand_m=int(meta["expand_m"]),
            append_competency_feature=bool(meta["append_competency_feature"]),
            expand_for_vectors=bool(meta["expand_for_vectors"]),
            seed=int(meta["seed"]),
        )


def build_featurizer(
    dataset: Dataset,
    embed_dim: int = 64,
    competency_k: int = 32,
    expand_m: int = 2,
    hash_width: int = 16,
    experience_cap: float = 40.0,
    append_competency_feature: bool = True,
    expand_for_vectors: bool = False,
    seed: int = 0,
) -> Featurizer:
    """Build vocabulary, embedding, groups and layout from a dataset.

    Dimensions are clamped to the vocabulary size so small datasets still
    featurize.
    """
    vocab = build_vocabulary(dataset)
    counts = build_cooccurrence(dataset, vocab)
    d = max(2, min(embed_dim, vocab.size))
    if d != embed_dim:
        logger.warning("embed_dim clamped from %d to %d (|V|=%d)", embed_dim, d, vocab.size)
    embedding = embed_skills(counts, d, seed=seed)
    k = min(competency_k, vocab.size)
    if k != competency_k:
        logger.warning("competency_k clamped from %d to %d", competency_k, k)
    groups = derive_competency_groups(embedding, k, seed=seed)
    layout = FeatureLayout(embed_dim=d, hash_width=hash_width, experience_cap=experience_cap)
    return Featurizer(
        vocab=vocab, embedding=embedding, groups=groups, layout=layout,
        expand_m=expand_m,
        append_competency_feature=append_competency_feature,
        expand_for_vectors=expand_for_vectors,
        seed=seed,
    )
