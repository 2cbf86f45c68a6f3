"""Cosine similarity and thresholded nearest-neighbor retrieval.

Retrieval is an exact scan over the (pre-filtered, therefore small) pool;
norms are precomputed once per index.  Scores use the same floating-point
expression as the scalar :func:`cosine`, so indexed retrieval matches a
brute-force all-pairs scan bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from jobrec.errors import LengthMismatch, UnknownCandidate, UnknownJob, ZeroVector

logger = logging.getLogger(__name__)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"vector lengths differ: {a.shape} vs {b.shape}")
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class NeighborEntry:
    id: str
    score: float


@dataclass(frozen=True)
class NeighborList:
    query_id: str
    threshold: float
    entries: tuple[NeighborEntry, ...]

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.entries]


class SimilarityIndex:
    """Immutable id -> vector index with precomputed norms.

    Zero vectors are excluded at build time with a warning rather than
    failing whole requests; they can neither query nor be retrieved.
    """

    def __init__(self, vectors: Mapping[str, np.ndarray]) -> None:
        self._vectors: dict[str, np.ndarray] = {}
        self._norms: dict[str, float] = {}
        skipped = 0
        for key, vec in vectors.items():
            vec = np.asarray(vec, dtype=np.float64)
            norm = float(np.sqrt(vec @ vec))
            if norm == 0.0:
                skipped += 1
                continue
            self._vectors[key] = vec
            self._norms[key] = norm
        if skipped:
            logger.warning("similarity index skipped %d zero vector(s)", skipped)

    def __contains__(self, key: str) -> bool:
        return key in self._vectors

    def vector(self, key: str) -> np.ndarray:
        return self._vectors[key]

    def query(self, query_id: str, pool: Iterable[str], threshold: float) -> NeighborList:
        """All pool members with cosine >= *threshold*, excluding the query,
        sorted by score descending with id-ascending tie-break."""
        if query_id not in self._vectors:
            raise KeyError(query_id)
        q = self._vectors[query_id]
        qn = self._norms[query_id]
        kept: list[NeighborEntry] = []
        for other in pool:
            if other == query_id or other not in self._vectors:
                continue
            v = self._vectors[other]
            score = float(np.clip(q @ v / (qn * self._norms[other]), -1.0, 1.0))
            if score >= threshold:
                kept.append(NeighborEntry(id=other, score=score))
        kept.sort(key=lambda e: (-e.score, e.id))
        return NeighborList(query_id=query_id, threshold=threshold, entries=tuple(kept))


def similar_jobs(
    query_job_id: str,
    pool: Iterable[str],
    index: SimilarityIndex,
    threshold: float = 0.70,
) -> NeighborList:
    """Jobs in the pool at least *threshold*-cosine-similar to the query job."""
    if query_job_id not in index:
        raise UnknownJob(query_job_id)
    return index.query(query_job_id, pool, threshold)


def similar_candidates(
    query_candidate_id: str,
    pool: Iterable[str],
    index: SimilarityIndex,
    threshold: float = 0.80,
) -> NeighborList:
    """Candidates in the pool at least *threshold*-similar to the query."""
    if query_candidate_id not in index:
        raise UnknownCandidate(query_candidate_id)
    return index.query(query_candidate_id, pool, threshold)
