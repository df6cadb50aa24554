"""2-D views of a run history via classical (Torgerson) MDS.

The whole history — every sampled generation's population, in either the
search space (decision vectors) or the objective space — is pooled into
one point multiset, its squared Euclidean distance matrix is
double-centred into a Gram matrix, and the top two eigenpairs give
coordinates that preserve pairwise distances as well as any planar
layout can.  Each embedded point keeps its provenance (generation,
member index) so downstream consumers can colour by generation or by
exploration score.

Histories are subsampled by a generation stride before embedding: the
distance matrix is O(n²) in memory, so the point count is capped
(default 10 000) by taking every s-th generation with the smallest
stride s that fits, always keeping the final generation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse.linalg import eigsh
from scipy.spatial.distance import pdist, squareform

from .core import ContractError, RunHistory

__all__ = [
    "EmbeddingSpace",
    "as_space",
    "HistorySample",
    "Embedding",
    "concatenate",
    "pairwise_sq_distances",
    "classical_mds",
    "embed_history",
    "DEFAULT_MAX_POINTS",
]

DEFAULT_MAX_POINTS = 10_000

# Above this size a full eigendecomposition is wasteful; switch to a
# Lanczos solve for just the top two eigenpairs.
_DENSE_EIG_LIMIT = 600


class EmbeddingSpace(enum.Enum):
    """Which vectors of a history get embedded: decision or objective."""

    SEARCH = "search"
    OBJECTIVE = "objective"

    def __str__(self) -> str:
        return self.value


def as_space(space) -> EmbeddingSpace:
    """Coerce a string tag or EmbeddingSpace value to EmbeddingSpace."""
    if isinstance(space, EmbeddingSpace):
        return space
    try:
        return EmbeddingSpace(str(space))
    except ValueError:
        raise ContractError(
            f"unknown space {space!r}; expected 'search' or 'objective'"
        ) from None


class HistorySample(NamedTuple):
    """Pooled vectors from strided generations, with per-row provenance."""

    vectors: np.ndarray       # (n, dim)
    generation: np.ndarray    # (n,) generation index of each row
    member_index: np.ndarray  # (n,) position within its generation
    stride: int


def sampled_generations(n_generations: int, population_size: int, max_points: int) -> tuple[list[int], int]:
    """Generation indices kept under the point cap, plus the stride used.

    The stride s is the smallest integer with ceil(n_gen / s) whole
    generations fitting in ``max_points``; sampling starts at generation 0
    and the final generation is always substituted in as the last sample.
    """
    if max_points < 2 * population_size:
        raise ContractError(
            f"max_points {max_points} must allow at least two generations "
            f"of {population_size}"
        )
    cap = max_points // population_size
    stride = -(-n_generations // cap)
    count = -(-n_generations // stride)
    picks = [k * stride for k in range(count - 1)]
    picks.append(n_generations - 1)
    return picks, stride


def concatenate(history: RunHistory, space, max_points: int = DEFAULT_MAX_POINTS) -> HistorySample:
    """Pool the (strided) history into one matrix of vectors with provenance."""
    space = as_space(space)
    picks, stride = sampled_generations(history.n_generations, history.population_size, max_points)
    blocks = []
    gens = []
    idxs = []
    for t in picks:
        rec = history.generations[t]
        blocks.append(rec.x if space is EmbeddingSpace.SEARCH else rec.y)
        gens.append(np.full(rec.size, t, dtype=np.int64))
        idxs.append(np.arange(rec.size, dtype=np.int64))
    return HistorySample(
        vectors=np.vstack(blocks),
        generation=np.concatenate(gens),
        member_index=np.concatenate(idxs),
        stride=stride,
    )


def pairwise_sq_distances(vectors) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances between rows."""
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ContractError("pairwise distances need a non-empty (n, dim) matrix")
    return squareform(pdist(v, "sqeuclidean"))


def classical_mds(sq_dist) -> tuple[np.ndarray, tuple[float, float], bool]:
    """Torgerson MDS of a squared-distance matrix down to two coordinates.

    Double-centres D² into the Gram matrix B = -(1/2)·J·D²·J, takes the
    two algebraically largest eigenpairs, and scales each eigenvector by
    the square root of its (non-negative part of the) eigenvalue.  The
    reflection ambiguity is fixed by making each eigenvector's
    largest-magnitude entry positive (earliest such entry on ties).

    Returns (coords, (λ₁, λ₂), degenerate); when all points coincide
    (λ₁ ≈ 0) the coordinates are all zero and the flag is set.
    """
    d2 = np.array(sq_dist, dtype=float)
    if d2.ndim != 2 or d2.shape[0] != d2.shape[1]:
        raise ContractError(f"squared-distance matrix must be square, got shape {d2.shape}")
    n = d2.shape[0]
    if n < 2:
        raise ContractError("classical MDS needs at least two points")
    if not np.isfinite(d2).all() or (d2 < 0).any():
        raise ContractError("squared distances must be finite and non-negative")
    if np.abs(np.diagonal(d2)).max() > 1e-9 * max(1.0, d2.max()):
        raise ContractError("squared-distance matrix must have a zero diagonal")

    # B = -0.5 * J D² J via the centring identity, computed in place so
    # only one n×n buffer is ever live.
    row_means = d2.mean(axis=1)
    grand_mean = row_means.mean()
    d2 -= row_means[:, None]
    d2 -= row_means[None, :]
    d2 += grand_mean
    d2 *= -0.5
    b = d2

    if n <= _DENSE_EIG_LIMIT:
        values, vectors = np.linalg.eigh(b)
        order = np.argsort(values)[::-1][:2]
        values, vectors = values[order], vectors[:, order]
    else:
        # A fixed Lanczos start vector keeps the result reproducible; the
        # all-ones direction is in B's null space, so use a seeded draw.
        v0 = np.random.Generator(np.random.PCG64(0)).standard_normal(n)
        values, vectors = eigsh(b, k=2, which="LA", v0=v0)
        order = np.argsort(values)[::-1]
        values, vectors = values[order], vectors[:, order]

    lam1, lam2 = float(values[0]), float(values[1])
    tol = 1e-12 * max(1.0, float(np.abs(b).max()))
    if lam1 <= tol:
        return np.zeros((n, 2)), (lam1, lam2), True

    coords = np.empty((n, 2))
    for k, lam in enumerate((lam1, lam2)):
        v = vectors[:, k]
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        coords[:, k] = v * np.sqrt(max(lam, 0.0))
    return coords, (lam1, lam2), False


@dataclass(frozen=True)
class Embedding:
    """A 2-D MDS layout of a sampled history, with per-point provenance.

    ``eigenvalues`` is None for embeddings re-read from disk, where only
    the coordinates survive.
    """

    space: EmbeddingSpace
    e1: np.ndarray
    e2: np.ndarray
    generation: np.ndarray
    member_index: np.ndarray
    stride: int
    eigenvalues: tuple[float, float] | None = None
    degenerate: bool = False

    def __post_init__(self):
        e1 = np.array(self.e1, dtype=float)
        e2 = np.array(self.e2, dtype=float)
        gen = np.array(self.generation, dtype=np.int64)
        idx = np.array(self.member_index, dtype=np.int64)
        n = e1.shape[0]
        if not (e1.shape == e2.shape == gen.shape == idx.shape) or e1.ndim != 1 or n == 0:
            raise ContractError("embedding columns must be non-empty and equal-length")
        if self.stride < 1:
            raise ContractError(f"stride must be positive, got {self.stride}")
        if self.eigenvalues is not None and not self.degenerate:
            lam1, lam2 = self.eigenvalues
            if lam2 > lam1 or lam2 < -1e-8 * lam1:
                raise ContractError(f"eigenvalues out of order or too negative: {self.eigenvalues}")
            scale = max(1.0, float(np.abs(e1).max()), float(np.abs(e2).max()))
            if abs(e1.mean()) > 1e-9 * scale or abs(e2.mean()) > 1e-9 * scale:
                raise ContractError("embedded coordinates must be mean-centred")
        for arr in (e1, e2, gen, idx):
            arr.flags.writeable = False
        object.__setattr__(self, "space", as_space(self.space))
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "generation", gen)
        object.__setattr__(self, "member_index", idx)

    @property
    def n_points(self) -> int:
        return self.e1.shape[0]


def embed_history(history: RunHistory, space, max_points: int = DEFAULT_MAX_POINTS) -> Embedding:
    """Sample, pool, and MDS-embed a run history in the chosen space."""
    space = as_space(space)
    sample = concatenate(history, space, max_points)
    coords, eigenvalues, degenerate = classical_mds(pairwise_sq_distances(sample.vectors))
    return Embedding(
        space=space,
        e1=coords[:, 0],
        e2=coords[:, 1],
        generation=sample.generation,
        member_index=sample.member_index,
        stride=sample.stride,
        eigenvalues=eigenvalues,
        degenerate=degenerate,
    )
