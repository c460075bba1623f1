"""Embedding matrices and pairwise dissimilarity matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, ZeroNormRowError

ZERO_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class EmbeddingMatrix:
    """An n x d matrix of sample embeddings, float64 internally.

    File formats may store float32 but all arithmetic runs in 64 bits so
    that residual comparisons at the 1e-3 scale are not polluted by
    accumulation error.
    """

    data: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError("embedding matrix must be 2-D with n,d >= 1")
        if not np.isfinite(arr).all():
            raise DataError("embedding matrix contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (arr.shape[0],):
                raise DataError("labels length must equal sample count")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def take(self, rows: np.ndarray) -> "EmbeddingMatrix":
        lab = None if self.labels is None else self.labels[rows]
        return EmbeddingMatrix(self.data[rows], lab)


@dataclass(frozen=True)
class DistanceMatrix:
    """Condensed pairwise distances: upper triangle of a symmetric matrix."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        expect = self.n * (self.n - 1) // 2
        if vals.shape != (expect,):
            raise DataError(f"expected {expect} condensed entries, got {vals.shape}")
        if not np.isfinite(vals).all() or (vals < 0).any():
            raise DataError("distances must be finite and nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def entry(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        i, j = (i, j) if i < j else (j, i)
        # index of (i, j) in row-major upper triangle, diagonal excluded
        return float(self.values[i * self.n - i * (i + 1) // 2 + (j - i - 1)])

    def full(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, k=1)
        out[iu] = self.values
        return out + out.T

    def vector(self) -> np.ndarray:
        return self.values


def cosine_rdm(x: EmbeddingMatrix | np.ndarray) -> DistanceMatrix:
    """Pairwise cosine-distance dissimilarity matrix, entries in [0, 2].

    entry(i, j) = 1 - <x_i, x_j> / (|x_i| |x_j|).  Raises
    ``ZeroNormRowError`` on rows with norm below 1e-300.
    """
    data = x.data if isinstance(x, EmbeddingMatrix) else np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(data, axis=1)
    bad = np.nonzero(norms < ZERO_NORM_FLOOR)[0]
    if bad.size:
        raise ZeroNormRowError(int(bad[0]))
    unit = data / norms[:, None]
    sim = unit @ unit.T
    np.clip(sim, -1.0, 1.0, out=sim)
    n = data.shape[0]
    iu = np.triu_indices(n, k=1)
    return DistanceMatrix(n, 1.0 - sim[iu])


def cross_distance_block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine distances from each row of ``a`` to each row of ``b`` (m x n)."""
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    for norms in (na, nb):
        bad = np.nonzero(norms < ZERO_NORM_FLOOR)[0]
        if bad.size:
            raise ZeroNormRowError(int(bad[0]))
    sim = (a / na[:, None]) @ (b / nb[:, None]).T
    np.clip(sim, -1.0, 1.0, out=sim)
    return 1.0 - sim
