"""Rank statistics: average-tie ranks and Spearman correlation."""

from __future__ import annotations

import numpy as np

from ..errors import LengthMismatchError


def rankdata(a: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged (the standard Spearman convention)."""
    a = np.asarray(a, dtype=np.float64)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size, dtype=np.float64)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        # average of ranks i+1 .. j+1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt((ac * ac).sum() * (bc * bc).sum())
    if denom == 0.0:
        return 0.0
    return float(np.clip((ac * bc).sum() / denom, -1.0, 1.0))


def spearman_checked(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Spearman rho plus a degeneracy flag.

    Constant input returns (0.0, True) instead of raising: bootstrap splits
    can produce constant slices and the harness must keep running.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatchError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 1 or a.size < 3:
        raise LengthMismatchError("spearman needs 1-D vectors of length >= 3")
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return 0.0, True
    return pearson(rankdata(a), rankdata(b)), False


def spearman(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation in [-1, 1]; 0.0 on degenerate input."""
    rho, _ = spearman_checked(a, b)
    return rho
