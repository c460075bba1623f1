"""Codebooks and the quantization double bind.

Uniform and learned (k-means) codebooks, reconstruction error,
perturbation re-encoding, boundary-crossing estimation, the 1/log K
distortion fit, and Shannon rate-distortion reference curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core.embedding import EmbeddingMatrix
from .core.rng import SeedSpec, rng_create
from .core.sequence import SymbolSequence, bins_alphabet
from .errors import BadSymbolError, DataError, SingularFitError, TooFewPointsError
from .procrustes import procrustes_align

KMEANS_MAX_ITER = 300
KMEANS_REL_TOL = 1e-6


@dataclass(frozen=True)
class Codebook:
    """K centroids defining a nearest-neighbour (Voronoi) tokenizer."""

    centroids: np.ndarray          # K x m
    method: str                    # uniform | kmeans
    inertia: float = 0.0
    inertia_trace: tuple = field(default=(), compare=False)

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 2:
            raise DataError("codebook needs at least 2 centroids")
        if not np.isfinite(c).all():
            raise DataError("centroids must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


def uniform_codebook(lo: np.ndarray, hi: np.ndarray, k: int) -> Codebook:
    """Bin-center grid along each channel (the uniform-binning baseline)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    centers = lo + (np.arange(k)[:, None] + 0.5) / k * (hi - lo)
    return Codebook(centers, "uniform")


def _as_points(data) -> np.ndarray:
    arr = data.data if isinstance(data, EmbeddingMatrix) else np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||p - c||^2 expanded; clamp tiny negatives from cancellation
    d2 = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    d2 = _sq_distances(points, centroids[:1]).ravel()
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = points[rng.integers(n)]
        else:
            centroids[j] = points[np.searchsorted(np.cumsum(d2 / total), rng.random())]
        d2 = np.minimum(d2, _sq_distances(points, centroids[j : j + 1]).ravel())
    return centroids


def kmeans_fit(
    data,
    k: int,
    seed: SeedSpec | int = SeedSpec(),
    init_centroids: np.ndarray | None = None,
) -> Codebook:
    """Lloyd's algorithm with k-means++ initialization.

    Iterates until the relative inertia change drops below 1e-6 or 300
    iterations.  Empty clusters are re-seeded to the point farthest from its
    assigned centroid, keeping the fit deterministic.  ``init_centroids``
    seeds the fit from an existing codebook (extra slots drawn k-means++
    style), which is how nested sweeps keep reconstruction error monotone.
    """
    points = _as_points(data)
    n = points.shape[0]
    if n < k:
        raise TooFewPointsError(f"n={n} < K={k}")
    rng = rng_create(seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed)))
    if init_centroids is not None:
        prev = np.asarray(init_centroids, dtype=np.float64)
        if prev.shape[0] >= k:
            centroids = prev[:k].copy()
        else:
            centroids = np.vstack([prev, _kmeans_pp_init(points, k - prev.shape[0], rng)])
    else:
        centroids = _kmeans_pp_init(points, k, rng)

    def exact_inertia(assign: np.ndarray) -> float:
        # direct residuals: no cancellation when a point sits on its centroid
        resid = points - centroids[assign]
        return float((resid * resid).sum())

    trace = []
    prev_inertia = np.inf
    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_distances(points, centroids)
        assign = np.argmin(d2, axis=1)
        inertia = exact_inertia(assign)
        trace.append(inertia)
        for j in range(k):
            mask = assign == j
            if mask.any():
                centroids[j] = points[mask].mean(axis=0)
            else:
                far = int(np.argmax(d2[np.arange(n), assign]))
                centroids[j] = points[far]
                assign[far] = j
        if prev_inertia < np.inf and prev_inertia > 0:
            if abs(prev_inertia - inertia) / prev_inertia < KMEANS_REL_TOL:
                break
        elif inertia == 0.0:
            break
        prev_inertia = inertia
    d2 = _sq_distances(points, centroids)
    final = exact_inertia(np.argmin(d2, axis=1))
    trace.append(final)
    return Codebook(centroids, "kmeans", final, tuple(trace))


def encode(codebook: Codebook, points) -> SymbolSequence:
    """Nearest-centroid assignment; ties go to the lowest index."""
    pts = _as_points(points)
    if pts.shape[1] != codebook.dim:
        raise DataError("point dimension does not match codebook")
    assign = np.argmin(_sq_distances(pts, codebook.centroids), axis=1)
    return SymbolSequence(assign, bins_alphabet(codebook.k))


def decode(codebook: Codebook, symbols: SymbolSequence | np.ndarray) -> np.ndarray:
    idx = symbols.symbols if isinstance(symbols, SymbolSequence) else np.asarray(symbols)
    if idx.size and (idx.min() < 0 or idx.max() >= codebook.k):
        raise BadSymbolError("symbol outside codebook range")
    return codebook.centroids[idx]


def reconstruction_mse(codebook: Codebook, data) -> float:
    pts = _as_points(data)
    recon = decode(codebook, encode(codebook, pts))
    return float(((pts - recon) ** 2).mean())


def boundary_crossing_rate(
    codebook: Codebook,
    data,
    sigma: float,
    seed: SeedSpec | int = SeedSpec(),
    trials: int = 8,
) -> float:
    """Monte-Carlo probability that a Gaussian-perturbed point re-encodes
    to a different symbol.  Denser Voronoi boundaries (larger K) raise it."""
    if sigma <= 0:
        raise DataError("sigma must be positive")
    pts = _as_points(data)
    rng = rng_create(seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed)))
    base = encode(codebook, pts).symbols
    crossed = 0
    for _ in range(trials):
        noisy = pts + sigma * rng.standard_normal(pts.shape)
        crossed += int((encode(codebook, noisy).symbols != base).sum())
    return crossed / (trials * pts.shape[0])


def fit_inverse_log(k_values, d_values) -> tuple[float, float, float]:
    """OLS of distortion on 1/ln K.  Returns (intercept, slope, r^2)."""
    k = np.asarray(k_values, dtype=np.float64)
    d = np.asarray(d_values, dtype=np.float64)
    if np.unique(k).size < 3:
        raise SingularFitError("need >= 3 distinct K values")
    x = 1.0 / np.log(k)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, d, rcond=None)
    resid = d - design @ coef
    ss_res = float((resid * resid).sum())
    ss_tot = float(((d - d.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise SingularFitError("distortion values are constant")
    r2 = 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def rd_bound(sigma2: float, d_m: float, rate_bits: float) -> float:
    """Shannon minimum distortion at rate R for a Gaussian source:
    D(R) = sigma^2 * 2^(-2R/d_M)."""
    if sigma2 <= 0 or d_m <= 0 or rate_bits < 0:
        raise DataError("need sigma2>0, d_M>0, R>=0")
    return sigma2 * 2.0 ** (-2.0 * rate_bits / d_m)


def rd_bound_codebook(sigma2: float, d_m: float, k: int) -> float:
    """Same bound at the discrete capacity R = log2 K, i.e. D ~ K^(-2/d_M)."""
    return rd_bound(sigma2, d_m, np.log2(k))


def save_codebook(codebook: Codebook, path) -> None:
    """EMB1 centroid matrix plus a flat key=value method sidecar."""
    from pathlib import Path

    from .core.io import write_embeddings

    path = Path(path)
    write_embeddings(path, EmbeddingMatrix(codebook.centroids))
    sidecar = path.with_suffix(path.suffix + ".meta")
    sidecar.write_text(
        f"method = {codebook.method}\nk = {codebook.k}\ninertia = {codebook.inertia!r}\n"
    )


def load_codebook(path) -> Codebook:
    from pathlib import Path

    from .core.io import read_embeddings
    from .ingest.config import Config

    path = Path(path)
    centroids = read_embeddings(path).data
    sidecar = path.with_suffix(path.suffix + ".meta")
    method, inertia = "kmeans", 0.0
    if sidecar.exists():
        meta = Config.load(sidecar)
        method = meta.get("method", "kmeans")
        inertia = meta.get_float("inertia", 0.0)
    return Codebook(centroids, method, inertia)


@dataclass(frozen=True)
class RDCurve:
    """Codebook sweep rows plus the 1/ln K distortion fit."""

    k_values: tuple
    recon_mse: tuple
    procrustes_d: tuple
    fit_intercept: float
    fit_slope: float
    fit_r2: float

    def rows(self):
        return list(zip(self.k_values, self.recon_mse, self.procrustes_d))


def vq_double_bind_sweep(
    data,
    k_values=(32, 64, 128, 256, 512, 1024),
    sigma: float = 0.05,
    seed: SeedSpec | int = SeedSpec(),
    nested: bool = True,
) -> RDCurve:
    """Fit codebooks across K, measuring reconstruction MSE against
    perturbation-induced geometric distortion.

    Perturbations are applied in continuous input space and re-encoded
    (never in symbol index space); distortion is the Procrustes residual
    between the decoded clean and decoded perturbed point sets.
    """
    pts = _as_points(data)
    spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rng = rng_create(spec.derive("sweep-noise"))
    noisy = pts + sigma * rng.standard_normal(pts.shape)
    mses, dists = [], []
    prev = None
    for i, k in enumerate(sorted(k_values)):
        cb = kmeans_fit(pts, k, spec.derive(f"k{k}"), init_centroids=prev if nested else None)
        prev = cb.centroids
        mses.append(reconstruction_mse(cb, pts))
        clean_dec = decode(cb, encode(cb, pts))
        pert_dec = decode(cb, encode(cb, noisy))
        res = procrustes_align(clean_dec, pert_dec)
        dists.append(res.aligned_error)
    a, b, r2 = fit_inverse_log(sorted(k_values), dists)
    return RDCurve(tuple(sorted(k_values)), tuple(mses), tuple(dists), a, b, r2)
