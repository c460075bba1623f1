"""The geometric stability harness.

Four core metrics over clean/perturbed embedding pairs: RDM similarity
(clean vs perturbed), plus three internal-consistency scores of the clean
matrix (sample split, feature split, anchor stability).  The composite is
their four-way mean.  Perturbation stability and perturbation magnitude
are reported alongside but excluded from the composite.

Evaluation subsamples to ``max_samples`` (stratified by label when
present), runs ``n_bootstrap`` stratified resampling rounds, and reports
bootstrap means with full provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core.embedding import EmbeddingMatrix, cosine_rdm, cross_distance_block
from .core.rng import SeedSpec, rng_create
from .core.stats import rankdata, spearman_checked
from .errors import (
    LengthMismatchError,
    ShapeMismatchError,
    TooFewFeaturesError,
    TooFewSamplesError,
)

CORE_METRICS = ("rdm_similarity", "sample_split", "feature_split", "anchor_stability")


@dataclass(frozen=True)
class SplitConfig:
    """Harness knobs: 30 splits, 2500-sample cap, 5 bootstrap replicates."""

    n_splits: int = 30
    max_samples: int = 2500
    n_bootstrap: int = 5
    anchor_count: int | None = None      # default min(50, n // 10)
    rank_normalize_anchors: bool = False
    composite_variant: str = "anchor"    # anchor | perturbation

    def __post_init__(self):
        if self.n_splits < 1:
            raise ValueError("n_splits must be >= 1")
        if self.max_samples < 10:
            raise ValueError("max_samples must be >= 10")
        if self.composite_variant not in ("anchor", "perturbation"):
            raise ValueError("composite_variant must be 'anchor' or 'perturbation'")

    def anchors_for(self, n: int) -> int:
        if self.anchor_count is not None:
            return self.anchor_count
        return max(1, min(50, n // 10))


def rdm_similarity(x_clean, x_pert) -> float:
    """Spearman correlation between vectorized clean and perturbed RDMs."""
    xc = _as_matrix(x_clean)
    xp = _as_matrix(x_pert)
    if xc.n != xp.n:
        raise ShapeMismatchError("clean and perturbed sample counts differ")
    rho, _ = spearman_checked(cosine_rdm(xc).vector(), cosine_rdm(xp).vector())
    return rho


def _as_matrix(x) -> EmbeddingMatrix:
    return x if isinstance(x, EmbeddingMatrix) else EmbeddingMatrix(np.asarray(x))


def _disjoint_halves(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    # odd-sized sets drop the last shuffled element
    perm = rng.permutation(n)
    half = n // 2
    return perm[:half], perm[half : 2 * half]


def sample_split(
    x,
    cfg: SplitConfig = SplitConfig(),
    seed: SeedSpec | int = SeedSpec(),
    forced_splits=None,
) -> float:
    """Mean split-half agreement between RDMs of disjoint sample subsets.

    Each split correlates the vectorized RDM of one half against the other,
    pairing entries positionally.  ``forced_splits`` substitutes explicit
    (idx1, idx2) pairs for the random draws, which is how constructed
    correspondences (e.g. duplicated datasets) are tested.
    """
    xm = _as_matrix(x)
    if xm.n < 4:
        raise TooFewSamplesError("sample split needs n >= 4")
    rng = _rng(seed, "sample-split")
    scores = []
    for k in range(cfg.n_splits):
        if forced_splits is not None:
            idx1, idx2 = forced_splits[k % len(forced_splits)]
            idx1, idx2 = np.asarray(idx1), np.asarray(idx2)
        else:
            idx1, idx2 = _disjoint_halves(xm.n, rng)
        d1 = cosine_rdm(xm.data[idx1]).vector()
        d2 = cosine_rdm(xm.data[idx2]).vector()
        rho, _ = spearman_checked(d1, d2)
        scores.append(rho)
    return float(np.mean(scores))


def feature_split(
    x,
    cfg: SplitConfig = SplitConfig(),
    seed: SeedSpec | int = SeedSpec(),
    forced_splits=None,
) -> float:
    """Mean agreement between full-sample RDMs on disjoint feature halves."""
    xm = _as_matrix(x)
    if xm.d < 4:
        raise TooFewFeaturesError("feature split needs d >= 4")
    rng = _rng(seed, "feature-split")
    scores = []
    for k in range(cfg.n_splits):
        if forced_splits is not None:
            f1, f2 = forced_splits[k % len(forced_splits)]
            f1, f2 = np.asarray(f1), np.asarray(f2)
        else:
            f1, f2 = _disjoint_halves(xm.d, rng)
        d1 = cosine_rdm(xm.data[:, f1]).vector()
        d2 = cosine_rdm(xm.data[:, f2]).vector()
        rho, _ = spearman_checked(d1, d2)
        scores.append(rho)
    return float(np.mean(scores))


def anchor_stability(
    x,
    cfg: SplitConfig = SplitConfig(),
    seed: SeedSpec | int = SeedSpec(),
    forced_splits=None,
) -> float:
    """Consistency of anchor-to-subset distance profiles across resampling.

    Anchors are drawn once per evaluation; each split correlates the
    vectorized anchor-distance blocks of two disjoint non-anchor subsets
    (optionally rank-normalized row-wise).
    """
    xm = _as_matrix(x)
    m = cfg.anchors_for(xm.n)
    if xm.n < m + 4:
        raise TooFewSamplesError(f"anchor stability needs n >= anchors + 4 = {m + 4}")
    rng = _rng(seed, "anchor")
    anchor_idx = rng.choice(xm.n, size=m, replace=False)
    rest = np.setdiff1d(np.arange(xm.n), anchor_idx)
    anchors = xm.data[anchor_idx]
    scores = []
    for k in range(cfg.n_splits):
        if forced_splits is not None:
            s1, s2 = forced_splits[k % len(forced_splits)]
            s1, s2 = np.asarray(s1), np.asarray(s2)
        else:
            h1, h2 = _disjoint_halves(rest.size, rng)
            s1, s2 = rest[h1], rest[h2]
        b1 = cross_distance_block(anchors, xm.data[s1])
        b2 = cross_distance_block(anchors, xm.data[s2])
        if cfg.rank_normalize_anchors:
            b1 = np.vstack([rankdata(row) for row in b1])
            b2 = np.vstack([rankdata(row) for row in b2])
        rho, _ = spearman_checked(b1.ravel(), b2.ravel())
        scores.append(rho)
    return float(np.mean(scores))


def perturbation_stability(input_deltas, x_clean, x_pert) -> float:
    """Rank correlation between input perturbation magnitude and
    embedding-space displacement."""
    deltas = np.asarray(input_deltas, dtype=np.float64)
    xc = _as_matrix(x_clean)
    xp = _as_matrix(x_pert)
    if xc.data.shape != xp.data.shape:
        raise ShapeMismatchError("clean and perturbed shapes differ")
    if deltas.shape != (xc.n,):
        raise LengthMismatchError("one input delta per sample required")
    disp = np.linalg.norm(xc.data - xp.data, axis=1)
    rho, _ = spearman_checked(deltas, disp)
    return rho


def perturbation_magnitude(x_clean, x_pert) -> float:
    """Mean row-wise L2 displacement between clean and perturbed embeddings."""
    xc = _as_matrix(x_clean)
    xp = _as_matrix(x_pert)
    if xc.data.shape != xp.data.shape:
        raise ShapeMismatchError("clean and perturbed shapes differ")
    return float(np.linalg.norm(xc.data - xp.data, axis=1).mean())


def _rng(seed, tag: str) -> np.random.Generator:
    spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    return rng_create(spec.derive(tag))


@dataclass(frozen=True)
class StabilityReport:
    """Per-perturbation metric bundle with bootstrap statistics."""

    metrics: dict                      # metric -> bootstrap mean (or point value)
    bootstrap_std: dict
    composite: float
    provenance: dict = field(compare=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metrics": dict(self.metrics),
            "bootstrap_std": dict(self.bootstrap_std),
            "composite": self.composite,
            "provenance": dict(self.provenance),
        }


def _stratified_subsample(
    labels: np.ndarray | None, n: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Proportional allocation with largest-remainder rounding; uniform
    without labels.  Identity when n <= size."""
    if n <= size:
        return np.arange(n)
    if labels is None:
        return np.sort(rng.choice(n, size=size, replace=False))
    classes, counts = np.unique(labels, return_counts=True)
    exact = counts * (size / n)
    alloc = np.floor(exact).astype(np.int64)
    remainder = exact - alloc
    short = size - int(alloc.sum())
    for i in np.argsort(-remainder)[:short]:
        alloc[i] += 1
    picks = []
    for cls, take in zip(classes, alloc):
        idx = np.nonzero(labels == cls)[0]
        take = min(take, idx.size)
        if take:
            picks.append(rng.choice(idx, size=take, replace=False))
    return np.sort(np.concatenate(picks))


def _stratified_resample(labels: np.ndarray | None, n: int, rng: np.random.Generator) -> np.ndarray:
    """Same-size resample with replacement, per class when labels exist."""
    if labels is None:
        return rng.integers(0, n, size=n)
    out = []
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        out.append(idx[rng.integers(0, idx.size, size=idx.size)])
    return np.concatenate(out)


def evaluate(
    x_clean,
    x_pert,
    input_deltas=None,
    cfg: SplitConfig = SplitConfig(),
    seed: SeedSpec | int = SeedSpec(),
) -> StabilityReport:
    """Run the full harness on a clean/perturbed pair.

    Internal split metrics are computed on the clean matrix (they are
    perturbation-independent); RDM similarity and the perturbation metrics
    compare the pair.  Fixed seeds give byte-identical reports.
    """
    xc = _as_matrix(x_clean)
    xp = _as_matrix(x_pert)
    if xc.data.shape != xp.data.shape:
        raise ShapeMismatchError("clean and perturbed shapes differ")
    spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    sub_rng = rng_create(spec.derive("subsample"))
    keep = _stratified_subsample(xc.labels, xc.n, cfg.max_samples, sub_rng)
    xc = xc.take(keep)
    xp = xp.take(keep)
    deltas = None if input_deltas is None else np.asarray(input_deltas, dtype=np.float64)[keep]

    def one_round(rows: np.ndarray, tag: str) -> dict:
        c = xc.take(rows)
        p = xp.take(rows)
        rseed = spec.derive(tag)
        vals = {
            "rdm_similarity": rdm_similarity(c, p),
            "sample_split": sample_split(c, cfg, rseed),
            "feature_split": feature_split(c, cfg, rseed),
            "anchor_stability": anchor_stability(c, cfg, rseed),
            "perturbation_magnitude": perturbation_magnitude(c, p),
        }
        if deltas is not None:
            vals["perturbation_stability"] = perturbation_stability(deltas[rows], c, p)
        return vals

    identity = np.arange(xc.n)
    if cfg.n_bootstrap <= 1:
        rounds = [one_round(identity, "round0")]
    else:
        boot_rng = rng_create(spec.derive("bootstrap"))
        rounds = [
            one_round(_stratified_resample(xc.labels, xc.n, boot_rng), f"round{r}")
            for r in range(cfg.n_bootstrap)
        ]
    keys = rounds[0].keys()
    metrics = {k: float(np.mean([r[k] for r in rounds])) for k in keys}
    stds = {k: float(np.std([r[k] for r in rounds])) for k in keys}

    if cfg.composite_variant == "anchor":
        parts = CORE_METRICS
    else:
        # main-text variant: perturbation stability replaces anchor stability
        parts = ("rdm_similarity", "sample_split", "feature_split", "perturbation_stability")
        if "perturbation_stability" not in metrics:
            raise LengthMismatchError(
                "perturbation-variant composite needs input_deltas"
            )
    composite = float(np.mean([metrics[k] for k in parts]))
    provenance = {
        "seed": spec.seed,
        "stream": spec.stream,
        "n_splits": cfg.n_splits,
        "max_samples": cfg.max_samples,
        "n_bootstrap": cfg.n_bootstrap,
        "n_used": int(xc.n),
        "anchor_count": cfg.anchors_for(xc.n),
        "rank_normalize_anchors": cfg.rank_normalize_anchors,
        "composite_variant": cfg.composite_variant,
    }
    return StabilityReport(metrics, stds, composite, provenance)
