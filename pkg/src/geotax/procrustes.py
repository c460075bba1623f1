"""Procrustes spin test, regime classification, and frozen-head checks.

The alignment pipeline is: mean-center both matrices, Frobenius-normalize
copies to compute the optimal orthogonal map R* = V U^T from the SVD of
Xp^T Xc, then fit the isotropic scale s* on the centered (unnormalized)
matrices.  Raw and aligned errors are Frobenius distances per sqrt(n).
Reflections are permitted in R* (no determinant correction).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.embedding import EmbeddingMatrix
from .core.rng import SeedSpec, rng_create
from .errors import DegenerateInputError, ShapeMismatchError, SingleClassError

BRITTLE_GLASS_MAX = 2.0     # reduction percent below -> internal fracture
UNTETHERED_GEL_MIN = 4.0    # reduction percent above -> coherent global drift


@dataclass(frozen=True)
class ProcrustesResult:
    raw_error: float            # ||Xc - Xp||_F / sqrt(n), mean-centered
    aligned_error: float        # ||Xc - s* Xp R*||_F / sqrt(n)
    ratio: float                # aligned / raw (0 when exact_match)
    reduction_percent: float    # 100 * (1 - ratio)
    rotation: np.ndarray        # d x d orthogonal (may reflect)
    scale: float
    exact_match: bool

    @property
    def rho(self) -> float:
        """Reduction as a fraction in [0, 1]."""
        return self.reduction_percent / 100.0


@dataclass(frozen=True)
class RegimeLabel:
    label: str          # BrittleGlass | TransitionZone | UntetheredGel
    rho_percent: float


def _as_array(x) -> np.ndarray:
    return x.data if isinstance(x, EmbeddingMatrix) else np.asarray(x, dtype=np.float64)


def procrustes_align(x_clean, x_pert) -> ProcrustesResult:
    """Optimal orthogonal + isotropic-scale alignment of perturbed onto clean."""
    xc = _as_array(x_clean)
    xp = _as_array(x_pert)
    if xc.shape != xp.shape:
        raise ShapeMismatchError(f"{xc.shape} vs {xp.shape}")
    n = xc.shape[0]
    if n < 2:
        raise DegenerateInputError("need at least 2 samples")
    xc = xc - xc.mean(axis=0)
    xp = xp - xp.mean(axis=0)
    sq = np.sqrt(n)
    raw = float(np.linalg.norm(xc - xp)) / sq
    nc = float(np.linalg.norm(xc))
    npn = float(np.linalg.norm(xp))
    if nc == 0.0 and npn == 0.0:
        raise DegenerateInputError("both centered matrices are all-zero")
    if raw == 0.0:
        # identical inputs: batch pipelines must not crash on unperturbed controls
        return ProcrustesResult(0.0, 0.0, 0.0, 100.0, np.eye(xc.shape[1]), 1.0, True)
    if nc == 0.0 or npn == 0.0:
        raise DegenerateInputError("one centered matrix is all-zero")
    u, _, vt = np.linalg.svd((xp / npn).T @ (xc / nc))
    # Optimal orthogonal map for row-major right-multiplication Xp @ R.
    rotation = u @ vt
    rotated = xp @ rotation
    denom = float(np.trace(rotated.T @ rotated))
    scale = float(np.trace(xc.T @ rotated)) / denom
    aligned = float(np.linalg.norm(xc - scale * rotated)) / sq
    ratio = aligned / raw
    return ProcrustesResult(
        raw_error=raw,
        aligned_error=aligned,
        ratio=ratio,
        reduction_percent=100.0 * (1.0 - ratio),
        rotation=rotation,
        scale=scale,
        exact_match=False,
    )


def classify_regime(result: ProcrustesResult | float) -> RegimeLabel:
    """Threshold rule on the reduction: <2% BrittleGlass, >4% UntetheredGel."""
    pct = result.reduction_percent if isinstance(result, ProcrustesResult) else float(result)
    if pct < BRITTLE_GLASS_MAX:
        label = "BrittleGlass"
    elif pct > UNTETHERED_GEL_MIN:
        label = "UntetheredGel"
    else:
        label = "TransitionZone"
    return RegimeLabel(label, pct)


# -- frozen head -----------------------------------------------------------


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def frozen_head_agreement(logits_clean, logits_pert) -> tuple[float, float]:
    """Top-1 agreement fraction and mean token-level KL(p_clean || p_pert) in nats.

    Ties in the top-1 go to the lowest index.
    """
    lc = _as_array(logits_clean)
    lp = _as_array(logits_pert)
    if lc.shape != lp.shape:
        raise ShapeMismatchError(f"{lc.shape} vs {lp.shape}")
    agree = float((np.argmax(lc, axis=1) == np.argmax(lp, axis=1)).mean())
    log_pc = _log_softmax(lc)
    log_pp = _log_softmax(lp)
    kl = float((np.exp(log_pc) * (log_pc - log_pp)).sum(axis=1).mean())
    return agree, kl


# -- frozen linear classifier ------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_fit(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> tuple[np.ndarray, float]:
    """L2-regularized logistic regression by damped Newton iteration.

    Minimizes sum_i log(1 + exp(-y_i z_i)) + (1/(2C)) ||w||^2 with the
    intercept unpenalized; deterministic, full batch.  Returns (w, b).
    """
    n, d = x.shape
    lam = 1.0 / c
    w = np.zeros(d)
    b = 0.0
    y_pm = np.where(y > 0, 1.0, -1.0)
    for _ in range(max_iter):
        z = x @ w + b
        p = _sigmoid(z)                      # P(y=+1)
        grad_z = p - (y_pm + 1.0) / 2.0      # dNLL/dz
        grad_w = x.T @ grad_z + lam * w
        grad_b = grad_z.sum()
        gnorm = np.sqrt((grad_w * grad_w).sum() + grad_b * grad_b)
        if gnorm < tol:
            break
        r = np.maximum(p * (1.0 - p), 1e-12)
        xa = np.concatenate([x, np.ones((n, 1))], axis=1)
        h = (xa * r[:, None]).T @ xa
        h[:d, :d] += lam * np.eye(d)
        h[np.arange(d + 1), np.arange(d + 1)] += 1e-10  # damping
        step = np.linalg.solve(h, np.concatenate([grad_w, [grad_b]]))
        # backtracking on the penalized objective
        def objective(wv, bv):
            zv = x @ wv + bv
            return float(np.logaddexp(0.0, -y_pm * zv).sum() + 0.5 * lam * (wv * wv).sum())

        base = objective(w, b)
        alpha = 1.0
        for _ in range(30):
            w_new = w - alpha * step[:d]
            b_new = b - alpha * step[d]
            if objective(w_new, b_new) <= base:
                break
            alpha *= 0.5
        w, b = w_new, b_new
    return w, b


def stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffled per-class round-robin assignment into ``folds`` test index sets."""
    assignments = np.empty(labels.size, dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        idx = idx[rng.permutation(idx.size)]
        assignments[idx] = np.arange(idx.size) % folds
    return [np.nonzero(assignments == f)[0] for f in range(folds)]


def frozen_head_classifier(
    x: EmbeddingMatrix | np.ndarray,
    labels: np.ndarray,
    folds: int = 5,
    seed: SeedSpec | int = SeedSpec(),
    c: float = 1.0,
) -> tuple[float, float]:
    """Stratified k-fold CV accuracy of the frozen linear classifier.

    Logistic regression with C = 1.0 convention (penalty weight 1/C),
    iteration cap 1000, gradient tolerance 1e-8.  Returns (mean, std).
    """
    data = _as_array(x)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if classes.size != 2:
        raise SingleClassError(f"need exactly 2 classes, got {classes.size}")
    if min((labels == c0).sum() for c0 in classes) < folds:
        raise SingleClassError("each class needs at least `folds` samples")
    rng = rng_create(seed if isinstance(seed, SeedSpec) else SeedSpec(seed))
    y01 = (labels == classes[1]).astype(np.float64)
    accs = []
    for test_idx in stratified_folds(labels, folds, rng):
        mask = np.ones(labels.size, dtype=bool)
        mask[test_idx] = False
        w, b = logistic_fit(data[mask], y01[mask], c=c)
        pred = (data[test_idx] @ w + b) >= 0
        accs.append(float((pred == (y01[test_idx] > 0)).mean()))
    accs = np.asarray(accs)
    return float(accs.mean()), float(accs.std())
