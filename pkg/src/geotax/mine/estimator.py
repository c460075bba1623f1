"""Mutual information estimation via the Donsker-Varadhan lower bound.

    I(X; Z) >= E_p[T(x, z)] - log E_{p x p}[exp(T(x, z))]

A statistics network T is trained to maximize the bound; marginal samples
come from in-batch permutation of Z.  Estimates are the mean over the last
10% of training epochs, evaluated full-batch with dropout off.  Reported
values aggregate five seeded runs; excess MI subtracts a matched random
baseline to remove the finite-sample bias of the estimator, and a ceiling
run (X against a noisy copy of itself) calibrates the achievable maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.parallel import ordered_map
from ..core.pca import pca_project
from ..core.rng import SeedSpec, rng_create
from ..errors import DataError, NonFiniteLossError
from .mlp import MLP, Adam, MLPConfig, clip_gradient

DEFAULT_SEEDS = (320, 420, 520, 620, 720)
SANITY_CONFIG = MLPConfig(hidden=(128, 64), epochs=300)
PCA_COMPONENTS = 50
TAIL_FRACTION = 0.10
TRACE_STRIDE = 10      # pre-tail evaluation stride (diagnostics only)


def zscore(x: np.ndarray) -> np.ndarray:
    """Independent per-feature standardization; constant features map to 0."""
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (x - mean) / std


def logmeanexp(values: np.ndarray) -> float:
    """log(mean(exp(v))) with max subtraction for stability."""
    peak = float(values.max())
    return peak + float(np.log(np.exp(values - peak).mean()))


def dv_bound(t_joint: np.ndarray, t_marginal: np.ndarray) -> float:
    return float(t_joint.mean()) - logmeanexp(t_marginal)


@dataclass(frozen=True)
class MIRun:
    seed: int
    estimate: float            # tail mean of the evaluation trace
    initial_value: float       # bound at initialization
    trace: tuple = field(repr=False, default=())   # (epoch, value) pairs


@dataclass(frozen=True)
class MIEstimate:
    runs: tuple
    mean: float
    std: float
    baseline: float | None = None
    ceiling: float | None = None

    @property
    def per_seed(self) -> tuple:
        return tuple(r.estimate for r in self.runs)

    @property
    def excess(self) -> float | None:
        if self.baseline is None:
            return None
        return self.mean - self.baseline

    @property
    def normalized(self) -> float | None:
        if self.baseline is None or self.ceiling is None or self.ceiling == 0.0:
            return None
        return self.excess / self.ceiling

    def to_dict(self) -> dict:
        return {
            "seeds": [r.seed for r in self.runs],
            "per_seed": list(self.per_seed),
            "mean": self.mean,
            "std": self.std,
            "baseline": self.baseline,
            "ceiling": self.ceiling,
            "excess": self.excess,
            "normalized": self.normalized,
        }


def _run_single(x: np.ndarray, z: np.ndarray, cfg: MLPConfig, seed: int) -> MIRun:
    """One seeded DV maximization; x and z arrive already standardized."""
    n = x.shape[0]
    spec = SeedSpec(seed, "mine-run")
    rng = rng_create(spec)
    eval_perm = rng_create(spec.derive("eval-perm")).permutation(n)
    net = MLP(x.shape[1] + z.shape[1], cfg.hidden, 1, rng)
    opt = Adam(net.theta.size, cfg.lr)

    eval_input = np.concatenate(
        [np.concatenate([x, z], axis=1), np.concatenate([x, z[eval_perm]], axis=1)]
    )

    def full_bound() -> float:
        t = net.predict(eval_input).ravel()
        return dv_bound(t[:n], t[n:])

    initial = full_bound()
    tail = max(1, int(round(TAIL_FRACTION * cfg.epochs)))
    tail_start = cfg.epochs - tail
    trace: list[tuple[int, float]] = []
    tail_values = []
    batch_input = np.empty((2 * cfg.batch_size, x.shape[1] + z.shape[1]))
    grad_out = np.empty((2 * cfg.batch_size, 1))
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            b = idx.size
            if b < 2:
                continue
            perm = rng.permutation(b)
            inp = batch_input[: 2 * b]
            inp[:b, : x.shape[1]] = x[idx]
            inp[:b, x.shape[1] :] = z[idx]
            inp[b:, : x.shape[1]] = x[idx]
            inp[b:, x.shape[1] :] = z[idx][perm]
            out, cache = net.forward(inp, cfg.dropout, rng)
            tm = out[b:, 0]
            w = np.exp(tm - tm.max())
            # d(-bound)/dT: -1/B on the joint pass, softmax weights on the marginal
            gout = grad_out[: 2 * b]
            gout[:b, 0] = -1.0 / b
            gout[b:, 0] = w / w.sum()
            net.backward(cache, gout)
            opt.step(net.theta, clip_gradient(net.grad, cfg.clip_inf))
        if epoch >= tail_start:
            value = full_bound()
            if not np.isfinite(value):
                raise NonFiniteLossError(f"DV bound diverged at epoch {epoch}")
            tail_values.append(value)
            trace.append((epoch, value))
        elif epoch % TRACE_STRIDE == 0:
            trace.append((epoch, full_bound()))
    return MIRun(seed, float(np.mean(tail_values)), initial, tuple(trace))


def _run_args(args) -> MIRun:
    return _run_single(*args)


def _run_seeds(x, z, cfg, seeds, workers) -> list[MIRun]:
    tasks = [(x, z, cfg, s) for s in seeds]
    return ordered_map(_run_args, tasks, workers, processes=True)


def _aggregate(runs: list[MIRun]) -> MIEstimate:
    est = np.array([r.estimate for r in runs])
    return MIEstimate(tuple(runs), float(est.mean()), float(est.std()))


def _prepare(x, z, pca_dim: int | None) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if z.ndim == 1:
        z = z[:, None]
    if x.shape[0] != z.shape[0]:
        raise DataError("feature and embedding sample counts differ")
    if pca_dim is not None:
        k = min(pca_dim, z.shape[0], z.shape[1])
        if k < z.shape[1]:
            z = pca_project(z, k).projected.data
    return zscore(x), zscore(z)


def mine_estimate(
    x,
    z,
    cfg: MLPConfig = MLPConfig(),
    seeds: tuple = DEFAULT_SEEDS,
    pca_dim: int | None = PCA_COMPONENTS,
    workers: int = 1,
) -> MIEstimate:
    """Aggregate DV estimate of I(X; Z) over independent seeded runs.

    Embeddings are PCA-reduced to min(pca_dim, n, d) components; both
    inputs are z-scored per feature before concatenation.
    """
    xs, zs = _prepare(x, z, pca_dim)
    return _aggregate(_run_seeds(xs, zs, cfg, seeds, workers))


def random_baseline(
    x,
    d: int = PCA_COMPONENTS,
    cfg: MLPConfig = MLPConfig(),
    seeds: tuple = DEFAULT_SEEDS,
    workers: int = 1,
) -> MIEstimate:
    """MINE against fresh standard-normal embeddings of matched dimension.

    This is the finite-sample bias floor: by construction the true MI is 0.
    """
    xs = zscore(np.asarray(x, dtype=np.float64))
    if xs.ndim == 1:
        xs = xs[:, None]
    tasks = []
    for seed in seeds:
        z = rng_create(SeedSpec(seed, "baseline-z")).standard_normal((xs.shape[0], d))
        tasks.append((xs, zscore(z), cfg, seed))
    return _aggregate(ordered_map(_run_args, tasks, workers, processes=True))


def ceiling_calibration(
    x,
    noise_sigma: float = 0.1,
    cfg: MLPConfig = MLPConfig(),
    seeds: tuple = DEFAULT_SEEDS,
    workers: int = 1,
) -> MIEstimate:
    """MINE of X against X + N(0, sigma^2 I): the recoverable maximum."""
    xs = np.asarray(x, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    tasks = []
    for seed in seeds:
        eps = rng_create(SeedSpec(seed, "ceiling-noise")).standard_normal(xs.shape)
        tasks.append((zscore(xs), zscore(xs + noise_sigma * eps), cfg, seed))
    return _aggregate(ordered_map(_run_args, tasks, workers, processes=True))


def excess_mi_report(
    x,
    z,
    cfg: MLPConfig = MLPConfig(),
    seeds: tuple = DEFAULT_SEEDS,
    pca_dim: int | None = PCA_COMPONENTS,
    noise_sigma: float = 0.1,
    workers: int = 1,
) -> MIEstimate:
    """Model estimate with matched baseline and ceiling attached."""
    xs, zs = _prepare(x, z, pca_dim)
    model = _aggregate(_run_seeds(xs, zs, cfg, seeds, workers))
    base = random_baseline(x, zs.shape[1], cfg, seeds, workers)
    ceil = ceiling_calibration(x, noise_sigma, cfg, seeds, workers)
    return MIEstimate(model.runs, model.mean, model.std, base.mean, ceil.mean)


# -- estimator validation -----------------------------------------------------


@dataclass(frozen=True)
class SanityCase:
    rho: float
    true_mi: float
    estimate: float
    std: float
    tolerance: float
    passed: bool


def gaussian_mi(rho: float) -> float:
    """Closed-form MI of a correlated bivariate Gaussian: -0.5 ln(1 - rho^2)."""
    return -0.5 * float(np.log(1.0 - rho * rho))


def sanity_tolerance(true_mi: float) -> float:
    return max(0.15, 0.3 * true_mi)


def sanity_suite(
    rhos: tuple = (0.0, 0.3, 0.6, 0.9),
    n: int = 2000,
    seeds: tuple = DEFAULT_SEEDS,
    cfg: MLPConfig = SANITY_CONFIG,
    data_seed: int = 320,
    workers: int = 1,
) -> list[SanityCase]:
    """Validate the estimator on correlated Gaussians with known MI.

    Passes when |estimate - I| < max(0.15, 0.3 I) for every rho.
    """
    tasks = []
    for rho in rhos:
        rng = rng_create(SeedSpec(data_seed, f"sanity-data/{rho}"))
        x = rng.standard_normal(n)
        y = rho * x + np.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
        for seed in seeds:
            tasks.append((zscore(x[:, None]), zscore(y[:, None]), cfg, seed))
    runs = ordered_map(_run_args, tasks, workers, processes=True)
    cases = []
    for i, rho in enumerate(rhos):
        est = _aggregate(runs[i * len(seeds) : (i + 1) * len(seeds)])
        true = gaussian_mi(rho)
        tol = sanity_tolerance(true)
        cases.append(
            SanityCase(rho, true, est.mean, est.std, tol, abs(est.mean - true) < tol)
        )
    return cases
