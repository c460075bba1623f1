"""Input-space walks and embedding Lipschitz profiles.

Interpolation walks step between two continuous trajectories through the
shared discretization grid; mutation walks flip one base at a time toward
a mutant endpoint.  Profiles measure per-step embedding displacement (L2
or cosine) with spike detection at mean + 2 population standard deviations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core.embedding import EmbeddingMatrix, ZERO_NORM_FLOOR
from .core.pca import PCAResult, pca_project
from .core.rng import SeedSpec, rng_create
from .core.sequence import DNA, SymbolSequence
from .dynamics import GlobalRange, Trajectory, discretize
from .errors import (
    DataError,
    LengthMismatchError,
    RegionTooSmallError,
    TooShortError,
    ZeroNormRowError,
)


@dataclass(frozen=True)
class Walk:
    """Ordered inputs plus per-step metadata.

    For interpolation walks ``step_meta`` holds alpha per step; for mutation
    walks it holds the position changed going into each step (None for the
    start).  ``landmark_index`` flags a designated step, e.g. a pathogenic
    mutation.
    """

    steps: tuple
    step_meta: tuple
    kind: str                      # interpolation | mutation
    landmark_index: int | None = None

    def __len__(self) -> int:
        return len(self.steps)


def build_interpolation_walk(
    traj_a: Trajectory,
    traj_b: Trajectory,
    grange: GlobalRange,
    n_steps: int = 101,
    n_bins: int = 256,
) -> Walk:
    """Discretized linear interpolation (1-alpha) A + alpha B, alpha in [0,1].

    Endpoints equal the standalone discretizations of A and B exactly.
    """
    if traj_a.values.shape != traj_b.values.shape:
        raise LengthMismatchError("interpolation endpoints must share shape")
    if n_steps < 2:
        raise DataError("need at least 2 interpolation steps")
    steps, alphas = [], []
    for i in range(n_steps):
        alpha = i / (n_steps - 1)
        blend = (1.0 - alpha) * traj_a.values + alpha * traj_b.values
        steps.append(discretize(Trajectory(blend, traj_a.dt, traj_a.system), grange, n_bins))
        alphas.append(alpha)
    return Walk(tuple(steps), tuple(alphas), "interpolation")


def build_mutation_walk(
    wildtype: SymbolSequence,
    n_mutations: int,
    core_region: tuple[int, int],
    seed: SeedSpec | int = SeedSpec(),
    landmark: tuple[int, int] | None = None,
) -> Walk:
    """Single-point mutation walk from wildtype to an n-mutation endpoint.

    Positions are sampled without replacement from the core region, each
    changed to a uniformly random alternative base; the optional landmark
    (position, base) is inserted among them.  Mutations are applied one per
    step in a seed-shuffled order, and the landmark's step index recorded.
    Consecutive steps differ at exactly one position.
    """
    if wildtype.alphabet.name != "dna":
        raise DataError("mutation walks are defined over the DNA alphabet")
    lo, hi = core_region
    if not (0 <= lo < hi <= len(wildtype)):
        raise RegionTooSmallError("core region outside sequence")
    pool = np.arange(lo, hi)
    if landmark is not None:
        lm_pos, lm_base = landmark
        if not lo <= lm_pos < hi:
            raise RegionTooSmallError("landmark outside core region")
        if not 0 <= lm_base < 4 or lm_base == wildtype.symbols[lm_pos]:
            raise DataError("landmark base must differ from the reference base")
        pool = pool[pool != lm_pos]
    if n_mutations > pool.size:
        raise RegionTooSmallError(
            f"core region holds {pool.size} candidate sites < {n_mutations}"
        )
    spec = seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))
    rng = rng_create(spec.derive("mutation-walk"))
    positions = rng.choice(pool, size=n_mutations, replace=False)
    draw = rng.integers(0, 3, size=n_mutations)
    ref = wildtype.symbols[positions]
    alts = np.where(draw >= ref, draw + 1, draw)  # uniform over the 3 non-reference bases
    mutations = list(zip(positions.tolist(), alts.tolist()))
    if landmark is not None:
        mutations.append((int(lm_pos), int(lm_base)))
    order = rng.permutation(len(mutations))
    steps = [wildtype]
    meta = [None]
    landmark_index = None
    current = wildtype.symbols.copy()
    for step_no, idx in enumerate(order, start=1):
        pos, base = mutations[idx]
        current[pos] = base
        steps.append(SymbolSequence(current.copy(), DNA))
        meta.append(pos)
        if landmark is not None and pos == lm_pos:
            landmark_index = step_no
    return Walk(tuple(steps), tuple(meta), "mutation", landmark_index)


def walk_to_matrix(walk: Walk) -> EmbeddingMatrix:
    """Stack walk steps as rows (n_steps x L) for EMB1 export, the handoff
    format for embedding the steps through an external model."""
    rows = np.vstack([step.symbols.astype(np.float64) for step in walk.steps])
    return EmbeddingMatrix(rows)


# -- profiles ---------------------------------------------------------------

SPIKE_MIN_VALUES = 3


@dataclass(frozen=True)
class LipschitzProfile:
    """Per-step displacement along a walk, plus summary statistics."""

    values: np.ndarray             # length n_steps - 1
    metric: str                    # l2 | cosine
    mean: float
    max: float
    smoothness_ratio: float        # mean / max; 1.0 for a flat profile
    spikes: tuple                  # indices strictly above mean + 2 sigma
    from_start: np.ndarray = field(repr=False, default=None)  # cumulative drift


def detect_spikes(values: np.ndarray) -> tuple:
    """Indices strictly exceeding mean + 2 population standard deviations."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < SPIKE_MIN_VALUES:
        raise TooShortError(f"need >= {SPIKE_MIN_VALUES} profile values")
    threshold = values.mean() + 2.0 * values.std()
    return tuple(int(i) for i in np.nonzero(values > threshold)[0])


def _summarize(values: np.ndarray, metric: str, from_start: np.ndarray) -> LipschitzProfile:
    mean = float(values.mean())
    vmax = float(values.max())
    ratio = 1.0 if vmax == 0.0 else mean / vmax
    spikes = detect_spikes(values) if values.size >= SPIKE_MIN_VALUES else ()
    return LipschitzProfile(values, metric, mean, vmax, ratio, spikes, from_start)


def _rows(embeddings) -> np.ndarray:
    arr = embeddings.data if isinstance(embeddings, EmbeddingMatrix) else np.asarray(
        embeddings, dtype=np.float64
    )
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise DataError("need an ordered matrix with >= 2 rows")
    return arr


def lipschitz_l2(embeddings) -> LipschitzProfile:
    """Consecutive L2 displacements along an ordered embedding path."""
    e = _rows(embeddings)
    values = np.linalg.norm(np.diff(e, axis=0), axis=1)
    from_start = np.linalg.norm(e - e[0], axis=1)
    return _summarize(values, "l2", from_start)


def lipschitz_cosine(embeddings) -> LipschitzProfile:
    """Consecutive cosine distances; dimension-invariant across models.

    ``from_start`` carries the cumulative cosine drift from step 0.
    """
    e = _rows(embeddings)
    norms = np.linalg.norm(e, axis=1)
    bad = np.nonzero(norms < ZERO_NORM_FLOOR)[0]
    if bad.size:
        raise ZeroNormRowError(int(bad[0]))
    unit = e / norms[:, None]
    values = 1.0 - np.clip((unit[1:] * unit[:-1]).sum(axis=1), -1.0, 1.0)
    from_start = 1.0 - np.clip(unit @ unit[0], -1.0, 1.0)
    return _summarize(values, "cosine", from_start)


def lipschitz_gap(mean_values) -> float:
    """max/min spread of mean Lipschitz across a model set (the track gap)."""
    vals = np.asarray(mean_values, dtype=np.float64)
    if vals.size < 2 or (vals <= 0).any():
        raise DataError("gap needs >= 2 positive means")
    return float(vals.max() / vals.min())


def mean_lipschitz(profiles) -> float:
    """Mean of per-pair means (pairs first, then averaged)."""
    return float(np.mean([p.mean for p in profiles]))


# -- PCA trajectory export ----------------------------------------------------


def pca_trajectory(embeddings, k: int = 3) -> tuple[PCAResult, str]:
    """Project an embedding path to k components and render an SVG polyline.

    The SVG bytes are deterministic for fixed input (fixed float formatting,
    no timestamps).
    """
    e = _rows(embeddings)
    result = pca_project(e, k)
    path = result.projected.data
    svg = render_path_svg(path[:, 0], path[:, 1] if path.shape[1] > 1 else np.zeros(len(path)))
    return result, svg


def render_path_svg(
    x: np.ndarray, y: np.ndarray, width: int = 640, height: int = 480, margin: int = 20
) -> str:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    spans = []
    for v in (x, y):
        lo, hi = float(v.min()), float(v.max())
        if hi - lo == 0.0:
            lo, hi = lo - 0.5, hi + 0.5
        spans.append((lo, hi))
    (x0, x1), (y0, y1) = spans
    px = margin + (x - x0) / (x1 - x0) * (width - 2 * margin)
    py = height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)
    pts = " ".join(f"{a:.6f},{b:.6f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
        f'<circle cx="{px[0]:.6f}" cy="{py[0]:.6f}" r="4" fill="#2ca02c"/>'
        f'<circle cx="{px[-1]:.6f}" cy="{py[-1]:.6f}" r="4" fill="#d62728"/>'
        "</svg>"
    )
