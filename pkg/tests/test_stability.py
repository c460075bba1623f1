import json

import numpy as np
import pytest

from geotax.core.embedding import EmbeddingMatrix
from geotax.core.rng import SeedSpec, rng_create
from geotax.core.stats import spearman
from geotax.errors import ShapeMismatchError, TooFewSamplesError
from geotax.stability import (
    SplitConfig,
    anchor_stability,
    evaluate,
    feature_split,
    perturbation_magnitude,
    perturbation_stability,
    rdm_similarity,
    sample_split,
)


# -- oracles -------------------------------------------------------------


def naive_rdm_similarity(xc, xp):
    """Double-loop cosine RDM + rank-based Spearman; no vectorized paths."""

    def rdm_vec(x):
        out = []
        for i in range(len(x)):
            for j in range(i + 1, len(x)):
                num = float(np.dot(x[i], x[j]))
                den = float(np.linalg.norm(x[i]) * np.linalg.norm(x[j]))
                out.append(1.0 - num / den)
        return np.array(out)

    return spearman(rdm_vec(xc), rdm_vec(xp))


def iid_sample_split_oracle(x, n_splits, seed):
    """Independent re-implementation of the split-half sample score."""
    rng = rng_create(SeedSpec(seed, "oracle"))
    n = x.shape[0]
    scores = []
    for _ in range(n_splits):
        perm = rng.permutation(n)
        half = n // 2
        a, b = x[perm[:half]], x[perm[half : 2 * half]]
        scores.append(naive_rdm_similarity_fast(a, b))
    return float(np.mean(scores))


def naive_rdm_similarity_fast(a, b):
    from geotax.core.embedding import cosine_rdm

    return spearman(cosine_rdm(a).vector(), cosine_rdm(b).vector())


# -- rdm similarity ------------------------------------------------------


def test_rdm_similarity_identity(rng):
    x = rng.standard_normal((30, 8))
    assert rdm_similarity(x, x) == pytest.approx(1.0, abs=1e-12)


def test_rdm_similarity_scale_invariance(rng):
    x = rng.standard_normal((30, 8))
    assert rdm_similarity(x, 3.7 * x) == pytest.approx(1.0, abs=1e-12)


def test_rdm_similarity_matches_naive_oracle(rng):
    for _ in range(5):
        xc = rng.standard_normal((5, 4))
        xp = xc + 0.3 * rng.standard_normal((5, 4))
        assert rdm_similarity(xc, xp) == pytest.approx(
            naive_rdm_similarity(xc, xp), abs=1e-12
        )


def test_rdm_similarity_rotation_invariance(rng):
    xc = rng.standard_normal((40, 12))
    xp = xc + 0.1 * rng.standard_normal((40, 12))
    q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    assert rdm_similarity(xc @ q, xp @ q) == pytest.approx(
        rdm_similarity(xc, xp), abs=1e-9
    )


# -- sample split -----------------------------------------------------------


def test_sample_split_duplicated_rows_high_score(rng):
    # duplication oracle: rows 2i and 2i+1 are copies, so copy-aligned
    # forced halves must agree near-perfectly
    base = rng.standard_normal((40, 6))
    dup = np.repeat(base, 2, axis=0)
    forced = [(np.arange(0, 80, 2), np.arange(1, 80, 2))]
    cfg = SplitConfig(n_splits=5, n_bootstrap=1)
    score = sample_split(dup, cfg, SeedSpec(320), forced_splits=forced)
    assert score >= 0.9


def test_sample_split_deterministic(rng):
    x = rng.standard_normal((60, 6))
    cfg = SplitConfig(n_splits=3, n_bootstrap=1)
    assert sample_split(x, cfg, SeedSpec(1)) == sample_split(x, cfg, SeedSpec(1))


def test_sample_split_iid_matches_reimplementation_oracle():
    rng = rng_create(SeedSpec(320, "iid"))
    x = rng.standard_normal((2000, 50))
    cfg = SplitConfig(n_splits=10, n_bootstrap=1, max_samples=2500)
    mine = sample_split(x, cfg, SeedSpec(11))
    oracle = iid_sample_split_oracle(x, 10, seed=99)
    assert mine == pytest.approx(oracle, abs=0.1)


def test_sample_split_too_few():
    with pytest.raises(TooFewSamplesError):
        sample_split(np.ones((3, 5)), SplitConfig(n_splits=1))


# -- feature split ------------------------------------------------------------


def test_feature_split_duplicated_blocks_perfect(rng):
    base = rng.standard_normal((30, 6))
    dup = np.concatenate([base, base], axis=1)  # features copied twice
    forced = [(np.arange(6), np.arange(6, 12))]
    cfg = SplitConfig(n_splits=4, n_bootstrap=1)
    score = feature_split(dup, cfg, SeedSpec(320), forced_splits=forced)
    assert score == pytest.approx(1.0, abs=1e-9)


def test_feature_split_deterministic(rng):
    x = rng.standard_normal((40, 16))
    cfg = SplitConfig(n_splits=4, n_bootstrap=1)
    assert feature_split(x, cfg, SeedSpec(3)) == feature_split(x, cfg, SeedSpec(3))


def test_feature_split_constant_features_degenerate():
    # all-constant rows give all-zero distances: degenerate spearman
    # returns the flagged 0.0 instead of crashing the harness
    x = np.ones((20, 8))
    cfg = SplitConfig(n_splits=2, n_bootstrap=1)
    assert feature_split(x, cfg, SeedSpec(1)) == 0.0


# -- anchor stability ------------------------------------------------------------


def test_anchor_stability_two_clusters_near_one(rng):
    # cluster oracle: two angular clusters, each point paired with a
    # near-twin; twin-aligned subsets give entrywise-matching anchor
    # profiles, so the score should sit near 1
    u = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    v = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    pts = []
    for center in (u, v):
        for _ in range(30):
            p = center + 0.05 * rng.standard_normal(5)
            pts.append(p)
            pts.append(p + 1e-6 * rng.standard_normal(5))  # twin
    x = np.array(pts)
    s1 = np.arange(0, x.shape[0], 2)
    s2 = np.arange(1, x.shape[0], 2)
    cfg = SplitConfig(n_splits=3, n_bootstrap=1, anchor_count=6)
    score = anchor_stability(x, cfg, SeedSpec(320), forced_splits=[(s1, s2)])
    assert score > 0.9


def test_anchor_stability_identical_subsets_forced(rng):
    x = rng.standard_normal((50, 6))
    idx = np.arange(10, 30)
    cfg = SplitConfig(n_splits=2, n_bootstrap=1, anchor_count=1)
    score = anchor_stability(x, cfg, SeedSpec(2), forced_splits=[(idx, idx)])
    assert score == pytest.approx(1.0, abs=1e-12)


def test_anchor_stability_deterministic(rng):
    x = rng.standard_normal((80, 6))
    cfg = SplitConfig(n_splits=3, n_bootstrap=1)
    assert anchor_stability(x, cfg, SeedSpec(7)) == anchor_stability(x, cfg, SeedSpec(7))


# -- perturbation metrics -----------------------------------------------------------


def test_perturbation_stability_linear_displacement(rng):
    x = rng.standard_normal((50, 6))
    deltas = rng.uniform(0.1, 2.0, size=50)
    u = rng.standard_normal(6)
    u /= np.linalg.norm(u)
    xp = x + deltas[:, None] * u
    assert perturbation_stability(deltas, x, xp) == pytest.approx(1.0)


def test_perturbation_stability_zero_deltas_degenerate(rng):
    x = rng.standard_normal((20, 4))
    assert perturbation_stability(np.zeros(20), x, x) == 0.0


def test_perturbation_stability_matches_rank_oracle(rng):
    from test_core import spearman_oracle

    x = rng.standard_normal((30, 5))
    xp = x + 0.2 * rng.standard_normal((30, 5))
    deltas = rng.uniform(0, 1, 30)
    disp = np.linalg.norm(x - xp, axis=1)
    assert perturbation_stability(deltas, x, xp) == pytest.approx(
        spearman_oracle(deltas, disp), abs=1e-12
    )


def test_perturbation_magnitude_trivials(rng):
    x = rng.standard_normal((20, 4))
    assert perturbation_magnitude(x, x) == 0.0
    v = np.array([3.0, 4.0, 0.0, 0.0])
    assert perturbation_magnitude(x, x + v) == pytest.approx(5.0)


def test_perturbation_magnitude_matches_hand_computation():
    x = np.zeros((2, 2))
    xp = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert perturbation_magnitude(x, xp) == pytest.approx(1.5)


# -- evaluate -------------------------------------------------------------------------


def test_evaluate_identity_criteria(rng):
    x = rng.standard_normal((120, 10))
    cfg = SplitConfig(n_splits=5, n_bootstrap=3, max_samples=2500)
    report = evaluate(x, x, cfg=cfg, seed=SeedSpec(320))
    m = report.metrics
    assert m["rdm_similarity"] == pytest.approx(1.0, abs=1e-9)
    assert m["perturbation_magnitude"] == 0.0
    expected = np.mean(
        [m["rdm_similarity"], m["sample_split"], m["feature_split"], m["anchor_stability"]]
    )
    assert report.composite == pytest.approx(expected, abs=1e-12)


def test_evaluate_byte_identical_reports(rng):
    x = rng.standard_normal((80, 8))
    xp = x + 0.05 * rng.standard_normal((80, 8))
    cfg = SplitConfig(n_splits=4, n_bootstrap=3)
    r1 = evaluate(x, xp, cfg=cfg, seed=SeedSpec(320))
    r2 = evaluate(x, xp, cfg=cfg, seed=SeedSpec(320))
    assert json.dumps(r1.to_dict(), sort_keys=True) == json.dumps(r2.to_dict(), sort_keys=True)


def test_evaluate_subsample_identity_under_cap(rng):
    x = rng.standard_normal((50, 6))
    cfg = SplitConfig(n_splits=2, n_bootstrap=1, max_samples=100)
    report = evaluate(x, x, cfg=cfg, seed=SeedSpec(1))
    assert report.provenance["n_used"] == 50


def test_evaluate_bootstrap_std_zero_single_round(rng):
    x = rng.standard_normal((40, 6))
    xp = x + 0.1 * rng.standard_normal((40, 6))
    cfg = SplitConfig(n_splits=2, n_bootstrap=1)
    report = evaluate(x, xp, cfg=cfg, seed=SeedSpec(1))
    assert all(v == 0.0 for v in report.bootstrap_std.values())


def test_evaluate_stratified_subsampling_respects_labels(rng):
    x = EmbeddingMatrix(
        rng.standard_normal((200, 6)), labels=np.array([0] * 150 + [1] * 50)
    )
    xp = EmbeddingMatrix(x.data + 0.1 * rng.standard_normal((200, 6)), labels=x.labels)
    cfg = SplitConfig(n_splits=2, n_bootstrap=1, max_samples=40)
    report = evaluate(x, xp, cfg=cfg, seed=SeedSpec(5))
    assert report.provenance["n_used"] == 40


def test_evaluate_main_text_composite_variant(rng):
    x = rng.standard_normal((60, 8))
    xp = x + 0.1 * rng.standard_normal((60, 8))
    deltas = rng.uniform(0.1, 1.0, 60)
    cfg = SplitConfig(n_splits=3, n_bootstrap=1, composite_variant="perturbation")
    report = evaluate(x, xp, deltas, cfg, SeedSpec(2))
    m = report.metrics
    expected = np.mean(
        [m["rdm_similarity"], m["sample_split"], m["feature_split"],
         m["perturbation_stability"]]
    )
    assert report.composite == pytest.approx(expected, abs=1e-12)


def test_evaluate_shape_mismatch(rng):
    with pytest.raises(ShapeMismatchError):
        evaluate(rng.standard_normal((10, 4)), rng.standard_normal((10, 5)))
