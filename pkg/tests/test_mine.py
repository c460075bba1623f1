import numpy as np
import pytest

from geotax.core.rng import SeedSpec, rng_create
from geotax.errors import SingleClassError
from geotax.mine.estimator import (
    _run_single,
    dv_bound,
    gaussian_mi,
    logmeanexp,
    mine_estimate,
    random_baseline,
    sanity_tolerance,
    zscore,
)
from geotax.mine.features import dna_features, protein_features
from geotax.mine.mlp import MLP, MLPConfig, clip_gradient, mlp_train_regression
from geotax.mine.probes import mlp_probe_cv
from geotax.procrustes import frozen_head_classifier

# the statistics network plus the two probe architectures
GRADCHECK_ARCHS = [(256, 128), (256, 64), (512, 256, 64), (128, 64)]


# -- gradient checking ------------------------------------------------------


def mse_loss_and_grad(net, x, y):
    out, cache = net.forward(x)
    diff = out - y
    loss = float((diff * diff).mean())
    grad = net.backward(cache, 2.0 * diff / diff.size).copy()
    return loss, grad


def dv_loss_and_grad(net, inp, b):
    out, cache = net.forward(inp)
    tj, tm = out[:b, 0], out[b:, 0]
    loss = -(float(tj.mean()) - logmeanexp(tm))
    w = np.exp(tm - tm.max())
    w /= w.sum()
    gout = np.empty((inp.shape[0], 1))
    gout[:b, 0] = -1.0 / b
    gout[b:, 0] = w
    grad = net.backward(cache, gout).copy()
    return loss, grad


def bce_loss_and_grad(net, x, y01):
    out, cache = net.forward(x)
    y_pm = np.where(y01 > 0, 1.0, -1.0)
    loss = float(np.logaddexp(0.0, -y_pm * out).mean())
    p = 1.0 / (1.0 + np.exp(-out))
    grad = net.backward(cache, (p - y01) / out.size).copy()
    return loss, grad


def central_difference_check(net, loss_fn, n_probes=10, h=1e-6, seed=0):
    rng = rng_create(SeedSpec(seed, "gradcheck"))
    _, analytic = loss_fn(net)
    worst = 0.0
    for idx in rng.choice(net.theta.size, size=n_probes, replace=False):
        keep = net.theta[idx]
        net.theta[idx] = keep + h
        lp, _ = loss_fn(net)
        net.theta[idx] = keep - h
        lm, _ = loss_fn(net)
        net.theta[idx] = keep
        fd = (lp - lm) / (2.0 * h)
        rel = abs(fd - analytic[idx]) / max(abs(fd), abs(analytic[idx]), 1e-8)
        worst = max(worst, rel)
    return worst


@pytest.mark.parametrize("hidden", GRADCHECK_ARCHS)
def test_gradcheck_mse(hidden):
    rng = rng_create(SeedSpec(320, f"gc-mse-{hidden}"))
    net = MLP(7, hidden, 1, rng)
    x = rng.standard_normal((32, 7))
    y = rng.standard_normal((32, 1))
    worst = central_difference_check(net, lambda n: mse_loss_and_grad(n, x, y))
    assert worst < 1e-4


@pytest.mark.parametrize("hidden", GRADCHECK_ARCHS)
def test_gradcheck_dv(hidden):
    rng = rng_create(SeedSpec(320, f"gc-dv-{hidden}"))
    net = MLP(6, hidden, 1, rng)
    inp = rng.standard_normal((64, 6))
    worst = central_difference_check(net, lambda n: dv_loss_and_grad(n, inp, 32))
    assert worst < 1e-4


def test_gradcheck_bce():
    rng = rng_create(SeedSpec(320, "gc-bce"))
    net = MLP(5, (64, 32), 1, rng)
    x = rng.standard_normal((40, 5))
    y = (rng.random((40, 1)) > 0.5).astype(float)
    worst = central_difference_check(net, lambda n: bce_loss_and_grad(n, x, y))
    assert worst < 1e-4


# -- engine behavior ----------------------------------------------------------


def test_regression_linear_target_converges():
    rng = rng_create(SeedSpec(320, "lin"))
    x = rng.standard_normal((256, 4))
    w_true = np.array([1.0, -2.0, 0.5, 3.0])
    y = x @ w_true
    cfg = MLPConfig(hidden=(64, 32), dropout=0.0, lr=1e-3, epochs=500, batch_size=64)
    net, trace = mlp_train_regression(x, y, cfg, SeedSpec(320))
    pred = net.predict(x).ravel()
    assert float(((pred - y) ** 2).mean()) < 1e-3
    assert trace[-1] < trace[0]


def test_training_deterministic_weights():
    rng = rng_create(SeedSpec(320, "det"))
    x = rng.standard_normal((100, 3))
    y = x.sum(axis=1)
    cfg = MLPConfig(hidden=(16, 8), dropout=0.1, lr=1e-3, epochs=20)
    n1, _ = mlp_train_regression(x, y, cfg, SeedSpec(7))
    n2, _ = mlp_train_regression(x, y, cfg, SeedSpec(7))
    assert (n1.theta == n2.theta).all()


def test_clip_gradient_infinity_norm():
    g = np.array([1.0, -10.0, 3.0])
    clipped = clip_gradient(g.copy(), 5.0)
    assert np.abs(clipped).max() == pytest.approx(5.0)
    assert clipped[0] == pytest.approx(0.5)  # rescaled, not clamped
    small = np.array([0.5, -0.25])
    assert (clip_gradient(small.copy(), 5.0) == small).all()


def test_dropout_off_at_eval():
    rng = rng_create(SeedSpec(320, "drop"))
    net = MLP(4, (32,), 1, rng)
    x = rng.standard_normal((10, 4))
    a = net.predict(x)
    b = net.predict(x)
    assert (a == b).all()  # no mask is drawn outside training


# -- estimator ------------------------------------------------------------------


def quick_cfg(epochs=150):
    return MLPConfig(hidden=(64, 32), dropout=0.1, lr=1e-3, epochs=epochs)


def test_dv_bound_improves_over_initialization():
    rng = rng_create(SeedSpec(320, "dv-improve"))
    n = 800
    x = rng.standard_normal(n)
    y = 0.8 * x + 0.6 * rng.standard_normal(n)
    run = _run_single(zscore(x[:, None]), zscore(y[:, None]), quick_cfg(), 320)
    assert run.estimate > run.initial_value


def test_independent_inputs_excess_near_zero():
    rng = rng_create(SeedSpec(320, "indep"))
    n = 1000
    x = rng.standard_normal((n, 3))
    z = rng.standard_normal((n, 5))
    seeds = (320, 420)
    est = mine_estimate(x, z, quick_cfg(), seeds, pca_dim=None)
    base = random_baseline(x, d=5, cfg=quick_cfg(), seeds=seeds)
    assert abs(est.mean - base.mean) < 0.15


def test_zscore_absorbs_affine_rescaling():
    rng = rng_create(SeedSpec(320, "affine"))
    n = 500
    x = rng.standard_normal((n, 2))
    z = x @ rng.standard_normal((2, 3)) + 0.5 * rng.standard_normal((n, 3))
    seeds = (320,)
    cfg = quick_cfg(epochs=60)
    a = mine_estimate(x, z, cfg, seeds, pca_dim=None)
    b = mine_estimate(x * np.array([3.0, 0.2]) + 1.5, z * 7.0 - 2.0, cfg, seeds, pca_dim=None)
    assert abs(a.mean - b.mean) < 0.05


def test_gaussian_mi_closed_forms():
    assert gaussian_mi(0.0) == 0.0
    assert gaussian_mi(0.6) == pytest.approx(0.2231, abs=1e-4)
    assert gaussian_mi(0.9) == pytest.approx(0.8304, abs=1e-4)
    assert sanity_tolerance(0.0) == 0.15
    assert sanity_tolerance(0.8304) == pytest.approx(0.3 * 0.8304)


def test_dv_bound_formula():
    tj = np.array([1.0, 2.0, 3.0])
    tm = np.array([0.0, 0.0, 0.0])
    assert dv_bound(tj, tm) == pytest.approx(2.0)
    peak = np.array([1000.0, 1000.0])
    assert np.isfinite(logmeanexp(peak))
    assert logmeanexp(peak) == pytest.approx(1000.0)


def test_estimate_deterministic_per_seed():
    rng = rng_create(SeedSpec(320, "det-est"))
    x = rng.standard_normal(300)
    y = x + rng.standard_normal(300)
    cfg = quick_cfg(epochs=40)
    a = mine_estimate(x, y, cfg, (320,), pca_dim=None)
    b = mine_estimate(x, y, cfg, (320,), pca_dim=None)
    assert a.per_seed == b.per_seed


# -- probes ----------------------------------------------------------------------


def xor_dataset(n=400, noise=0.2, seed=320):
    rng = rng_create(SeedSpec(seed, "xor"))
    signs = rng.choice([-1.0, 1.0], size=(n, 2))
    x = signs + noise * rng.standard_normal((n, 2))
    labels = (signs[:, 0] * signs[:, 1] > 0).astype(np.int64)
    return x, labels


def test_xor_separates_mlp_from_linear():
    x, labels = xor_dataset()
    linear_acc, _ = frozen_head_classifier(x, labels, folds=5, seed=SeedSpec(320))
    mlp_acc, _ = mlp_probe_cv(x, labels, "mlp", folds=5, seed=SeedSpec(320))
    assert abs(linear_acc - 0.5) < 0.12
    assert mlp_acc > 0.9


def test_probe_shuffled_labels_chance():
    rng = rng_create(SeedSpec(320, "probe-shuffle"))
    x, labels = xor_dataset()
    shuffled = rng.permutation(labels)
    acc, _ = mlp_probe_cv(x, shuffled, "mlp", folds=5, seed=SeedSpec(320))
    assert abs(acc - 0.5) < 0.1


def test_probe_deterministic():
    x, labels = xor_dataset(n=120)
    a = mlp_probe_cv(x, labels, "mlp", folds=3, seed=SeedSpec(55))
    b = mlp_probe_cv(x, labels, "mlp", folds=3, seed=SeedSpec(55))
    assert a == b


def test_probe_single_class():
    with pytest.raises(SingleClassError):
        mlp_probe_cv(np.ones((10, 2)), np.zeros(10, dtype=int), "mlp")


# -- features ---------------------------------------------------------------------


def test_dna_features_gc_and_dinucleotides():
    feats = dna_features("GGCC")
    assert feats[0] == 1.0  # GC content
    feats = dna_features("ACGT")
    # dinucleotide block order: AA AC AG AT CA CC CG CT GA GC GG GT TA TC TG TT
    expected = np.zeros(16)
    expected[[1, 6, 11]] = 1 / 3  # AC, CG, GT
    assert np.allclose(feats[1:], expected)
    assert feats.shape == (17,)


def test_protein_features_poly_lysine():
    feats = protein_features("K" * 50, species=1)
    assert feats.shape == (25,)
    assert feats[21] == pytest.approx(1.0)    # net charge per residue
    assert feats[20] == pytest.approx(0.05)   # L / 1000
    assert feats[22] == pytest.approx(-3.9)   # Kyte-Doolittle for K
    assert feats[23] == 0.0 and feats[24] == 1.0


def test_protein_features_charges_cancel():
    feats = protein_features("KD" * 10)
    assert feats[21] == pytest.approx(0.0)
