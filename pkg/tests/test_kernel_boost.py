import math

import numpy as np
import pytest

from smoothcal.data import Dataset, gen_gaussian_toy
from smoothcal.kernel_boost import (
    KernelModel,
    KernelSpec,
    kb_predict_logit,
    kb_train,
    kernel_matrix,
    rkhs_grad_norm,
    write_kernel_trace_csv,
)
from smoothcal.losses import sigmoid


def test_kernel_matrix_examples():
    one = kernel_matrix(np.array([[0.3, 0.4]]), KernelSpec("gaussian", 1.0))
    assert one.shape == (1, 1) and one[0, 0] == pytest.approx(1.0)
    two = kernel_matrix(np.array([[1.0], [1.0]]), KernelSpec("laplace", 1.0))
    assert np.allclose(two, 1.0)
    # gaussian at distance sqrt(2 ln 2) has off-diagonal exactly 1/2
    r = math.sqrt(2 * math.log(2))
    K = kernel_matrix(np.array([[0.0], [r]]), KernelSpec("gaussian", 1.0))
    assert K[0, 1] == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(K, K.T)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("cauchy", 1.0)
    with pytest.raises(ValueError):
        KernelSpec("gaussian", 0.0)


def test_rkhs_grad_norm_examples():
    assert rkhs_grad_norm(np.array([[1.0]]), np.array([-0.5])) == pytest.approx(0.5, abs=1e-12)
    assert rkhs_grad_norm(np.eye(3), np.zeros(3)) == 0.0
    # identical points: the all-ones kernel annihilates mean-zero gradients
    K = np.ones((2, 2))
    assert rkhs_grad_norm(K, np.array([0.5, -0.5])) == pytest.approx(0.0, abs=1e-12)


def test_rkhs_grad_norm_psd_violation():
    with pytest.raises(RuntimeError):
        rkhs_grad_norm(np.array([[-1.0]]), np.array([1.0]))


def test_kb_train_T0():
    train = gen_gaussian_toy(20, seed=0)
    model = kb_train(train, KernelSpec(), w=1.0, T=0)
    assert np.allclose(model.alpha, 0.0)
    assert model.trace[0].log_loss == pytest.approx(math.log(2), abs=1e-12)


def test_kb_train_single_step_single_point():
    train = Dataset(np.array([[0.0]]), np.array([1]))
    model = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=1)
    assert model.alpha[0] == pytest.approx(0.5, abs=1e-12)  # -(1/1)*(sigma(0)-1)
    assert model.avg_alpha[0] == 0.0  # mean over iterate 0 only


def test_kb_descent_and_quantitative_decrease():
    train = gen_gaussian_toy(100, seed=4)
    w = 1.0
    model = kb_train(train, KernelSpec("gaussian", 1.0), w=w, T=30)
    rows = model.trace
    for before, after in zip(rows, rows[1:]):
        # per-step decrease >= w (1 - w Lambda / 8) * hnorm^2, up to round-off
        guaranteed = w * (1 - w / 8.0) * before.hnorm**2
        assert before.log_loss - after.log_loss >= 0.5 * guaranteed - 1e-10
        assert after.log_loss <= before.log_loss + 1e-12
    for row in rows:
        assert row.dual_smce <= row.grad_l1 + 1e-9


def test_kb_cesaro_bound():
    train = gen_gaussian_toy(80, seed=6)
    for T in (10, 40):
        model = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=T, trace_metrics="loss-only")
        cesaro = np.mean([row.hnorm**2 for row in model.trace[:T]])
        assert cesaro <= 2.0 * math.log(2) / T + 1e-9


def test_kb_averaged_dual_smce_below_l1_norm():
    from smoothcal.bounds import l1_grad_norm
    from smoothcal.metrics import LogitSet, dual_smooth_ce

    train = gen_gaussian_toy(60, seed=8)
    model = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=15, trace_metrics="loss-only")
    g_avg = model.predict_logit(train.features, mode="average")
    ls = LogitSet(g_avg, train.labels)
    assert dual_smooth_ce(ls) <= l1_grad_norm(ls) + 1e-9


def test_kb_warns_above_stepsize_cap():
    train = gen_gaussian_toy(10, seed=1)
    with pytest.warns(UserWarning, match="4/Lambda"):
        kb_train(train, KernelSpec(), w=8.0, T=1, trace_metrics="loss-only")


def test_kb_invalid_args():
    train = gen_gaussian_toy(10, seed=1)
    with pytest.raises(ValueError):
        kb_train(train, KernelSpec(), w=0.0, T=1)
    with pytest.raises(ValueError):
        kb_train(train, KernelSpec(), w=1.0, T=-1)


def test_kb_predict_modes_and_support_row():
    train = gen_gaussian_toy(30, seed=2)
    model = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=5, trace_metrics="loss-only")
    K = kernel_matrix(train.features, model.kernel)
    # prediction at a support point equals the K-row dot alpha
    g0 = kb_predict_logit(model, train.features[0], "last")
    assert g0 == pytest.approx(float(K[0] @ model.alpha), abs=1e-10)
    # averaged alpha after T=2 with iterates (0, a) is a/2
    model2 = kb_train(train, KernelSpec("gaussian", 1.0), w=0.5, T=2, trace_metrics="loss-only")
    grad0 = sigmoid(np.zeros(train.n)) - train.labels
    alpha1 = -(0.5 / train.n) * grad0
    assert np.allclose(model2.avg_alpha, alpha1 / 2, atol=1e-12)


def test_kb_permutation_representer_consistency():
    train = gen_gaussian_toy(40, seed=3)
    perm = np.random.default_rng(0).permutation(train.n)
    shuffled = Dataset(train.features[perm], train.labels[perm])
    m1 = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=8, trace_metrics="loss-only")
    m2 = kb_train(shuffled, KernelSpec("gaussian", 1.0), w=1.0, T=8, trace_metrics="loss-only")
    X = gen_gaussian_toy(10, seed=9).features
    assert np.allclose(m1.predict_logit(X, "last"), m2.predict_logit(X, "last"), atol=1e-10)
    assert np.allclose(m1.alpha[perm], m2.alpha, atol=1e-12)


def test_kb_json_roundtrip_and_trace_csv(tmp_path):
    train = gen_gaussian_toy(20, seed=5)
    model = kb_train(train, KernelSpec("laplace", 2.0), w=1.0, T=3, trace_metrics="loss-only")
    back = KernelModel.from_json(model.to_json())
    X = train.features[:5]
    assert np.allclose(back.predict_logit(X, "last"), model.predict_logit(X, "last"))
    assert np.allclose(back.predict_logit(X, "average"), model.predict_logit(X, "average"))
    path = tmp_path / "ktrace.csv"
    write_kernel_trace_csv(path, model.trace)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,log_loss,hnorm,grad_l1,dual_smce"
    assert len(lines) == 5
