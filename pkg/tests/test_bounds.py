import math

import numpy as np
import pytest

from smoothcal.bounds import (
    BoundInputs,
    bound_report,
    gbt_training_bound,
    kernel_training_bound,
    l1_grad_norm,
    misclassification_rate,
    nn_bound_constant,
    nn_training_bound,
    optimal_gbt_stepsize,
    suggested_schedule,
    verify_stump_margin,
)
from smoothcal.data import Dataset
from smoothcal.experiment import gen_stump_separable
from smoothcal.metrics import LogitSet

LOG2 = math.log(2)


# --- closed-form values ---------------------------------------------------------


def test_gbt_bound_spot_value():
    value = gbt_training_bound(BoundInputs(gamma=1.0, B=1.0, w=0.1, T=100, L0=LOG2))
    assert value == pytest.approx(LOG2 / 10 + 0.0125, abs=1e-12)
    assert value == pytest.approx(0.0818147, abs=1e-6)


def test_gbt_bound_shape():
    base = BoundInputs(gamma=1.0, w=0.1, T=100)
    assert gbt_training_bound(BoundInputs(gamma=1.0, w=0.01, T=100)) > gbt_training_bound(base)
    assert gbt_training_bound(BoundInputs(gamma=1.0, w=0.1, T=1000)) < gbt_training_bound(base)
    with pytest.raises(ValueError):
        gbt_training_bound(BoundInputs(gamma=1.0, w=0.1, T=1))


def test_gbt_bound_minimizer_bracketed_by_grid():
    # the bound is convex in w with interior minimizer w* = sqrt(8 L0 / (B^2 T))
    T = 64
    wstar = optimal_gbt_stepsize(LOG2, 1.0, T)
    assert wstar == pytest.approx(math.sqrt(8 * LOG2 / T), abs=1e-15)
    grid = np.geomspace(wstar / 10, wstar * 10, 41)
    values = [gbt_training_bound(BoundInputs(gamma=1.0, w=float(w), T=T)) for w in grid]
    best = int(np.argmin(values))
    assert 0 < best < len(grid) - 1
    assert grid[best - 1] < wstar < grid[best + 1]


def test_kernel_bound_spot_value():
    value = kernel_training_bound(BoundInputs(gamma=1.0, w=0.1, T=100, L0=LOG2))
    # frozen from independent arithmetic: sqrt(log 2 / 10)
    assert value == pytest.approx(0.26327688477341593, abs=1e-9)


def test_kernel_bound_scalings():
    base = BoundInputs(gamma=1.0, w=0.1, T=100)
    quad = BoundInputs(gamma=1.0, w=0.1, T=400)
    assert kernel_training_bound(quad) == pytest.approx(kernel_training_bound(base) / 2, abs=1e-12)
    twog = BoundInputs(gamma=2.0, w=0.1, T=100)
    assert kernel_training_bound(twog) == pytest.approx(kernel_training_bound(base) / 2, abs=1e-12)


def test_kernel_bound_warns_on_large_stepsize():
    with pytest.warns(UserWarning, match="4/Lambda"):
        kernel_training_bound(BoundInputs(gamma=1.0, w=5.0, T=10))


def test_nn_bound_constant_and_spot_value():
    assert nn_bound_constant(1.0, 1.0) == pytest.approx(4.0, abs=1e-15)
    K2 = math.sqrt(3) / 18
    value = nn_training_bound(BoundInputs(gamma=1.0, w=0.01, T=1000, m=300, beta=0.5, K1=0.25, K2=K2))
    # frozen from independent arithmetic before the build
    assert value == pytest.approx(1.0531916292672634, abs=1e-9)


def test_nn_bound_scaling_and_validation():
    K2 = math.sqrt(3) / 18
    base = BoundInputs(gamma=1.0, w=0.01, T=100, m=300, beta=0.5, K1=0.25, K2=K2)
    quad = BoundInputs(gamma=1.0, w=0.01, T=400, m=300, beta=0.5, K1=0.25, K2=K2)
    assert nn_training_bound(quad) == pytest.approx(nn_training_bound(base) / 2, abs=1e-12)
    with pytest.raises(ValueError):
        nn_training_bound(BoundInputs(gamma=1.0, w=0.01, T=100))  # missing m/beta/K1/K2


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(gamma=0.0, w=0.1, T=10)
    with pytest.raises(ValueError):
        BoundInputs(gamma=1.0, w=-0.1, T=10)
    with pytest.raises(ValueError):
        BoundInputs(gamma=1.0, w=0.1, T=10, B=0.5)


# --- gradient norm / misclassification ------------------------------------------


def test_l1_grad_norm_values():
    assert l1_grad_norm(LogitSet([0.0, 0.0], [1, 0])) == pytest.approx(0.5, abs=1e-15)
    assert l1_grad_norm(LogitSet([30.0, -30.0], [1, 0])) < 1e-13
    assert l1_grad_norm(LogitSet([2.0], [0])) == pytest.approx(0.8807970779778823, abs=1e-9)


def test_misclassification_examples():
    assert misclassification_rate(LogitSet([1.0, -1.0], [1, 0])) == 0.0
    assert misclassification_rate(LogitSet([0.0, 0.0], [1, 0])) == 1.0  # ties are errors
    assert misclassification_rate(LogitSet([1.0, -1.0], [0, 1])) == 1.0


# --- stump margin -----------------------------------------------------------------


def test_stump_margin_separable_1d():
    ds = Dataset(np.array([[-1.0], [-2.0], [1.0], [2.0]]), np.array([0, 0, 1, 1]))
    assert verify_stump_margin(ds) == (True, 1.0)


def test_stump_margin_xor_fails():
    ds = Dataset(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]), np.array([0, 0, 1, 1]))
    assert verify_stump_margin(ds) == (False, 0.0)


def test_stump_margin_single_sample_and_flipped():
    assert verify_stump_margin(Dataset(np.array([[3.0]]), np.array([1]))) == (True, 1.0)
    # separating orientation with class 1 below class 0
    ds = Dataset(np.array([[5.0], [-5.0]]), np.array([0, 1]))
    assert verify_stump_margin(ds) == (True, 1.0)


def test_stump_margin_generator():
    ds = gen_stump_separable(40, seed=3)
    assert verify_stump_margin(ds) == (True, 1.0)


# --- schedules / reports ------------------------------------------------------------


def test_suggested_schedule_payloads():
    sched = suggested_schedule("gbt", BoundInputs(gamma=1.0, w=0.1, T=10))
    assert sched["c"] == pytest.approx(math.sqrt(8 * LOG2), abs=1e-12)
    assert "non-normative" in sched["note"]
    k = suggested_schedule("kernel", BoundInputs(gamma=1.0, w=0.1, T=10))
    assert k["w_cap"] == pytest.approx(4.0)
    with pytest.raises(ValueError):
        suggested_schedule("mystery", BoundInputs(gamma=1.0, w=0.1, T=10))


def test_bound_report_certified_and_uncertified():
    inputs = BoundInputs(gamma=1.0, w=0.1, T=100)
    rep = bound_report("gbt", inputs, measured=0.05, gamma_certified=True)
    assert rep["dominated"] is True
    assert rep["bound_value"] == pytest.approx(LOG2 / 10 + 0.0125)
    rep2 = bound_report("kernel", inputs, measured=0.01)
    assert rep2["dominated"] == "uncertified"
    rep3 = bound_report("gbt", inputs, measured=0.5, gamma_certified=True)
    assert rep3["dominated"] is False
    with pytest.raises(ValueError):
        bound_report("nope", inputs, measured=0.0)
