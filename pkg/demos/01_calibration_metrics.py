"""Tour of the calibration metrics on tiny hand-checkable inputs.

The smooth calibration error is the optimum of a linear program over
Lipschitz-bounded sample weights; this script walks through the two-point
example whose optimum is 0.24, the dual (logit-scale) variant, and the
remaining metrics in the report panel.
"""

import numpy as np

from smoothcal import (
    LogitSet,
    PredictionSet,
    binned_ece,
    build_chain_problem,
    dual_smooth_ce,
    interval_ce,
    metric_report,
    mmce,
    smooth_ce,
    smooth_ce_grid_oracle,
    solve_chain_lp,
)

# Two points: an under-confident 0.2 on a positive, an over-confident 0.8 on
# a negative.  A 1-Lipschitz weight function can pay +1 at 0.2 and only
# 1 - 0.6 = 0.4 at 0.8, so the optimum is 0.4 * 0.6 = 0.24.
preds = PredictionSet([0.2, 0.8], [1, 0])
problem, perm = build_chain_problem(preds, lipschitz_scale=1.0)
value, omega = solve_chain_lp(problem)
print("chain LP coefficients c:", problem.c, " gap budgets d:", problem.d)
print(f"smooth CE        = {smooth_ce(preds):.6f}   (LP value {value:.6f}, weights {omega})")
print(f"grid oracle      = {smooth_ce_grid_oracle(preds, 0.01):.6f}   (brute force, within 0.01)")

# The dual metric weighs logits with 1/4-Lipschitz functions (the sigmoid's
# Lipschitz constant), and always dominates the probability-scale metric.
logits = LogitSet([-2.0, 2.0], [1, 0])
print(f"dual smooth CE   = {dual_smooth_ce(logits):.6f}   (on logits -2, +2)")
print(f"smooth CE (same) = {smooth_ce(logits.to_prediction_set()):.6f}")

# Binned ECE, interval CE (exact partition optimizer), and the Laplace-kernel
# MMCE on a three-point example.
three = PredictionSet([0.05, 0.15, 0.95], [0, 1, 1])
print(f"binned ECE (10)  = {binned_ece(three, 10):.6f}   (= 0.95/3)")
print(f"interval CE      = {interval_ce(three):.6f}")
print(f"MMCE (bw=1)      = {mmce(three, 1.0):.6f}")

# One-call report over random logits; the dual column appears because the
# inputs are logits.
gen = np.random.default_rng(0)
g = gen.normal(0, 2, 500)
y = (gen.random(500) < 1 / (1 + np.exp(-g))).astype(int)
report = metric_report(LogitSet(g, y))
print("\nfull report on 500 sampled logits:")
print(report.to_json())
