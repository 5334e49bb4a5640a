import numpy as np
import pytest
from scipy.optimize import linprog

from smoothcal.chain_lp import (
    ChainLpProblem,
    OracleSizeError,
    chain_lp_grid_value,
    evaluate_chain_objective,
    solve_chain_lp,
)
from smoothcal.metrics import LogitSet, PredictionSet, build_chain_problem
from smoothcal.rng import uniform_stream


def random_prediction_set(seed, n):
    gen = uniform_stream(seed, "lp-test")
    probs = gen.random(n)
    labels = (gen.random(n) < probs).astype(int)
    return PredictionSet(probs, labels)


def highs_chain_value(problem):
    n = problem.n
    if n == 1:
        return abs(problem.c[0])
    rows, rhs = [], []
    for k in range(n - 1):
        row = np.zeros(n)
        row[k + 1], row[k] = 1.0, -1.0
        rows.append(row.copy())
        rhs.append(problem.d[k])
        rows.append(-row)
        rhs.append(problem.d[k])
    res = linprog(
        -problem.c,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(-1, 1)] * n,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    assert res.status == 0
    return -res.fun


# --- construction -----------------------------------------------------------


def test_build_chain_problem_example():
    preds = PredictionSet([0.8, 0.2], [0, 1])
    problem, perm = build_chain_problem(preds, 1.0)
    assert np.allclose(problem.c, [0.4, -0.4])
    assert np.allclose(problem.d, [0.6])
    assert perm.tolist() == [1, 0]


def test_build_chain_problem_tie_gives_zero_gap():
    preds = PredictionSet([0.5, 0.5], [1, 0])
    problem, _ = build_chain_problem(preds, 1.0)
    assert problem.d.tolist() == [0.0]
    value, omega = solve_chain_lp(problem)
    assert omega[0] == omega[1]
    assert value == pytest.approx(0.0, abs=1e-15)


def test_build_chain_problem_logit_scale():
    logits = LogitSet([-2.0, 2.0], [1, 0])
    problem, _ = build_chain_problem(logits, 0.25)
    assert np.allclose(problem.d, [1.0])


def test_chain_problem_validation():
    with pytest.raises(ValueError):
        ChainLpProblem(np.array([0.1, 0.2]), np.array([-0.5]))
    with pytest.raises(ValueError):
        ChainLpProblem(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        ChainLpProblem(np.array([0.1]), np.array([0.2]))  # wrong d length


# --- solver -----------------------------------------------------------------


def test_solve_hand_example():
    problem = ChainLpProblem(np.array([0.4, -0.4]), np.array([0.6]))
    value, omega = solve_chain_lp(problem)
    assert value == pytest.approx(0.24, abs=1e-12)
    assert evaluate_chain_objective(problem, omega) == pytest.approx(value, abs=1e-12)
    assert abs(omega[0] - omega[1]) <= 0.6 + 1e-12


def test_solve_single_box_variable():
    value, omega = solve_chain_lp(ChainLpProblem(np.array([0.35]), np.array([])))
    assert value == pytest.approx(0.35, abs=1e-15)
    assert omega[0] == pytest.approx(1.0)


def test_solve_tie_forces_cancellation():
    value, omega = solve_chain_lp(ChainLpProblem(np.array([0.25, -0.25]), np.array([0.0])))
    assert value == pytest.approx(0.0, abs=1e-15)
    assert omega[0] == omega[1]


def test_solver_matches_highs_on_random_instances():
    for seed in range(120):
        gen = uniform_stream(seed, "inst")
        n = int(gen.integers(1, 28))
        c = gen.normal(0, 1.0 / max(n, 1), n)
        d = np.abs(gen.normal(0, gen.choice([0.05, 0.5, 5.0]), max(n - 1, 0)))
        if n > 1 and gen.random() < 0.3:
            d[gen.integers(0, n - 1)] = 0.0  # inject ties
        problem = ChainLpProblem(c, d)
        value, omega = solve_chain_lp(problem)
        assert np.max(np.abs(omega)) <= 1 + 1e-12
        if n > 1:
            assert np.all(np.abs(np.diff(omega)) <= problem.d + 1e-12)
        assert evaluate_chain_objective(problem, omega) == pytest.approx(value, abs=1e-11)
        assert value == pytest.approx(highs_chain_value(problem), abs=1e-9)


def test_adjacent_reduction_matches_full_pairwise_lp():
    # brute-force check of the telescoping lemma in docs/lipschitz_chain_reduction.md
    for seed in range(40):
        preds = random_prediction_set(seed, int(uniform_stream(seed, "n").integers(2, 18)))
        problem, _ = build_chain_problem(preds, 1.0)
        n = problem.n
        anchors = np.sort(preds.probs)
        rows, rhs = [], []
        for i in range(n):
            for j in range(i + 1, n):
                row = np.zeros(n)
                row[i], row[j] = 1.0, -1.0
                rows.append(row.copy())
                rhs.append(abs(anchors[i] - anchors[j]))
                rows.append(-row)
                rhs.append(abs(anchors[i] - anchors[j]))
        res = linprog(
            -problem.c,
            A_ub=np.array(rows),
            b_ub=np.array(rhs),
            bounds=[(-1, 1)] * n,
            method="highs",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        assert res.status == 0
        value, _ = solve_chain_lp(problem)
        assert value == pytest.approx(-res.fun, abs=1e-9)


def test_solver_handles_huge_gaps():
    # gaps larger than the box width: the chain constraint becomes vacuous
    problem = ChainLpProblem(np.array([0.3, -0.2, 0.1]), np.array([50.0, 50.0]))
    value, omega = solve_chain_lp(problem)
    assert value == pytest.approx(0.6, abs=1e-12)  # each coordinate free in [-1, 1]
    assert np.allclose(np.abs(omega), 1.0)


# --- grid oracle -------------------------------------------------------------


def test_grid_oracle_matches_exact_on_hand_example():
    preds = PredictionSet([0.2, 0.8], [1, 0])
    problem, _ = build_chain_problem(preds, 1.0)
    assert chain_lp_grid_value(problem, 0.01) == pytest.approx(0.24, abs=0.01)


def test_grid_oracle_single_point_exact_on_grid():
    problem = ChainLpProblem(np.array([0.7]), np.array([]))
    assert chain_lp_grid_value(problem, 0.01) == pytest.approx(0.7, abs=1e-12)


def test_grid_oracle_within_step_of_exact():
    for seed in range(60):
        gen = uniform_stream(seed, "oracle-n")
        n = int(gen.integers(1, 30))
        preds = random_prediction_set(seed + 1000, n)
        problem, _ = build_chain_problem(preds, 1.0)
        exact, _ = solve_chain_lp(problem)
        approx = chain_lp_grid_value(problem, 0.01)
        assert abs(exact - approx) <= 0.01 + 1e-12


def test_grid_oracle_refuses_huge_instances():
    problem = ChainLpProblem(np.zeros(300), np.zeros(299))
    with pytest.raises(OracleSizeError):
        chain_lp_grid_value(problem, 0.001)
    with pytest.raises(ValueError):
        chain_lp_grid_value(problem, 0.7)  # step out of range
