"""Declarative experiment sweeps and randomized verification suites.

A sweep config is a single JSON document selecting a learner, a dataset, one
sweep axis (iteration count T or training size n), fixed hyperparameters,
and a repeat count; seeds are the repeat indices 0..repeats-1.  Sweeps emit
``cells.csv`` (one row per cell x seed x split) and ``summary.csv``
(mean/std per cell); identical configs produce byte-identical files.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import spearmanr

from . import bounds as bounds_mod
from .data import Dataset, SplitSpec, gen_gaussian_toy, gen_mirrored_toy, load_csv, split, standardize
from .gbt import GbtConfig, gbt_train
from .kernel_boost import KERNEL_SUP_BOUND, KernelSpec, kb_train, kernel_matrix
from .losses import sigmoid
from .metrics import (
    LogitSet,
    MetricReport,
    PredictionSet,
    metric_report,
    smooth_ce,
    smooth_ce_grid_oracle,
)
from .rng import child_seed, normals, uniform_stream
from .two_layer_nn import NnConfig, nn_forward, nn_init_symmetric, nn_param_gradient, nn_train

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SweepResult",
    "load_config",
    "run_sweep",
    "write_sweep_csvs",
    "trend_correlation",
    "run_verification",
    "VerificationReport",
    "metrics_cmd",
]

_LEARNERS = ("gbt", "kernel", "nn")
_DATASET_KINDS = ("toy-gaussian", "toy-mirrored", "csv")


class ConfigError(ValueError):
    """Config validation failure; the message carries the offending field path."""


def _require(cond, path, message):
    if not cond:
        raise ConfigError(f"{path}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    learner: str
    dataset: dict
    sweep_axis: str
    grid: Tuple[int, ...]
    hyperparams: dict
    n_train: int
    n_test: int
    repeats: int = 10
    num_bins: int = 10
    mmce_bandwidth: float = 1.0
    t_schedule: Optional[dict] = None
    predictor: str = "last"
    output: dict = field(default_factory=lambda: {"cells": "cells.csv", "summary": "summary.csv"})


def load_config(source) -> ExperimentConfig:
    """Parse and validate a config from a dict, JSON string, or file path."""
    if isinstance(source, dict):
        raw = source
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        raw = json.loads(source)
    else:
        with open(source, encoding="utf-8") as fh:
            raw = json.load(fh)

    _require(raw.get("learner") in _LEARNERS, "learner", f"expected one of {_LEARNERS}, got {raw.get('learner')!r}")
    dataset = raw.get("dataset")
    _require(isinstance(dataset, dict), "dataset", "expected an object")
    kind = dataset.get("kind")
    _require(kind in _DATASET_KINDS, "dataset.kind", f"expected one of {_DATASET_KINDS}, got {kind!r}")
    if kind == "csv":
        _require(isinstance(dataset.get("path"), str), "dataset.path", "expected a file path string")
        _require("label_column" in dataset, "dataset.label_column", "required for csv datasets")
        _require(isinstance(dataset.get("positive_label"), str), "dataset.positive_label", "expected a string")

    sweep = raw.get("sweep")
    _require(isinstance(sweep, dict), "sweep", "expected an object")
    axis = sweep.get("axis")
    _require(axis in ("T", "n"), "sweep.axis", f"expected 'T' or 'n', got {axis!r}")
    grid = sweep.get("grid")
    _require(
        isinstance(grid, list) and grid and all(isinstance(v, int) and v > 0 for v in grid),
        "sweep.grid",
        "expected a nonempty list of positive integers",
    )
    _require(len(set(grid)) == len(grid), "sweep.grid", "grid values must be distinct")

    hyper = raw.get("hyperparams", {})
    _require(isinstance(hyper, dict), "hyperparams", "expected an object")
    if axis == "T":
        _require("T" not in hyper, "hyperparams.T", "must be omitted when sweeping T")

    n_train = raw.get("n_train")
    n_test = raw.get("n_test")
    if axis == "n":
        _require(n_train is None, "n_train", "must be omitted when sweeping n (the grid supplies it)")
        n_train = 0
    else:
        _require(isinstance(n_train, int) and n_train > 0, "n_train", "expected a positive integer")
    _require(isinstance(n_test, int) and n_test > 0, "n_test", "expected a positive integer")

    repeats = raw.get("repeats", 10)
    _require(isinstance(repeats, int) and repeats >= 1, "repeats", "expected an integer >= 1")

    schedule = raw.get("t_schedule")
    if schedule is not None:
        _require(axis == "n", "t_schedule", "only valid when sweeping n")
        _require(isinstance(schedule, dict) and schedule.get("kind") == "sqrt_n", "t_schedule.kind", "expected 'sqrt_n'")
        scale = schedule.get("scale", 1.0)
        _require(isinstance(scale, (int, float)) and scale > 0, "t_schedule.scale", "expected a positive number")
    if axis == "n" and schedule is None:
        _require("T" in hyper, "hyperparams.T", "required when sweeping n without a t_schedule")

    predictor = raw.get("predictor", "last")
    _require(predictor in ("last", "average"), "predictor", f"expected 'last' or 'average', got {predictor!r}")

    num_bins = raw.get("num_bins", 10)
    _require(isinstance(num_bins, int) and num_bins >= 1, "num_bins", "expected an integer >= 1")
    bandwidth = raw.get("mmce_bandwidth", 1.0)
    _require(isinstance(bandwidth, (int, float)) and bandwidth > 0, "mmce_bandwidth", "expected a positive number")

    output = raw.get("output", {"cells": "cells.csv", "summary": "summary.csv"})
    _require(isinstance(output, dict), "output", "expected an object")

    return ExperimentConfig(
        learner=raw["learner"],
        dataset=dataset,
        sweep_axis=axis,
        grid=tuple(grid),
        hyperparams=hyper,
        n_train=n_train,
        n_test=int(n_test),
        repeats=repeats,
        num_bins=num_bins,
        mmce_bandwidth=float(bandwidth),
        t_schedule=schedule,
        predictor=predictor,
        output=output,
    )


def _schedule_T(config: ExperimentConfig, n: int) -> int:
    if config.t_schedule is not None:
        return max(1, int(round(config.t_schedule.get("scale", 1.0) * math.sqrt(n))))
    return int(config.hyperparams["T"])


_CSV_CACHE: Dict[tuple, Dataset] = {}


def _make_datasets(config: ExperimentConfig, repeat: int, n_train: int) -> Tuple[Dataset, Dataset]:
    kind = config.dataset["kind"]
    if kind in ("toy-gaussian", "toy-mirrored"):
        tr_seed = child_seed(repeat, f"sweep/train/n={n_train}")
        te_seed = child_seed(repeat, f"sweep/test/n={config.n_test}")
        if kind == "toy-gaussian":
            return gen_gaussian_toy(n_train, tr_seed), gen_gaussian_toy(config.n_test, te_seed)
        sigma = config.dataset.get("sigma", 0.05)
        tau = config.dataset.get("tau", 0.01)
        return (
            gen_mirrored_toy(n_train, sigma, tau, tr_seed),
            gen_mirrored_toy(config.n_test, sigma, tau, te_seed),
        )
    key = (config.dataset["path"], str(config.dataset["label_column"]), config.dataset["positive_label"])
    if key not in _CSV_CACHE:
        _CSV_CACHE[key] = load_csv(config.dataset["path"], config.dataset["label_column"], config.dataset["positive_label"])
    full = _CSV_CACHE[key]
    train, test = split(full, SplitSpec(n_train, config.n_test, seed=child_seed(repeat, "sweep/split")))
    if config.dataset.get("standardize", True):
        train, test, _ = standardize(train, test)
    return train, test


def _gbt_logits_at(config: ExperimentConfig, train: Dataset, test: Dataset, ts: List[int]):
    """Train once to max(ts); read prefix logits at each grid T from tree outputs."""
    hp = config.hyperparams
    gconf = GbtConfig(T=max(ts), w=hp.get("w", 0.1), depth=hp.get("depth", 3), leaf_clip=hp.get("leaf_clip", 1.0))
    model = gbt_train(train, gconf, trace_metrics="loss-only")
    out = {}
    for X, tag in ((train.features, "train"), (test.features, "test")):
        P = np.array([tree.predict(X) for tree in model.trees])  # (T, n)
        C1 = np.cumsum(P, axis=0)
        C2 = np.cumsum(np.arange(len(model.trees))[:, None] * P, axis=0)
        for T in ts:
            if config.predictor == "last":
                g = -gconf.w * C1[T - 1]
            else:
                g = -(gconf.w / T) * ((T - 1) * C1[T - 1] - C2[T - 1])
            out[(T, tag)] = g
    return out


def _kernel_logits_at(config: ExperimentConfig, train: Dataset, test: Dataset, ts: List[int]):
    hp = config.hyperparams
    kernel = KernelSpec(kind=hp.get("kind", "gaussian"), bandwidth=hp.get("bandwidth", 1.0))
    w = hp.get("w", 1.0)
    K = kernel_matrix(train.features, kernel)
    K_test = kernel.pairwise(test.features, train.features)
    y = train.labels
    n = train.n
    alpha = np.zeros(n)
    alpha_sum = np.zeros(n)
    g = np.zeros(n)
    out = {}
    tmax = max(ts)
    for t in range(1, tmax + 1):
        grad = sigmoid(g) - y
        alpha_sum += alpha
        alpha = alpha - (w / n) * grad
        g = K @ alpha
        if t in ts:
            coef = alpha if config.predictor == "last" else alpha_sum / t
            out[(t, "train")] = K @ coef
            out[(t, "test")] = K_test @ coef
    return out


def _nn_logits_at(config: ExperimentConfig, train: Dataset, test: Dataset, ts: List[int], repeat: int):
    hp = config.hyperparams
    params = nn_init_symmetric(
        hp.get("m", 300),
        train.dim,
        hp.get("init_std", 1.0),
        child_seed(repeat, "sweep/nn-init"),
        beta=hp.get("beta", 0.5),
        activation=hp.get("activation", "sigmoid"),
    )
    w = hp.get("w", 0.01)
    out = {}
    tmax = max(ts)
    for t in range(1, tmax + 1):
        params.theta = params.theta - w * nn_param_gradient(params, train)
        if t in ts:
            out[(t, "train")] = nn_forward(params, train.features)
            out[(t, "test")] = nn_forward(params, test.features)
    return out


@dataclass
class SweepResult:
    """Raw per-(cell, seed, split) metric rows plus per-cell aggregates."""

    axis: str
    rows: List[dict]

    def summary_rows(self) -> List[dict]:
        metrics = MetricReport.CSV_COLUMNS
        cells = sorted({row["value"] for row in self.rows})
        out = []
        for value in cells:
            by_split = {
                split_name: sorted(
                    (r for r in self.rows if r["value"] == value and r["split"] == split_name),
                    key=lambda r: r["seed"],
                )
                for split_name in ("train", "test")
            }
            for metric in metrics:
                tr = np.array([r[metric] for r in by_split["train"]], dtype=float)
                te = np.array([r[metric] for r in by_split["test"]], dtype=float)
                gap = np.abs(tr - te)
                out.append(
                    {
                        "axis": self.axis,
                        "value": value,
                        "metric": metric,
                        "train_mean": float(tr.mean()),
                        "train_std": float(tr.std()),
                        "test_mean": float(te.mean()),
                        "test_std": float(te.std()),
                        "gap_mean": float(gap.mean()),
                        "gap_std": float(gap.std()),
                    }
                )
        return out


def _max_workers() -> int:
    raw = os.environ.get("SMOOTHCAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Run every (cell, seed) of the sweep; deterministic given the config."""
    jobs: List[tuple] = []
    if config.sweep_axis == "T":
        jobs = [("T", None, r) for r in range(config.repeats)]
    else:
        jobs = [("n", n, r) for n in config.grid for r in range(config.repeats)]

    def run_job(job):
        axis, n_cell, repeat = job
        if axis == "T":
            train, test = _make_datasets(config, repeat, config.n_train)
            ts = sorted(config.grid)
        else:
            train, test = _make_datasets(config, repeat, n_cell)
            ts = [_schedule_T(config, n_cell)]
        if config.learner == "gbt":
            logits = _gbt_logits_at(config, train, test, ts)
        elif config.learner == "kernel":
            logits = _kernel_logits_at(config, train, test, ts)
        else:
            logits = _nn_logits_at(config, train, test, ts, repeat)
        rows = []
        labels = {"train": train.labels, "test": test.labels}
        for (t, split_name), g in sorted(logits.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            report = metric_report(
                LogitSet(g, labels[split_name]), num_bins=config.num_bins, bandwidth=config.mmce_bandwidth
            )
            value = t if axis == "T" else n_cell
            row = {"axis": config.sweep_axis, "value": value, "seed": repeat, "split": split_name}
            row.update({k: getattr(report, k) for k in MetricReport.CSV_COLUMNS})
            rows.append(row)
        return rows

    workers = _max_workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            per_job = list(ex.map(run_job, jobs))
    else:
        per_job = [run_job(job) for job in jobs]

    rows = [row for chunk in per_job for row in chunk]
    rows.sort(key=lambda r: (r["value"], r["seed"], r["split"]))
    return SweepResult(axis=config.sweep_axis, rows=rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_sweep_csvs(result: SweepResult, config: ExperimentConfig, outdir) -> Tuple[str, str]:
    """Write cells.csv and summary.csv under ``outdir``; returns their paths."""
    os.makedirs(outdir, exist_ok=True)
    cells_path = os.path.join(outdir, config.output.get("cells", "cells.csv"))
    summary_path = os.path.join(outdir, config.output.get("summary", "summary.csv"))
    metric_cols = list(MetricReport.CSV_COLUMNS)
    with open(cells_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["axis", "value", "seed", "split"] + metric_cols) + "\n")
        for row in result.rows:
            fields = [row["axis"], str(row["value"]), str(row["seed"]), row["split"]]
            fields += [_fmt(row[m]) for m in metric_cols]
            fh.write(",".join(fields) + "\n")
    with open(summary_path, "w", encoding="utf-8") as fh:
        agg_cols = ["train_mean", "train_std", "test_mean", "test_std", "gap_mean", "gap_std"]
        fh.write(",".join(["axis", "value", "metric"] + agg_cols) + "\n")
        for row in result.summary_rows():
            fields = [row["axis"], str(row["value"]), row["metric"]] + [_fmt(row[c]) for c in agg_cols]
            fh.write(",".join(fields) + "\n")
    return cells_path, summary_path


def trend_correlation(result: SweepResult, metric: str, split: str) -> float:
    """Spearman rank correlation between the sweep axis and per-cell means."""
    values = sorted({row["value"] for row in result.rows})
    means = []
    for value in values:
        xs = [row[metric] for row in result.rows if row["value"] == value and row["split"] == split]
        means.append(float(np.mean(xs)))
    rho = spearmanr(values, means).statistic
    return float(rho)


# ---------------------------------------------------------------------------
# Randomized verification suites
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    suite: str
    count: int
    seed: int
    failures: List[dict]
    skipped: List[dict]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps(
            {
                "suite": self.suite,
                "count": self.count,
                "seed": self.seed,
                "passed": self.passed,
                "failures": self.failures,
                "skipped": self.skipped,
            }
        )


_ORACLE_SIZES = (1, 2, 3, 4, 5, 6, 7, 50, 200)


def _random_prediction_set(case_seed: int, n: int) -> PredictionSet:
    gen = uniform_stream(case_seed, "verify/preds")
    probs = gen.random(n)
    labels = (gen.random(n) < probs).astype(np.int64)
    return PredictionSet(probs, labels)


def gen_stump_separable(n: int, seed: int) -> Dataset:
    """Planar dataset whose labels are perfectly separated by sign(x_1)."""
    if n <= 0 or n % 2 != 0:
        raise ValueError("n must be a positive even integer")
    half = n // 2
    gen = uniform_stream(seed, "stump-separable")
    x1_neg = -1.5 + gen.random(half)  # [-1.5, -0.5)
    x1_pos = 0.5 + gen.random(half)  # [0.5, 1.5)
    x2 = normals(gen, n)
    features = np.column_stack([np.concatenate([x1_neg, x1_pos]), x2])
    labels = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(half, dtype=np.int64)])
    return Dataset(features, labels)


def _verify_oracle(seed: int, count: int) -> VerificationReport:
    failures = []
    for i in range(count):
        case_seed = child_seed(seed, f"oracle/{i}")
        n = _ORACLE_SIZES[i % len(_ORACLE_SIZES)]
        preds = _random_prediction_set(case_seed, n)
        exact = smooth_ce(preds)
        approx = smooth_ce_grid_oracle(preds, 0.01)
        if abs(exact - approx) > 0.01 + 1e-12:
            failures.append({"case": i, "seed": case_seed, "detail": f"exact={exact} oracle={approx} n={n}"})
    return VerificationReport("oracle", count, seed, failures, [])


def _verify_descent(seed: int, count: int, kb_stepsize: float) -> VerificationReport:
    failures = []
    skipped = []
    for i in range(count):
        case_seed = child_seed(seed, f"descent/{i}")
        train = gen_gaussian_toy(120, case_seed)
        if i % 2 == 0:
            model = gbt_train(train, GbtConfig(T=12, w=0.1, depth=2), trace_metrics="full")
            trace = model.trace
            name = "gbt"
        else:
            if kb_stepsize >= 4.0 / KERNEL_SUP_BOUND:
                skipped.append({"case": i, "seed": case_seed, "detail": f"kb stepsize {kb_stepsize} >= 4/Lambda"})
                continue
            model = kb_train(train, KernelSpec("gaussian", 1.0), w=kb_stepsize, T=12, trace_metrics="full")
            trace = model.trace
            name = "kernel"
        losses = [row.log_loss for row in trace]
        if any(b > a + 1e-12 for a, b in zip(losses, losses[1:])):
            failures.append({"case": i, "seed": case_seed, "detail": f"{name} loss increased: {losses}"})
        for row in trace:
            if row.dual_smce is not None and row.dual_smce > row.grad_l1 + 1e-9:
                failures.append(
                    {"case": i, "seed": case_seed, "detail": f"{name} t={row.t} dual {row.dual_smce} > grad {row.grad_l1}"}
                )
                break
    return VerificationReport("descent", count, seed, failures, skipped)


def _verify_bounds(seed: int, count: int) -> VerificationReport:
    from .metrics import dual_smooth_ce  # local to avoid cycles in __init__ ordering

    failures = []
    w_grid = (0.05, 0.1, 0.5)
    t_grid = (2, 8, 32)
    for i in range(count):
        case_seed = child_seed(seed, f"bounds/{i}")
        train = gen_stump_separable(60, case_seed)
        holds, gamma = bounds_mod.verify_stump_margin(train)
        if not holds:
            failures.append({"case": i, "seed": case_seed, "detail": "constructed dataset not stump-separable"})
            continue
        w = w_grid[i % len(w_grid)]
        T = t_grid[(i // len(w_grid)) % len(t_grid)]
        model = gbt_train(train, GbtConfig(T=T, w=w, depth=1), trace_metrics="loss-only")
        g_avg = model.predict_logit(train.features, mode="average")
        measured = dual_smooth_ce(LogitSet(g_avg, train.labels))
        bound = bounds_mod.gbt_training_bound(bounds_mod.BoundInputs(gamma=gamma, w=w, T=T))
        if measured > bound + 1e-9:
            failures.append(
                {"case": i, "seed": case_seed, "detail": f"gbt bound violated: measured={measured} bound={bound} w={w} T={T}"}
            )
        # kernel Cesaro bound on the same data
        km = kb_train(train, KernelSpec("gaussian", 1.0), w=1.0, T=20, trace_metrics="loss-only")
        cesaro = float(np.mean([row.hnorm**2 for row in km.trace[:20]]))
        cap = 2.0 * math.log(2.0) / (1.0 * 20)
        if cesaro > cap + 1e-9:
            failures.append({"case": i, "seed": case_seed, "detail": f"kernel Cesaro violated: {cesaro} > {cap}"})
    return VerificationReport("bounds", count, seed, failures, [])


def _verify_gradients(seed: int, count: int) -> VerificationReport:
    failures = []
    for i in range(count):
        case_seed = child_seed(seed, f"gradients/{i}")
        gen = uniform_stream(case_seed, "instance")
        m = 2 * int(gen.integers(1, 5))  # 2..8
        d = int(gen.integers(1, 4))
        n = int(gen.integers(1, 6))
        X = normals(gen, n * d).reshape(n, d)
        y = (gen.random(n) < 0.5).astype(np.int64)
        activation = "sigmoid" if i % 2 == 0 else "tanh"
        params = nn_init_symmetric(m, d, 1.0, case_seed, beta=0.5, activation=activation)
        # move off the symmetric point so the test is not trivially zero
        params.theta = params.theta + 0.3 * normals(gen, m * d).reshape(m, d)
        batch = Dataset(X, y)
        analytic = nn_param_gradient(params, batch)
        err = _fd_max_rel_err(params, batch, analytic)
        if err >= 1e-5:
            failures.append({"case": i, "seed": case_seed, "detail": f"max rel err {err} (m={m}, d={d}, n={n})"})
    return VerificationReport("gradients", count, seed, failures, [])


def _fd_max_rel_err(params, batch, analytic, h: float = 1e-5) -> float:
    from .losses import log_loss_from_logits

    worst = 0.0
    for r in range(params.m):
        for j in range(params.dim):
            orig = params.theta[r, j]
            params.theta[r, j] = orig + h
            up = log_loss_from_logits(nn_forward(params, batch.features), batch.labels)
            params.theta[r, j] = orig - h
            down = log_loss_from_logits(nn_forward(params, batch.features), batch.labels)
            params.theta[r, j] = orig
            fd = (up - down) / (2 * h)
            rel = abs(analytic[r, j] - fd) / (abs(analytic[r, j]) + 1e-8)
            worst = max(worst, rel)
    return worst


_SUITES = {
    "oracle": _verify_oracle,
    "descent": _verify_descent,
    "bounds": _verify_bounds,
    "gradients": _verify_gradients,
}


def run_verification(suite: str, seed: int = 0, count: int = 50, kb_stepsize: float = 1.0) -> VerificationReport:
    """Run ``count`` randomized checks of one suite; failures carry repro seeds."""
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {sorted(_SUITES)}")
    if suite == "descent":
        return _verify_descent(seed, count, kb_stepsize)
    return _SUITES[suite](seed, count)


def metrics_cmd(path, mode: str, num_bins: int = 10, bandwidth: float = 1.0) -> MetricReport:
    """Compute a MetricReport from a two-column (value, label) CSV file."""
    from .metrics import logit_set_from_csv, prediction_set_from_csv

    if mode == "prob":
        data = prediction_set_from_csv(path)
    elif mode == "logit":
        data = logit_set_from_csv(path)
    else:
        raise ValueError(f"mode must be 'prob' or 'logit', got {mode!r}")
    return metric_report(data, num_bins=num_bins, bandwidth=bandwidth)
