"""Exact empirical calibration metrics.

Smooth CE and dual smooth CE are computed exactly through the chain LP
(:mod:`smoothcal.chain_lp`); binned ECE, interval CE, and MMCE follow their
standard empirical definitions.  ``metric_report`` bundles everything into
one record together with log loss, accuracy, and the mean absolute residual.
"""

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain_lp import ChainLpProblem, chain_lp_grid_value, solve_chain_lp
from .losses import log_loss_from_logits, log_loss_from_probs, sigmoid

__all__ = [
    "PredictionSet",
    "LogitSet",
    "MetricReport",
    "KernelPsdError",
    "build_chain_problem",
    "smooth_ce",
    "dual_smooth_ce",
    "smooth_ce_grid_oracle",
    "binned_ece",
    "interval_ce",
    "mmce",
    "accuracy",
    "metric_report",
    "read_value_label_csv",
    "prediction_set_from_csv",
    "logit_set_from_csv",
]

DUAL_LIPSCHITZ_SCALE = 0.25  # the sigmoid is 1/4-Lipschitz


class KernelPsdError(RuntimeError):
    """Raised when a kernel quadratic form is negative beyond round-off."""


def _check_labels(labels):
    y = np.ascontiguousarray(np.asarray(labels, dtype=np.int64))
    if y.ndim != 1 or len(y) < 1:
        raise ValueError("labels must be a nonempty vector")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must lie in {0, 1}")
    return y


@dataclass(frozen=True)
class PredictionSet:
    """Paired predicted probabilities in [0, 1] and binary labels."""

    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.probs, dtype=float))
        y = _check_labels(self.labels)
        if p.shape != y.shape:
            raise ValueError("probs and labels must have equal length")
        if not np.all(np.isfinite(p)) or np.min(p) < 0.0 or np.max(p) > 1.0:
            raise ValueError("probs must lie in [0, 1]")
        p.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def residuals(self) -> np.ndarray:
        """Per-sample y - v."""
        return self.labels - self.probs


@dataclass(frozen=True)
class LogitSet:
    """Paired finite logits and binary labels; induced probs are sigmoid(g)."""

    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(np.asarray(self.logits, dtype=float))
        y = _check_labels(self.labels)
        if g.shape != y.shape:
            raise ValueError("logits and labels must have equal length")
        if not np.all(np.isfinite(g)):
            raise ValueError("logits must be finite")
        g.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "logits", g)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return len(self.labels)

    def to_prediction_set(self) -> PredictionSet:
        return PredictionSet(sigmoid(self.logits), self.labels)


def build_chain_problem(data, lipschitz_scale: float):
    """Sorted-order chain LP for a PredictionSet or LogitSet.

    Points are sorted ascending by the anchor value (the prob, or the logit
    for the dual metric); c_i = (y - induced prob)_i / n in sorted order and
    d_k = lipschitz_scale * (anchor_{k+1} - anchor_k).  Returns the problem
    and the sort permutation.
    """
    if lipschitz_scale <= 0:
        raise ValueError("lipschitz_scale must be positive")
    if isinstance(data, PredictionSet):
        anchors = data.probs
        residuals = data.labels - data.probs
    elif isinstance(data, LogitSet):
        anchors = data.logits
        residuals = data.labels - sigmoid(data.logits)
    else:
        raise TypeError(f"expected PredictionSet or LogitSet, got {type(data)!r}")
    perm = np.argsort(anchors, kind="stable")
    anchors = anchors[perm]
    c = residuals[perm] / len(residuals)
    d = lipschitz_scale * np.diff(anchors)
    return ChainLpProblem(c, d), perm


def smooth_ce(preds: PredictionSet) -> float:
    """Empirical smooth CE: the exact chain-LP optimum on the prob scale."""
    problem, _ = build_chain_problem(preds, 1.0)
    value, _ = solve_chain_lp(problem)
    return max(value, 0.0)


def dual_smooth_ce(logits: LogitSet) -> float:
    """Empirical dual smooth CE: chain LP over 1/4-scaled logit gaps."""
    problem, _ = build_chain_problem(logits, DUAL_LIPSCHITZ_SCALE)
    value, _ = solve_chain_lp(problem)
    return max(value, 0.0)


def smooth_ce_grid_oracle(preds: PredictionSet, grid_step: float) -> float:
    """Independent brute-force check of ``smooth_ce`` (within grid_step)."""
    problem, _ = build_chain_problem(preds, 1.0)
    return chain_lp_grid_value(problem, grid_step)


def binned_ece(preds: PredictionSet, num_bins: int) -> float:
    """Binned ECE over equal-width bins; the last bin is right-closed."""
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    idx = np.minimum((preds.probs * num_bins).astype(np.int64), num_bins - 1)
    sums = np.bincount(idx, weights=preds.probs - preds.labels, minlength=num_bins)
    return float(np.sum(np.abs(sums)) / preds.n)


def interval_ce(preds: PredictionSet) -> float:
    """Minimum over interval partitions of binned ECE plus the width term.

    Groups are consecutive runs of the sorted unique predicted values; a
    group contributes |sum of its residuals|/n plus (spanned value range) *
    (member count)/n.  Solved exactly by an O(U^2) dynamic program over the
    U unique values.
    """
    order = np.argsort(preds.probs, kind="stable")
    v = preds.probs[order]
    r = (preds.probs - preds.labels)[order]
    u, start = np.unique(v, return_index=True)
    U = len(u)
    res_sums = np.add.reduceat(r, start)
    counts = np.diff(np.append(start, len(v)))

    S = np.concatenate([[0.0], np.cumsum(res_sums)])
    N = np.concatenate([[0.0], np.cumsum(counts)])
    best = np.empty(U + 1)
    best[0] = 0.0
    for t in range(1, U + 1):
        s = np.arange(t)
        cost = best[:t] + np.abs(S[t] - S[s]) + (u[t - 1] - u[s]) * (N[t] - N[s])
        best[t] = cost.min()
    return float(best[U] / preds.n)


def mmce(preds: PredictionSet, bandwidth: float) -> float:
    """Maximum mean calibration error with the Laplace kernel exp(-|u-v|/bw)."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    r = preds.labels - preds.probs
    K = np.exp(-np.abs(preds.probs[:, None] - preds.probs[None, :]) / bandwidth)
    radicand = float(r @ K @ r) / preds.n**2
    if radicand < -1e-12:
        raise KernelPsdError(f"Laplace kernel quadratic form is negative: {radicand}")
    return float(np.sqrt(max(radicand, 0.0)))


def accuracy(preds: PredictionSet) -> float:
    """Fraction correctly classified at threshold 0.5 (ties count as errors)."""
    signed = (2.0 * preds.labels - 1.0) * (preds.probs - 0.5)
    return float(np.mean(signed > 0))


_CSV_COLUMNS = (
    "smooth_ce",
    "dual_smooth_ce",
    "binned_ece",
    "interval_ce",
    "mmce",
    "mean_abs_residual",
    "log_loss",
    "accuracy",
)


@dataclass(frozen=True)
class MetricReport:
    """One-shot panel of calibration and accuracy metrics.

    ``dual_smooth_ce`` is present only when the report was computed from
    logits.  Always: 0 <= smooth_ce <= mean_abs_residual <= 1.
    """

    smooth_ce: float
    dual_smooth_ce: Optional[float]
    binned_ece: float
    interval_ce: float
    mmce: float
    mean_abs_residual: float
    log_loss: float
    accuracy: float

    CSV_COLUMNS = _CSV_COLUMNS

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in self.CSV_COLUMNS})

    def to_csv_row(self) -> list:
        return ["" if getattr(self, k) is None else repr(getattr(self, k)) for k in self.CSV_COLUMNS]


def metric_report(data, num_bins: int = 10, bandwidth: float = 1.0) -> MetricReport:
    """Full metric panel for a PredictionSet or LogitSet."""
    if isinstance(data, LogitSet):
        preds = data.to_prediction_set()
        dual = dual_smooth_ce(data)
        loss = log_loss_from_logits(data.logits, data.labels)
    elif isinstance(data, PredictionSet):
        preds = data
        dual = None
        loss = log_loss_from_probs(preds.probs, preds.labels)
    else:
        raise TypeError(f"expected PredictionSet or LogitSet, got {type(data)!r}")
    return MetricReport(
        smooth_ce=smooth_ce(preds),
        dual_smooth_ce=dual,
        binned_ece=binned_ece(preds, num_bins),
        interval_ce=interval_ce(preds),
        mmce=mmce(preds, bandwidth),
        mean_abs_residual=float(np.mean(np.abs(preds.residuals))),
        log_loss=loss,
        accuracy=accuracy(preds),
    )


def read_value_label_csv(path):
    """Read a two-column (value, label) CSV; a single header line is allowed.

    Returns (values, labels) as float/int arrays.  Raises ValueError with a
    line number for unparsable rows and for files without data rows.
    """
    values, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"line {lineno}: expected 2 columns, got {len(row)}")
            try:
                value = float(row[0])
            except ValueError:
                if lineno == 1:  # tolerate one header line
                    continue
                raise ValueError(f"line {lineno}: could not parse value '{row[0]}'") from None
            try:
                label = int(float(row[1]))
            except ValueError:
                raise ValueError(f"line {lineno}: could not parse label '{row[1]}'") from None
            if label not in (0, 1):
                raise ValueError(f"line {lineno}: label must be 0 or 1, got {row[1]}")
            values.append(value)
            labels.append(label)
    if not values:
        raise ValueError(f"{path}: no data rows")
    return np.array(values), np.array(labels, dtype=np.int64)


def prediction_set_from_csv(path) -> PredictionSet:
    values, labels = read_value_label_csv(path)
    return PredictionSet(values, labels)


def logit_set_from_csv(path) -> LogitSet:
    values, labels = read_value_label_csv(path)
    return LogitSet(values, labels)
