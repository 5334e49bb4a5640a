"""Two-layer network with symmetric initialization and full-batch GD.

The logit is g(x) = m^(-beta) * sum_r a_r * phi(theta_r . x) with fixed output
signs a_r = +1 for the first half of the hidden units and -1 for the second.
At initialization the second half duplicates the first half's weights, so the
network is exactly the zero function and the initial loss is log 2.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .data import Dataset
from .gbt import TraceRow, write_trace_csv
from .losses import log_loss_from_logits, sigmoid
from .metrics import LogitSet, PredictionSet, dual_smooth_ce, smooth_ce
from .rng import normals, uniform_stream

__all__ = [
    "ACTIVATIONS",
    "ActivationInfo",
    "NnParams",
    "NnConfig",
    "NnModel",
    "nn_init_symmetric",
    "nn_forward",
    "nn_param_gradient",
    "nn_train",
    "admissibility_report",
]


@dataclass(frozen=True)
class ActivationInfo:
    """Smooth activation with its derivative-bound constants K1, K2."""

    name: str
    fn: callable
    deriv: callable
    K1: float  # sup |phi'|
    K2: float  # sup |phi''|


def _sigmoid_deriv(z):
    s = sigmoid(z)
    return s * (1.0 - s)


def _tanh_deriv(z):
    t = np.tanh(z)
    return 1.0 - t * t


# sup|sigmoid''| = sqrt(3)/18, attained at sigma(z) = 1/2 - sqrt(3)/6;
# sup|tanh''| = 4/(3 sqrt(3)), attained at tanh(z) = 1/sqrt(3).
ACTIVATIONS: Dict[str, ActivationInfo] = {
    "sigmoid": ActivationInfo("sigmoid", sigmoid, _sigmoid_deriv, 0.25, math.sqrt(3.0) / 18.0),
    "tanh": ActivationInfo("tanh", np.tanh, _tanh_deriv, 1.0, 4.0 / (3.0 * math.sqrt(3.0))),
}


@dataclass
class NnParams:
    """Hidden weights theta (m, d), fixed signs a (+1 first half), scaling beta."""

    theta: np.ndarray
    a: np.ndarray
    beta: float
    activation: str = "sigmoid"

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if self.theta.ndim != 2:
            raise ValueError("theta must be an (m, d) matrix")
        m = len(self.theta)
        if m % 2 != 0:
            raise ValueError("hidden count m must be even")
        if self.a.shape != (m,) or not np.all(np.abs(self.a) == 1.0):
            raise ValueError("a must be a +/-1 vector of length m")
        if not np.all(self.a[: m // 2] == 1.0) or not np.all(self.a[m // 2 :] == -1.0):
            raise ValueError("a must be +1 on the first half and -1 on the second")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def m(self) -> int:
        return len(self.theta)

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def copy(self) -> "NnParams":
        return NnParams(self.theta.copy(), self.a.copy(), self.beta, self.activation)

    def to_json(self) -> str:
        return json.dumps(
            {
                "theta": self.theta.tolist(),
                "a": self.a.tolist(),
                "beta": self.beta,
                "m": self.m,
                "activation": self.activation,
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "NnParams":
        d = json.loads(payload)
        return cls(theta=np.array(d["theta"]), a=np.array(d["a"]), beta=d["beta"], activation=d["activation"])


@dataclass(frozen=True)
class NnConfig:
    T: int
    w: float = 0.01
    beta: float = 0.5
    m: int = 300
    activation: str = "sigmoid"
    init_std: float = 1.0
    checkpoint_stride: int = 0  # 0: keep only the final parameters

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.w <= 0:
            raise ValueError("stepsize w must be positive")
        if self.m <= 0 or self.m % 2 != 0:
            raise ValueError("m must be a positive even integer")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.init_std < 0:
            raise ValueError("init_std must be nonnegative")
        if self.checkpoint_stride < 0:
            raise ValueError("checkpoint_stride must be nonnegative")


def nn_init_symmetric(m: int, d: int, init_std: float, seed: int, beta: float = 0.5, activation: str = "sigmoid") -> NnParams:
    """Symmetric initialization: duplicated Gaussian rows with opposite signs.

    The paired +/- output signs cancel exactly, so the initial network is the
    zero function and the initial training loss is log 2.
    """
    if m <= 0 or m % 2 != 0:
        raise ValueError("m must be a positive even integer")
    half = m // 2
    base = normals(uniform_stream(seed, "nn-init"), half * d).reshape(half, d) * init_std
    theta = np.vstack([base, base.copy()])
    a = np.concatenate([np.ones(half), -np.ones(half)])
    return NnParams(theta=theta, a=a, beta=beta, activation=activation)


def nn_forward(params: NnParams, x) -> np.ndarray:
    """Batch logits: m^(-beta) * sum_r a_r phi(theta_r . x).  1-D input gives a scalar.

    The two sign halves are summed separately and subtracted, so duplicated
    halves cancel bitwise and the symmetric initialization returns exactly 0.
    """
    act = ACTIVATIONS[params.activation]
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    half = params.m // 2
    pos = act.fn(X @ params.theta[:half].T).sum(axis=1)
    neg = act.fn(X @ params.theta[half:].T).sum(axis=1)
    g = (pos - neg) / params.m**params.beta
    return float(g[0]) if single else g


def nn_param_gradient(params: NnParams, batch: Dataset) -> np.ndarray:
    """Exact (m, d) gradient of the mean cross-entropy over the batch."""
    act = ACTIVATIONS[params.activation]
    X = batch.features
    n = batch.n
    Z = X @ params.theta.T  # (n, m)
    residual = sigmoid(act.fn(Z) @ params.a / params.m**params.beta) - batch.labels
    weighted = act.deriv(Z) * residual[:, None]  # (n, m)
    return (weighted.T @ X) * (params.a[:, None] / params.m**params.beta) / n


def admissibility_report(config: NnConfig, n: Optional[int] = None, gamma: Optional[float] = None, delta: float = 0.05) -> dict:
    """Check the published admissibility conditions on (m, w, T); report only.

    The stepsize must satisfy w <= min(m^-beta, 4 m^(2 beta - 1)/(K1^2 + K2));
    the m and T conditions additionally need the margin gamma and are checked
    only when it is supplied.
    """
    act = ACTIVATIONS[config.activation]
    w_cap = min(config.m**-config.beta, 4.0 * config.m ** (2 * config.beta - 1) / (act.K1**2 + act.K2))
    report = {"w_ok": config.w <= w_cap, "w_cap": w_cap}
    if gamma is not None:
        if n is not None:
            m_floor = 16.0 * act.K1**2 / gamma**2 * math.log(2 * n / delta)
            report["m_ok"] = config.m >= m_floor
            report["m_floor"] = m_floor
        t_cap = math.floor(config.m * gamma**2 / (32.0 * config.w * act.K2**2 * math.log(2.0)))
        report["T_ok"] = config.T <= t_cap
        report["T_cap"] = t_cap
    return report


@dataclass
class NnModel:
    """Final parameters, per-iteration trace, and optional checkpoints."""

    config: NnConfig
    params: NnParams
    trace: List[TraceRow]
    checkpoints: Dict[int, NnParams] = field(default_factory=dict)

    @property
    def cesaro_sq_grad_l1(self) -> Optional[float]:
        """Mean over t = 0..T-1 of the squared L1 functional-gradient norm."""
        if self.config.T == 0:
            return None
        return float(np.mean([row.grad_l1**2 for row in self.trace[: self.config.T]]))

    @property
    def min_dual_smce(self) -> Optional[float]:
        """Min over t = 0..T-1 of the dual smooth CE (None in loss-only traces)."""
        rows = [row.dual_smce for row in self.trace[: self.config.T]]
        if not rows or any(v is None for v in rows):
            return None
        return float(min(rows))

    def trace_to_csv(self, path) -> None:
        write_trace_csv(path, self.trace)


def _nn_trace_row(t, logits, labels, full: bool) -> TraceRow:
    grad = sigmoid(logits) - labels
    row = TraceRow(t=t, log_loss=log_loss_from_logits(logits, labels), grad_l1=float(np.mean(np.abs(grad))))
    if full:
        row.dual_smce = dual_smooth_ce(LogitSet(logits, labels))
        row.smce = smooth_ce(PredictionSet(sigmoid(logits), labels))
    return row


def nn_train(train: Dataset, config: NnConfig, seed: int, trace_metrics: str = "full", warn_admissibility: bool = True) -> NnModel:
    """Full-batch gradient descent with constant stepsize; trace rows 0..T."""
    if trace_metrics not in ("full", "loss-only"):
        raise ValueError("trace_metrics must be 'full' or 'loss-only'")
    full = trace_metrics == "full"
    if warn_admissibility:
        report = admissibility_report(config)
        if not report["w_ok"]:
            warnings.warn(
                f"stepsize w={config.w} exceeds the admissible cap {report['w_cap']:.3g}; "
                "the published training bound may not apply",
                stacklevel=2,
            )
    params = nn_init_symmetric(config.m, train.dim, config.init_std, seed, beta=config.beta, activation=config.activation)
    checkpoints: Dict[int, NnParams] = {}
    trace: List[TraceRow] = []
    for t in range(config.T):
        if config.checkpoint_stride and t % config.checkpoint_stride == 0:
            checkpoints[t] = params.copy()
        trace.append(_nn_trace_row(t, nn_forward(params, train.features), train.labels, full))
        params.theta = params.theta - config.w * nn_param_gradient(params, train)
    trace.append(_nn_trace_row(config.T, nn_forward(params, train.features), train.labels, full))
    return NnModel(config=config, params=params, trace=trace, checkpoints=checkpoints)
