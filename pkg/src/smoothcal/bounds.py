"""Closed-form training-side bounds and domination checks against traces.

All bounds are in nats (the loss is defined with the natural logarithm).
The population-level results with unspecified universal constants are not
evaluated here; only the training-side bounds with fully explicit constants.
"""

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .data import Dataset
from .losses import sigmoid
from .metrics import LogitSet

__all__ = [
    "BoundInputs",
    "gbt_training_bound",
    "kernel_training_bound",
    "nn_training_bound",
    "nn_bound_constant",
    "l1_grad_norm",
    "verify_stump_margin",
    "misclassification_rate",
    "optimal_gbt_stepsize",
    "suggested_schedule",
    "bound_report",
]

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class BoundInputs:
    """Inputs shared by the three training bounds; unused fields may stay None.

    L0 defaults to log 2, the loss of the zero initial predictor.
    """

    gamma: float
    w: float
    T: int
    B: float = 1.0
    L0: float = LOG2
    Lambda: float = 1.0
    m: Optional[int] = None
    beta: Optional[float] = None
    K1: Optional[float] = None
    K2: Optional[float] = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.w <= 0:
            raise ValueError("stepsize w must be positive")
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")
        if self.Lambda <= 0:
            raise ValueError("Lambda must be positive")


def gbt_training_bound(inputs: BoundInputs) -> float:
    """Averaged-predictor dual smooth CE bound L0/(gamma*B*w*T) + w*B/(8*gamma)."""
    if inputs.T < 2:
        raise ValueError("the boosting bound requires T >= 2")
    return inputs.L0 / (inputs.gamma * inputs.B * inputs.w * inputs.T) + inputs.w * inputs.B / (8.0 * inputs.gamma)


def kernel_training_bound(inputs: BoundInputs) -> float:
    """Averaged-predictor dual smooth CE bound (1/gamma) * sqrt(L0/(w*T))."""
    if inputs.T < 1:
        raise ValueError("T must be positive")
    if inputs.w >= 4.0 / inputs.Lambda:
        warnings.warn(
            f"stepsize w={inputs.w} is not below 4/Lambda={4.0 / inputs.Lambda}; "
            "the bound's descent premise fails",
            stacklevel=2,
        )
    return math.sqrt(inputs.L0 / (inputs.w * inputs.T)) / inputs.gamma


def nn_bound_constant(K1: float, K2: float) -> float:
    """Activation constant K = K1^4 + 2 K1^2 K2 + K1^4 K2^2."""
    return K1**4 + 2.0 * K1**2 * K2 + K1**4 * K2**2


def nn_training_bound(inputs: BoundInputs) -> float:
    """Min-over-iterates dual smooth CE bound for the two-layer network.

    sqrt((16 log 2)/(gamma^2 T) * (m^(2 beta - 1)/w + K)) with K from the
    activation's derivative bounds.
    """
    if inputs.T < 1:
        raise ValueError("T must be positive")
    if inputs.m is None or inputs.beta is None or inputs.K1 is None or inputs.K2 is None:
        raise ValueError("the NN bound needs m, beta, K1, and K2")
    if inputs.m <= 0 or inputs.K1 <= 0 or inputs.K2 <= 0:
        raise ValueError("m, K1, K2 must be positive")
    K = nn_bound_constant(inputs.K1, inputs.K2)
    inner = (16.0 * LOG2) / (inputs.gamma**2 * inputs.T) * (inputs.m ** (2.0 * inputs.beta - 1.0) / inputs.w + K)
    return math.sqrt(inner)


def l1_grad_norm(logits: LogitSet) -> float:
    """L1 norm of the functional gradient: mean |sigma(g) - y|.

    Upper-bounds the dual smooth CE of the same logits.
    """
    return float(np.mean(np.abs(sigmoid(logits.logits) - logits.labels)))


def misclassification_rate(logits: LogitSet) -> float:
    """Empirical error with the '(2y-1) g <= 0' convention (ties are errors)."""
    margin = (2.0 * logits.labels - 1.0) * logits.logits
    return float(np.mean(margin <= 0.0))


def verify_stump_margin(train: Dataset):
    """Certify the margin assumption with gamma = 1 via a separating stump.

    Scans all (feature, threshold) stumps in both orientations; if one
    perfectly separates the labels, B*sign(x_j - s) witnesses the weak-
    learnability margin with gamma = 1 for every sample reweighting.  A
    (False, 0.0) result only means this sufficient certificate failed.
    """
    y = train.labels
    if np.all(y == y[0]):  # single class separates trivially
        return True, 1.0
    for j in range(train.dim):
        xj = train.features[:, j]
        lo0, hi0 = xj[y == 0].min(), xj[y == 0].max()
        lo1, hi1 = xj[y == 1].min(), xj[y == 1].max()
        if hi0 < lo1 or hi1 < lo0:
            return True, 1.0
    return False, 0.0


def optimal_gbt_stepsize(L0: float, B: float, T: int) -> float:
    """Interior minimizer w* = sqrt(8 L0 / (B^2 T)) of the boosting bound."""
    if L0 <= 0 or B <= 0 or T <= 0:
        raise ValueError("L0, B, T must be positive")
    return math.sqrt(8.0 * L0 / (B**2 * T))


def suggested_schedule(bound_name: str, inputs: BoundInputs) -> dict:
    """Non-normative w = c/sqrt(T) style suggestions from the bound minimizers.

    The published asymptotic schedules hide universal constants; these
    recommendations only expose the explicit constant of the training bound.
    """
    if bound_name == "gbt":
        c = math.sqrt(8.0 * inputs.L0) / inputs.B
        return {
            "bound": "gbt",
            "rule": "w = c / sqrt(T)",
            "c": c,
            "note": "non-normative; minimizes the training bound at fixed T",
        }
    if bound_name == "kernel":
        return {
            "bound": "kernel",
            "rule": "any w < 4 / Lambda; bound scales as 1/sqrt(w T)",
            "w_cap": 4.0 / inputs.Lambda,
            "note": "non-normative",
        }
    if bound_name == "nn":
        if inputs.m is None or inputs.beta is None or inputs.K1 is None or inputs.K2 is None:
            raise ValueError("the NN schedule needs m, beta, K1, and K2")
        w_cap = min(inputs.m**-inputs.beta, 4.0 * inputs.m ** (2.0 * inputs.beta - 1.0) / (inputs.K1**2 + inputs.K2))
        return {
            "bound": "nn",
            "rule": "w at the admissible cap",
            "w_cap": w_cap,
            "note": "non-normative",
        }
    raise ValueError(f"unknown bound {bound_name!r}")


_BOUND_FNS = {
    "gbt": gbt_training_bound,
    "kernel": kernel_training_bound,
    "nn": nn_training_bound,
}


def bound_report(bound_name: str, inputs: BoundInputs, measured: float, gamma_certified: bool = False) -> dict:
    """Per-run verification record for the `verify-bounds` interface.

    ``dominated`` is a bool only when the caller certifies gamma; otherwise
    the string "uncertified" (the margin constant is not estimable in
    general, so an uncertified comparison is reported, not asserted).
    """
    if bound_name not in _BOUND_FNS:
        raise ValueError(f"unknown bound {bound_name!r}; expected one of {sorted(_BOUND_FNS)}")
    value = _BOUND_FNS[bound_name](inputs)
    dominated: Union[bool, str]
    if gamma_certified:
        dominated = bool(measured <= value + 1e-9)
    else:
        dominated = "uncertified"
    return {
        "bound_name": bound_name,
        "inputs": {k: v for k, v in asdict(inputs).items() if v is not None},
        "bound_value": value,
        "measured_value": measured,
        "dominated": dominated,
    }
