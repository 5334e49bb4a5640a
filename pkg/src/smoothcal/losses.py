"""Numerically stable sigmoid / cross-entropy helpers shared by all learners."""

import numpy as np
from scipy.special import expit

__all__ = ["sigmoid", "log_loss_from_logits", "log_loss_from_probs"]

_PROB_EPS = 1e-15


def sigmoid(z):
    return expit(z)


def log_loss_from_logits(logits, labels) -> float:
    """Mean cross-entropy in nats, computed without exponentiating positives.

    Uses the softplus identity  -y*log(sigma(g)) - (1-y)*log(1-sigma(g))
    = logaddexp(0, g) - y*g.
    """
    g = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=float)
    return float(np.mean(np.logaddexp(0.0, g) - y * g))


def log_loss_from_probs(probs, labels, eps: float = _PROB_EPS) -> float:
    """Mean cross-entropy from probabilities, clamped to keep the value finite."""
    p = np.clip(np.asarray(probs, dtype=float), eps, 1.0 - eps)
    y = np.asarray(labels, dtype=float)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
