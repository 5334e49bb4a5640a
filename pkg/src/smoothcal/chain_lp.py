"""Exact solver for the sorted-order ("chain") linear program behind smooth CE.

The empirical smooth calibration error is the optimum of

    max_w  sum_i c_i w_i   s.t.  |w_i - w_j| <= |v_i - v_j|,  w_i in [-1, 1],

where c_i is the i-th scaled residual.  After sorting by the anchor values v
only the adjacent constraints |w_{k+1} - w_k| <= d_k remain binding, because
adjacent gaps telescope: for sorted anchors, sum of consecutive budgets
between i and j equals |v_i - v_j| (see docs/lipschitz_chain_reduction.md and
the brute-force check in the test suite).

``solve_chain_lp`` runs an exact dynamic program over concave piecewise-linear
value functions: each stage applies a sliding-max widening of radius d_k, a
clip to the [-1, 1] box, and a linear tilt by c_k.  All three operations
preserve concave piecewise linearity, so the optimum is exact up to float
round-off (far below the 1e-9 contract).

``chain_lp_grid_value`` is an intentionally independent verification oracle:
a brute-force dynamic program over a discretized weight grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

__all__ = [
    "ChainLpProblem",
    "OracleSizeError",
    "solve_chain_lp",
    "chain_lp_grid_value",
    "evaluate_chain_objective",
]

# Refuse grid-oracle instances above this many (n * grid^2) notional transitions.
MAX_ORACLE_TRANSITIONS = 1e9


class OracleSizeError(ValueError):
    """Raised when a grid-oracle instance is too large to enumerate."""


@dataclass(frozen=True)
class ChainLpProblem:
    """Chain LP data: objective coefficients c and adjacent gap budgets d.

    The feasible set is {w in [-1,1]^n : |w_{k+1} - w_k| <= d_k}.
    """

    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.c, dtype=float))
        d = np.ascontiguousarray(np.asarray(self.d, dtype=float))
        if c.ndim != 1 or len(c) < 1:
            raise ValueError("c must be a nonempty vector")
        if d.shape != (len(c) - 1,):
            raise ValueError(f"d must have length n-1 = {len(c) - 1}, got {d.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("c must be finite")
        if len(d) and (not np.all(np.isfinite(d)) or np.min(d) < 0):
            raise ValueError("gap budgets d must be finite and nonnegative")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return len(self.c)


def _interp(xs: np.ndarray, vs: np.ndarray, x: float) -> float:
    return float(np.interp(x, xs, vs))


def _max_filter_clip(xs, vs, d):
    """Return breakpoints of x -> max_{|u-x|<=d, u in [-1,1]} V(u) on [-1, 1].

    For concave V the window max equals V evaluated at the projection of a
    global argmax onto the window, so the result is V's increasing part
    shifted left by d, a flat top of width 2d, and the decreasing part
    shifted right by d, re-clipped to the box.
    """
    i = int(np.argmax(vs))
    xstar = xs[i]
    vmax = vs[i]
    a = xstar - d  # flat top start (pre-clip)
    b = xstar + d

    left_lo = -1.0 + d
    jl = int(np.searchsorted(xs, left_lo, side="right"))
    left_x = xs[jl:i] - d
    left_v = vs[jl:i]

    right_hi = 1.0 - d
    jr = int(np.searchsorted(xs, right_hi, side="left"))
    right_x = xs[i + 1 : jr] + d
    right_v = vs[i + 1 : jr]

    lo = max(-1.0, a)
    hi = min(1.0, b)
    w_left = _interp(xs, vs, min(xstar, -1.0 + d))
    w_right = _interp(xs, vs, max(xstar, 1.0 - d))

    new_x = np.concatenate([[-1.0], left_x, [lo, hi], right_x, [1.0]])
    new_v = np.concatenate([[w_left], left_v, [vmax, vmax], right_v, [w_right]])

    # Drop duplicate breakpoints (construction may touch the same abscissa twice).
    keep = np.empty(len(new_x), dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(new_x) > 1e-15
    return new_x[keep], new_v[keep]


def solve_chain_lp(problem: ChainLpProblem):
    """Exact optimum of the chain LP plus one optimal weight vector.

    Returns (value, omega).  The value matches the true LP optimum to float
    round-off (well inside 1e-9 absolute); omega is feasible and attains it.
    """
    c = problem.c
    d = problem.d
    n = problem.n

    xs = np.array([-1.0, 1.0])
    vs = np.array([-c[0], c[0]])
    peaks = np.empty(n)
    peaks[0] = xs[int(np.argmax(vs))]
    for k in range(1, n):
        xs, vs = _max_filter_clip(xs, vs, float(d[k - 1]))
        vs = vs + c[k] * xs
        peaks[k] = xs[int(np.argmax(vs))]

    value = float(np.max(vs))

    omega = np.empty(n)
    omega[n - 1] = peaks[n - 1]
    for k in range(n - 2, -1, -1):
        lo = omega[k + 1] - d[k]
        hi = omega[k + 1] + d[k]
        omega[k] = min(max(peaks[k], lo), hi)
    return value, omega


def evaluate_chain_objective(problem: ChainLpProblem, omega) -> float:
    return float(np.dot(problem.c, np.asarray(omega, dtype=float)))


def chain_lp_grid_value(problem: ChainLpProblem, grid_step: float) -> float:
    """Brute-force DP over weights discretized to a grid of pitch ``grid_step``.

    Transitions between consecutive weights are allowed iff
    |w_{k+1} - w_k| <= d_k + grid_step/2, which admits the rounding of any
    feasible continuous solution; the returned value is within ``grid_step``
    of the exact optimum.  grid_step must lie in (0, 0.5]; the grid pitch is
    snapped so that the number of cells spanning [-1, 1] is integral.
    """
    if not 0 < grid_step <= 0.5:
        raise ValueError(f"grid_step must lie in (0, 0.5], got {grid_step}")
    cells = int(round(2.0 / grid_step))
    step = 2.0 / cells
    n = problem.n
    if n * (2.0 / step) ** 2 > MAX_ORACLE_TRANSITIONS:
        raise OracleSizeError(
            f"grid oracle refused: n={n} at step={step} exceeds "
            f"{MAX_ORACLE_TRANSITIONS:.0e} transitions"
        )
    grid = -1.0 + step * np.arange(cells + 1)
    val = problem.c[0] * grid
    for k in range(1, n):
        halfwidth = int(np.floor((problem.d[k - 1] + step / 2) / step + 1e-12))
        if halfwidth > 0:
            size = min(2 * halfwidth + 1, 2 * cells + 1)
            val = maximum_filter1d(val, size=size, mode="constant", cval=-np.inf)
        val = val + problem.c[k] * grid
    return float(np.max(val))
