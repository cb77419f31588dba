"""Distances between spectral distributions and their analytic gradients.

The workhorse is the 1-D Wasserstein distance with |i - j| bin-index cost,
which collapses to the L1 distance between prefix-sum CDFs. A brute-force
transport-plan construction is kept alongside as an independent oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError
from .spectral import TimeSeries

_NORM_TOL = 1e-6
_KL_FLOOR = 1e-12
# Mass below this is treated as exhausted when building a transport plan.
_PLAN_EPS = 1e-15


@dataclass(eq=False)
class TransportPlan:
    """Nonnegative matrix moving row-marginal mass onto the column marginal."""

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.row_marginal = np.asarray(self.row_marginal, dtype=np.float64)
        self.col_marginal = np.asarray(self.col_marginal, dtype=np.float64)
        n, m = self.matrix.shape
        if self.row_marginal.shape != (n,) or self.col_marginal.shape != (m,):
            raise InvalidArgumentError("marginal lengths must match the plan shape")
        if np.any(self.matrix < -1e-12):
            raise InvalidDataError("transport plan entries must be nonnegative")
        if np.max(np.abs(self.matrix.sum(axis=1) - self.row_marginal)) > 1e-9:
            raise InvalidDataError("plan rows must sum to the row marginal")
        if np.max(np.abs(self.matrix.sum(axis=0) - self.col_marginal)) > 1e-9:
            raise InvalidDataError("plan columns must sum to the column marginal")


@dataclass(eq=False)
class GradPair:
    """Gradients of a distance with respect to both input distributions."""

    grad_p: np.ndarray
    grad_q: np.ndarray


def _check_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.ndim != 1 or q.ndim != 1 or p.size != q.size or p.size < 1:
        raise InvalidArgumentError("inputs must be equal-length nonempty 1-D vectors")
    for name, vec in (("p", p), ("q", q)):
        if not np.all(np.isfinite(vec)) or np.any(vec < -_NORM_TOL):
            raise InvalidDataError(f"{name} is not a valid probability vector")
        if abs(vec.sum() - 1.0) > _NORM_TOL + 1e-9:
            raise InvalidDataError(f"{name} must sum to 1 within {_NORM_TOL}")
    return p, q


def fwd_distance(p, q) -> float:
    """1-D Wasserstein distance between two histograms under |i - j| cost.

    Equals the sum of absolute prefix-sum (CDF) differences. The final
    prefix equals the total mass on both sides and is identically zero for
    normalized inputs, so it is excluded; this also makes the analytic
    gradient agree with finite differences of this function.
    """
    p, q = _check_pair(p, q)
    diff = np.cumsum(p - q)[:-1]
    return float(np.abs(diff).sum())


def fwd_gradient(p, q) -> GradPair:
    """Subgradient of fwd_distance in both arguments (sign(0) = 0 at ties).

    grad_p[k] = sum over i >= k of sign(CDF_i(p) - CDF_i(q)); grad_q is its
    negation.
    """
    p, q = _check_pair(p, q)
    signs = np.sign(np.cumsum(p - q)[:-1])
    grad_p = np.concatenate((np.cumsum(signs[::-1])[::-1], [0.0]))
    return GradPair(grad_p=grad_p, grad_q=-grad_p)


def wd_bruteforce_oracle(p, q) -> tuple[float, TransportPlan]:
    """Exact minimum-cost transport via the monotone north-west-corner plan.

    Optimal in 1-D for the convex |i - j| cost; intended as a test oracle,
    so the size is capped.
    """
    p, q = _check_pair(p, q)
    n = p.size
    if n > 64:
        raise InvalidArgumentError("oracle is limited to 64 bins")

    plan = np.zeros((n, n))
    remaining_p = p.copy()
    remaining_q = q.copy()
    i = j = 0
    while i < n and j < n:
        moved = min(remaining_p[i], remaining_q[j])
        if moved > 0:
            plan[i, j] += moved
            remaining_p[i] -= moved
            remaining_q[j] -= moved
        if remaining_p[i] <= _PLAN_EPS:
            i += 1
        elif remaining_q[j] <= _PLAN_EPS:
            j += 1

    idx = np.arange(n)
    cost = float((plan * np.abs(idx[:, None] - idx[None, :])).sum())
    return cost, TransportPlan(matrix=plan, row_marginal=p, col_marginal=q)


def kl_divergence(p, q) -> float:
    """KL divergence sum(p * ln(p/q)) with 0 ln 0 = 0 and q floored at 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise InvalidArgumentError("inputs must be equal-length 1-D vectors")
    q = np.maximum(q, _KL_FLOOR)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def frequency_ce(p, label_bin: int) -> float:
    """Cross-entropy of a spectral distribution against a ground-truth bin."""
    p = np.asarray(p, dtype=np.float64)
    if not 0 <= label_bin < p.size:
        raise InvalidArgumentError(f"label bin {label_bin} out of range for {p.size} bins")
    return float(-np.log(max(p[label_bin], _KL_FLOOR)))


def rectified_distribution(samples: np.ndarray) -> np.ndarray:
    """L1-normalized absolute value of a signal; uniform if identically zero."""
    mag = np.abs(np.asarray(samples, dtype=np.float64))
    total = mag.sum()
    if total == 0.0:
        return np.full(mag.size, 1.0 / mag.size)
    return mag / total


def time_domain_wd(x: TimeSeries, y: TimeSeries) -> float:
    """Wasserstein distance between rectified signals over time indices.

    Baseline counterpart of fwd_distance: each signal is rectified and
    L1-normalized into a distribution over its sample indices.
    """
    if len(x) != len(y):
        raise InvalidArgumentError("signals must have equal length")
    if x.rate != y.rate:
        raise InvalidArgumentError("signals must share a sample rate")
    return fwd_distance(rectified_distribution(x.samples), rectified_distribution(y.samples))
