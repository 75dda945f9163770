"""Closed-form average costs and optimizers for threshold and periodic policies.

Under Bernoulli(rate) arrivals a fixed-threshold policy renews at every
update, which gives the average cost per request in closed form:

    cost(tau) = (rate * sum_{t=1}^{tau-1} f(t) + p) / (rate * (tau - 1) + 1)

with the numerator and denominator being the expected cost and expected
number of requests in one update interval. The periodic-policy analogue
divides the per-period cost by the expected requests per period:

    cost(d) = (p + rate * sum_{t=1}^{d-1} f(t)) / (rate * d)

which is exact for the linear penalty; for other penalties it is a
plausible extension validated against simulation, not a derived result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CostModel, cap_threshold, check_rate


@dataclass(frozen=True)
class ThresholdSolution:
    """Best integer threshold plus the continuous minimizer it came from."""

    tau_star: int
    tau_continuous: float
    cost_at_tau_star: float
    clamped_to_cap: bool


@dataclass(frozen=True)
class PeriodSolution:
    """Best integer update period plus the continuous minimizer."""

    d_star: int
    d_continuous: float
    cost_at_d_star: float


@dataclass(frozen=True)
class RenewalExpectations:
    """Expected requests and expected cost in one update interval."""

    e_requests: float
    e_cost: float


def _penalty_prefix(model: CostModel, upto: int) -> float:
    """sum_{t=1}^{upto} f(t); zero for upto < 1."""
    if upto < 1:
        return 0.0
    return float(model.staleness.eval_array(np.arange(1, upto + 1)).sum())


def threshold_avg_cost(rate: float, model: CostModel, tau: int) -> float:
    """Average cost per request of the threshold-tau policy under Bernoulli(rate)."""
    check_rate(rate)
    if tau < 1:
        raise ValueError("tau must be >= 1")
    p = model.update_cost
    return (rate * _penalty_prefix(model, tau - 1) + p) / (rate * (tau - 1) + 1.0)


def _threshold_costs_upto(rate: float, model: CostModel, hi: int) -> np.ndarray:
    """Vector of threshold_avg_cost for tau = 1..hi."""
    f = model.staleness.eval_array(np.arange(1, hi, dtype=np.int64)) if hi > 1 else np.array([])
    prefix = np.concatenate(([0.0], np.cumsum(f)))
    taus = np.arange(1, hi + 1, dtype=np.float64)
    return (rate * prefix + model.update_cost) / (rate * (taus - 1.0) + 1.0)


def _linear_tau_continuous(rate: float, p: float) -> float:
    return (math.sqrt(2.0 * p * rate - rate + 1.0) + rate - 1.0) / rate


def _quadratic_tau_continuous(rate: float, p: float, hi: float) -> float:
    # Continuous minimizer of the closed form for the squared penalty solves
    # 1 - 6p - 6x + 6x^2 + rate*(4x - 1)*(x - 1)^2 = 0, which has a single
    # crossing on [1, cap + 1]; bisection to 1e-9.
    def g(x: float) -> float:
        return 1.0 - 6.0 * p - 6.0 * x + 6.0 * x * x + rate * (4.0 * x - 1.0) * (x - 1.0) ** 2

    lo = 1.0
    if g(lo) >= 0.0:
        return lo
    while g(hi) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-9:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_threshold(rate: float, model: CostModel) -> ThresholdSolution:
    """Cost-minimizing integer threshold, never above the cap threshold.

    The continuous minimizer is computed in closed form (linear penalty) or
    by root-finding (quadratic); its floor/ceil candidates are cross-checked
    against an exhaustive integer scan of the closed form over [1, cap],
    which wins any disagreement. Ties break toward the smaller threshold.
    """
    check_rate(rate)
    p = model.update_cost
    delta_star = cap_threshold(model)
    costs = _threshold_costs_upto(rate, model, delta_star)
    scan_best = int(np.argmin(costs)) + 1

    kind = model.staleness.kind
    if kind == "linear":
        tau_c = _linear_tau_continuous(rate, p)
    elif kind == "quadratic":
        tau_c = _quadratic_tau_continuous(rate, p, delta_star + 1.0)
    else:
        tau_c = float(scan_best)

    clamped = math.ceil(tau_c) > delta_star
    candidates = {min(max(int(math.floor(tau_c)), 1), delta_star),
                  min(max(int(math.ceil(tau_c)), 1), delta_star)}
    candidates.add(scan_best)
    tau_star = min(candidates, key=lambda t: (costs[t - 1], t))
    return ThresholdSolution(
        tau_star=tau_star,
        tau_continuous=tau_c,
        cost_at_tau_star=float(costs[tau_star - 1]),
        clamped_to_cap=clamped,
    )


def periodic_avg_cost(rate: float, model: CostModel, d: int) -> float:
    """Average cost per request of updating every d slots under Bernoulli(rate)."""
    check_rate(rate)
    if d < 1:
        raise ValueError("period must be >= 1")
    p = model.update_cost
    return (p + rate * _penalty_prefix(model, d - 1)) / (rate * d)


def optimal_period(rate: float, model: CostModel) -> PeriodSolution:
    """Cost-minimizing integer update period.

    Linear penalty: the continuous minimizer sqrt(2p/rate) is refined by
    comparing the closed form at its floor and ceil (ties go to the longer
    period, i.e. fewer updates). Other penalties: integer scan over a
    bounded range, smallest minimizer.
    """
    check_rate(rate)
    p = model.update_cost
    if model.staleness.kind == "linear":
        d_c = math.sqrt(2.0 * p / rate)
        cands = sorted({max(int(math.floor(d_c)), 1), max(int(math.ceil(d_c)), 1)})
        best = min(cands, key=lambda d: (periodic_avg_cost(rate, model, d), -d))
        return PeriodSolution(d_star=best, d_continuous=d_c,
                              cost_at_d_star=periodic_avg_cost(rate, model, best))
    hi = max(4 * cap_threshold(model), int(math.ceil(2.0 * math.sqrt(2.0 * p / rate))), 16)
    costs = np.array([periodic_avg_cost(rate, model, d) for d in range(1, hi + 1)])
    best = int(np.argmin(costs)) + 1
    return PeriodSolution(d_star=best, d_continuous=float(best), cost_at_d_star=float(costs[best - 1]))


def renewal_expectations(rate: float, model: CostModel, tau: int) -> RenewalExpectations:
    """Expected requests and cost per update interval of the threshold-tau policy.

    Their ratio equals threshold_avg_cost exactly.
    """
    check_rate(rate)
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return RenewalExpectations(
        e_requests=rate * (tau - 1) + 1.0,
        e_cost=model.update_cost + rate * _penalty_prefix(model, tau - 1),
    )
