"""Discrete-time replay of update policies against arrival sequences.

Event ordering inside a slot: requests arrive and observe the pre-decision
age, the policy decides, an update (if any) completes before the replies go
out, so requests in an update slot are served fresh at zero staleness, and
the age then steps (resets to 0 on update, otherwise grows by 1). The run
starts with age 1 at slot 1, as if an update had completed at slot 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrivals import ArrivalSequence, BernoulliSource, derive_seed, generate_bernoulli
from .core import CostBreakdown, CostModel, cap_threshold
from .policies import Policy


class NoCompletedInterval(ValueError):
    """Renewal statistics need at least one closed update interval."""


@dataclass(frozen=True)
class RenewalInterval:
    """Requests and cost between consecutive updates, closing update included."""

    n_requests: int
    total_cost: float


@dataclass(frozen=True, eq=False)
class SimResult:
    """Full cost accounting of one replay.

    ``request_charges`` (present when recorded) holds the staleness charged
    to each request of an occupied slot, aligned with the arrival sequence's
    ``slots``; update slots charge 0. ``update_slots`` is the realized
    update schedule.
    """

    breakdown: CostBreakdown
    avg_total: float
    avg_staleness: float
    avg_update: float
    renewal_intervals: tuple[RenewalInterval, ...]
    update_slots: np.ndarray
    request_charges: np.ndarray | None = None


@dataclass(frozen=True)
class RenewalStats:
    mean_requests_per_interval: float
    mean_cost_per_interval: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Aggregate of independent simulation runs."""

    per_run: tuple[SimResult, ...]
    mean_avg_total: float
    stderr: float

    @property
    def mean_avg_staleness(self) -> float:
        return float(np.mean([r.avg_staleness for r in self.per_run]))

    @property
    def mean_avg_update(self) -> float:
        return float(np.mean([r.avg_update for r in self.per_run]))


def simulate(
    policy: Policy,
    arrivals: ArrivalSequence,
    model: CostModel,
    record_requests: bool = False,
) -> SimResult:
    """Replay one policy over one arrival sequence and account every cost.

    Reactive policies are driven at request slots only; periodic and
    scheduled policies also fire on request-free slots (and still pay the
    update cost there). Costs are charged for the whole horizon of the
    arrival sequence.
    """
    if arrivals.n_requests < 1:
        raise ValueError("arrival sequence has no requests")
    if policy.is_reactive:
        thr = policy.tau if policy.kind == "threshold" else cap_threshold(model)
        return _replay_reactive(thr, arrivals, model, record_requests)
    return _replay_with_slot_updates(policy, arrivals, model, record_requests)


def _replay_reactive(thr, arrivals, model, record_requests):
    f = model.staleness
    p = model.update_cost
    slots = arrivals.slots.tolist()
    counts = arrivals.counts.tolist()
    charges = [] if record_requests else None
    ups = []
    intervals = []
    total_staleness = 0.0
    last_up = 0
    iv_requests = 0
    iv_staleness = 0.0
    for i in range(len(slots)):
        r = slots[i]
        k = counts[i]
        age = r - last_up
        if age >= thr:
            ups.append(r)
            last_up = r
            intervals.append(RenewalInterval(iv_requests + k, p + iv_staleness))
            iv_requests = 0
            iv_staleness = 0.0
            if charges is not None:
                charges.append(0.0)
        else:
            c = f(age)
            total_staleness += k * c
            iv_requests += k
            iv_staleness += k * c
            if charges is not None:
                charges.append(c)
    return _package(arrivals, model, total_staleness, ups, intervals, charges)


def _replay_with_slot_updates(policy, arrivals, model, record_requests):
    # Merge request slots with the policy's own update slots in slot order.
    f = model.staleness
    p = model.update_cost
    slots = arrivals.slots.tolist()
    counts = arrivals.counts.tolist()
    horizon = arrivals.horizon
    if policy.kind == "periodic":
        d = policy.period
        up_iter = range(d, horizon + 1, d)
    else:
        up_iter = [s for s in policy.update_slots if s <= horizon]
    charges = [] if record_requests else None
    ups = []
    intervals = []
    total_staleness = 0.0
    last_up = 0
    iv_requests = 0
    iv_staleness = 0.0
    n = len(slots)
    i = 0
    for u in up_iter:
        while i < n and slots[i] < u:
            r = slots[i]
            k = counts[i]
            c = f(r - last_up)
            total_staleness += k * c
            iv_requests += k
            iv_staleness += k * c
            if charges is not None:
                charges.append(c)
            i += 1
        k_here = 0
        if i < n and slots[i] == u:
            k_here = counts[i]
            if charges is not None:
                charges.append(0.0)
            i += 1
        ups.append(u)
        intervals.append(RenewalInterval(iv_requests + k_here, p + iv_staleness))
        iv_requests = 0
        iv_staleness = 0.0
        last_up = u
    while i < n:
        r = slots[i]
        k = counts[i]
        c = f(r - last_up)
        total_staleness += k * c
        iv_requests += k
        iv_staleness += k * c
        if charges is not None:
            charges.append(c)
        i += 1
    return _package(arrivals, model, total_staleness, ups, intervals, charges)


def _package(arrivals, model, total_staleness, ups, intervals, charges):
    n_req = arrivals.n_requests
    n_up = len(ups)
    total_update = model.update_cost * n_up
    breakdown = CostBreakdown(
        total_staleness=total_staleness,
        total_update=total_update,
        n_requests=n_req,
        n_updates=n_up,
    )
    return SimResult(
        breakdown=breakdown,
        avg_total=breakdown.total / n_req,
        avg_staleness=total_staleness / n_req,
        avg_update=total_update / n_req,
        renewal_intervals=tuple(intervals),
        update_slots=np.asarray(ups, dtype=np.int64),
        request_charges=None if charges is None else np.asarray(charges, dtype=np.float64),
    )


def simulate_many(
    policy: Policy,
    source: BernoulliSource,
    n_runs: int,
    n_requests_per_run: int,
    model: CostModel,
) -> SweepResult:
    """Independent replays on fresh Bernoulli sample paths.

    Run i draws its arrivals from a child seed derived from
    (source.seed, i), so the sweep is reproducible and runs are independent.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    results = []
    for i in range(n_runs):
        child = BernoulliSource(source.rate, derive_seed(source.seed, i))
        arrivals = generate_bernoulli(child, n_requests=n_requests_per_run)
        results.append(simulate(policy, arrivals, model))
    means = np.array([r.avg_total for r in results])
    stderr = float(np.std(means, ddof=1) / np.sqrt(n_runs)) if n_runs > 1 else 0.0
    return SweepResult(per_run=tuple(results), mean_avg_total=float(np.mean(means)), stderr=stderr)


SIM_CSV_HEADER = "policy,params,lambda,p,avg_total,avg_staleness,avg_update,n_requests,n_updates,seed"


def sim_csv_row(result: SimResult, policy: Policy, rate: float, model: CostModel, seed) -> str:
    """One flat CSV row describing a run, matching SIM_CSV_HEADER."""
    if policy.kind == "threshold":
        params = f"tau={policy.tau}"
    elif policy.kind == "periodic":
        params = f"d={policy.period}"
    elif policy.kind == "scheduled":
        params = f"n={len(policy.update_slots)}"
    else:
        params = ""
    b = result.breakdown
    return ",".join([
        policy.kind,
        params,
        format(rate, ".10g"),
        format(model.update_cost, ".10g"),
        format(result.avg_total, ".10g"),
        format(result.avg_staleness, ".10g"),
        format(result.avg_update, ".10g"),
        str(b.n_requests),
        str(b.n_updates),
        str(seed),
    ])


def renewal_stats(result: SimResult) -> RenewalStats:
    """Sample means over the completed update intervals of one replay.

    The trailing slots after the last update form an incomplete interval and
    are excluded here (they are still part of the result's cost breakdown).
    The ratio of the two means estimates the long-run average cost per
    request.
    """
    ivs = result.renewal_intervals
    if not ivs:
        raise NoCompletedInterval("replay contains no completed update interval")
    return RenewalStats(
        mean_requests_per_interval=float(np.mean([iv.n_requests for iv in ivs])),
        mean_cost_per_interval=float(np.mean([iv.total_cost for iv in ivs])),
    )
