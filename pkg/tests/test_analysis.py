import numpy as np
import pytest

from agecost import (
    CostModel,
    InvalidRate,
    StalenessFn,
    cap_threshold,
    optimal_period,
    optimal_threshold,
    periodic_avg_cost,
    renewal_expectations,
    threshold_avg_cost,
)

from oracles import enumerate_renewal

LINEAR = StalenessFn.linear()
QUADRATIC = StalenessFn.quadratic()

RATES = (0.1, 0.3, 0.5, 0.9, 1.0)
COSTS = (2.0, 10.0, 50.0, 100.0)


def test_threshold_cost_reference_point():
    m = CostModel(LINEAR, 100.0)
    assert threshold_avg_cost(0.1, m, 37) == pytest.approx(166.6 / 4.6, abs=1e-12)
    assert threshold_avg_cost(0.1, m, 37) == pytest.approx(36.217, abs=1e-3)


def test_threshold_cost_tau_one_is_update_cost():
    for rate in RATES:
        for p in COSTS:
            for fn in (LINEAR, QUADRATIC):
                assert threshold_avg_cost(rate, CostModel(fn, p), 1) == p


def test_threshold_cost_dense_rate():
    assert threshold_avg_cost(1.0, CostModel(LINEAR, 50.0), 10) == 9.5


def test_invalid_rate():
    m = CostModel(LINEAR, 10.0)
    with pytest.raises(InvalidRate):
        threshold_avg_cost(0.0, m, 3)
    with pytest.raises(InvalidRate):
        periodic_avg_cost(1.5, m, 3)
    with pytest.raises(InvalidRate):
        optimal_threshold(-0.2, m)


def test_optimal_threshold_reference_points():
    sol = optimal_threshold(0.1, CostModel(LINEAR, 100.0))
    assert sol.tau_star == 37
    assert 36.71 <= sol.tau_continuous <= 36.73
    assert sol.cost_at_tau_star == pytest.approx(36.217, abs=1e-2)

    dense = optimal_threshold(1.0, CostModel(LINEAR, 50.0))
    assert dense.tau_star == 10
    assert dense.cost_at_tau_star == 9.5


def test_optimal_threshold_trace_operating_point():
    m = CostModel(LINEAR, 25.0)
    sol = optimal_threshold(0.4, m)
    assert sol.tau_continuous == pytest.approx(9.847, abs=1e-3)
    assert threshold_avg_cost(0.4, m, 9) == pytest.approx(9.381, abs=1e-3)
    assert threshold_avg_cost(0.4, m, 10) == pytest.approx(9.348, abs=1e-3)
    # 10 beats 9 by direct evaluation of the closed form
    assert sol.tau_star == 10


def test_optimal_threshold_exhaustive_over_cap_range():
    for rate in RATES:
        for p in COSTS:
            for fn in (LINEAR, QUADRATIC):
                m = CostModel(fn, p)
                sol = optimal_threshold(rate, m)
                costs = [threshold_avg_cost(rate, m, t) for t in range(1, cap_threshold(m) + 1)]
                assert sol.tau_star <= cap_threshold(m)
                assert sol.cost_at_tau_star == min(costs)
                assert costs[sol.tau_star - 1] == min(costs)


def test_optimal_threshold_clamps_to_cap():
    # Tiny rate pushes the continuous minimizer just past the cap.
    sol = optimal_threshold(0.001, CostModel(LINEAR, 5.0))
    assert sol.tau_continuous > 5.0
    assert sol.clamped_to_cap
    assert sol.tau_star <= 5


def test_optimal_threshold_quadratic():
    m = CostModel(QUADRATIC, 100.0)
    sol = optimal_threshold(0.5, m)
    costs = [threshold_avg_cost(0.5, m, t) for t in range(1, cap_threshold(m) + 1)]
    assert sol.cost_at_tau_star == min(costs)
    assert 1.0 <= sol.tau_continuous <= cap_threshold(m) + 1


def test_table_staleness_scan_route():
    m = CostModel(StalenessFn.from_table([0, 0.5, 1.0, 4.0, 9.0]), 3.5)
    sol = optimal_threshold(0.6, m)
    costs = [threshold_avg_cost(0.6, m, t) for t in range(1, cap_threshold(m) + 1)]
    assert sol.cost_at_tau_star == min(costs)


def test_periodic_cost_examples():
    assert periodic_avg_cost(0.5, CostModel(LINEAR, 50.0), 1) == 100.0
    assert periodic_avg_cost(0.4, CostModel(LINEAR, 25.0), 11) == pytest.approx(47.0 / 4.4, abs=1e-12)
    assert periodic_avg_cost(1.0, CostModel(LINEAR, 50.0), 10) == 9.5


def test_optimal_period_reference_points():
    sol = optimal_period(0.4, CostModel(LINEAR, 25.0))
    assert sol.d_continuous == pytest.approx(11.180, abs=1e-3)
    assert sol.d_star == 11
    assert sol.cost_at_d_star == pytest.approx(10.682, abs=1e-3)
    assert optimal_period(1.0, CostModel(LINEAR, 50.0)).d_star == 10


def test_optimal_period_tie_prefers_fewer_updates():
    # d = 1 and d = 2 cost exactly 1.0 each here; the longer period wins.
    m = CostModel(LINEAR, 0.5)
    sol = optimal_period(0.5, m)
    assert periodic_avg_cost(0.5, m, 1) == periodic_avg_cost(0.5, m, 2) == 1.0
    assert sol.d_star == 2
    assert sol.d_continuous == pytest.approx(np.sqrt(2.0))


def test_optimal_period_candidates_are_best():
    for rate in RATES:
        for p in COSTS:
            m = CostModel(LINEAR, p)
            sol = optimal_period(rate, m)
            lo = max(int(np.floor(sol.d_continuous)), 1)
            hi = max(int(np.ceil(sol.d_continuous)), 1)
            best = min(periodic_avg_cost(rate, m, d) for d in {lo, hi})
            assert sol.cost_at_d_star == best


def test_renewal_expectations_examples():
    m = CostModel(LINEAR, 10.0)
    exp = renewal_expectations(0.5, m, 3)
    assert exp.e_requests == 2.0
    assert exp.e_cost == 11.5
    one = renewal_expectations(0.3, m, 1)
    assert one.e_requests == 1.0
    assert one.e_cost == 10.0
    big = renewal_expectations(0.1, CostModel(LINEAR, 100.0), 37)
    assert big.e_cost / big.e_requests == pytest.approx(36.217, abs=1e-3)


def test_ratio_identity():
    for rate in RATES:
        for p in COSTS:
            for fn in (LINEAR, QUADRATIC):
                m = CostModel(fn, p)
                for tau in (1, 2, 5, 11, 23):
                    exp = renewal_expectations(rate, m, tau)
                    ratio = exp.e_cost / exp.e_requests
                    direct = threshold_avg_cost(rate, m, tau)
                    assert abs(ratio - direct) <= 1e-12 * max(1.0, abs(direct))


def test_enumeration_oracle_matches_formulas():
    for rate in (0.2, 0.5, 0.8):
        for tau in (1, 2, 3, 6, 12):
            for fn in (LINEAR, QUADRATIC):
                m = CostModel(fn, 10.0)
                exp = renewal_expectations(rate, m, tau)
                e_req, e_cost = enumerate_renewal(rate, m, tau)
                assert abs(exp.e_requests - e_req) <= 1e-9
                assert abs(exp.e_cost - e_cost) <= 1e-9


def test_linear_closed_expression_identity():
    # For the linear penalty the prefix sum is tau(tau-1)/2.
    for rate in RATES:
        for p in COSTS:
            m = CostModel(LINEAR, p)
            for tau in range(1, 60):
                direct = (rate * tau * (tau - 1) / 2.0 + p) / (rate * (tau - 1) + 1.0)
                assert threshold_avg_cost(rate, m, tau) == pytest.approx(direct, rel=1e-12)


def test_quadratic_closed_expression_identity():
    # Prefix sum of squares: (t-1)^3/3 + (t-1)^2/2 + (t-1)/6 at t = tau.
    for rate in (0.2, 0.7, 1.0):
        for p in (5.0, 80.0):
            m = CostModel(QUADRATIC, p)
            for tau in range(1, 30):
                k = tau - 1.0
                direct = (rate * (k**3 / 3.0 + k**2 / 2.0 + k / 6.0) + p) / (rate * k + 1.0)
                assert threshold_avg_cost(rate, m, tau) == pytest.approx(direct, rel=1e-12)


def test_vanishing_rate_limit():
    # As the rate vanishes every request triggers an update, so the cost per
    # request approaches the update cost. The residual at a fixed small rate
    # scales like rate * (tau - 1) * |tau/2 - p|, so the 1e-3 window is
    # checked over the whole capped threshold range at a moderate p.
    for p in (2.0, 10.0):
        m = CostModel(LINEAR, p)
        for tau in range(1, cap_threshold(m) + 1):
            assert abs(threshold_avg_cost(1e-6, m, tau) - p) < 1e-3
