"""Formula-level tests for the risk arithmetic."""

import math

import numpy as np
import pytest

from gridgame.risk import (
    actual_success_rate,
    complexity_score,
    edge_weight,
    expected_risk,
    known_exploit_probability,
    learned_risk,
    time_to_compromise,
    RiskReport,
)
from gridgame.scenario import AccessComplexity, TTCParams


def test_time_to_compromise_reference_point():
    # t1=2, t2=4, p1=0.5, u=0.5: 2*0.5 + 4*0.5*0.5 = 2.0
    assert time_to_compromise(TTCParams(t1=2.0, t2=4.0), p1=0.5, u=0.5) == 2.0


def test_time_to_compromise_limits():
    params = TTCParams(t1=1.0, t2=5.8)
    # Guaranteed ready-made exploit: only the fast stage remains.
    assert time_to_compromise(params, p1=1.0, u=0.3) == 1.0
    # No exploit and a fully unskilled attacker: the whole slow stage.
    assert time_to_compromise(params, p1=0.0, u=0.0) == 5.8
    # Perfect skill erases the slow stage entirely.
    assert time_to_compromise(params, p1=0.0, u=1.0) == 0.0


def test_time_to_compromise_monotone_in_skill():
    params = TTCParams()
    times = [time_to_compromise(params, p1=0.4, u=u) for u in np.linspace(0, 1, 11)]
    assert all(a >= b for a, b in zip(times, times[1:]))


def test_known_exploit_probability():
    assert known_exploit_probability(0.5, 0) == 0.0
    assert known_exploit_probability(0.5, 2) == pytest.approx(1 - math.exp(-1.0))
    assert known_exploit_probability(1.0, 100) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        known_exploit_probability(0.5, -1)


def test_edge_weight_formula():
    assert edge_weight(3.0, 6.0, 0.5) == 1.0
    assert edge_weight(1.0, 100.0, 1.0) == 0.01
    # Effort up -> weight up; damage or probability up -> weight down.
    assert edge_weight(2.0, 6.0, 0.5) > edge_weight(1.0, 6.0, 0.5)
    assert edge_weight(3.0, 12.0, 0.5) < edge_weight(3.0, 6.0, 0.5)
    assert edge_weight(3.0, 6.0, 1.0) < edge_weight(3.0, 6.0, 0.5)
    with pytest.raises(ValueError):
        edge_weight(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        edge_weight(1.0, 5.0, 0.0)


def test_risk_sums():
    probs = {"a": 0.5, "b": 0.25}
    costs = {"a": 100.0, "b": 400.0}
    assert expected_risk(probs, costs) == 150.0
    assert learned_risk(probs, costs, {"a": 2.0, "b": 1.0}) == 200.0
    # Unknown nodes default to quality 1.
    assert learned_risk(probs, costs, {}) == 150.0


def test_learned_risk_reduces_to_expected_when_quality_is_one():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        names = [f"n{i}" for i in range(n)]
        probs = {v: float(rng.uniform(0, 1)) for v in names}
        costs = {v: float(rng.uniform(0, 1e6)) for v in names}
        ones = {v: 1.0 for v in names}
        assert learned_risk(probs, costs, ones) == expected_risk(probs, costs)


def test_actual_success_rate():
    assert actual_success_rate(0.5, 8.0) == 0.4
    assert actual_success_rate(0.5, 8.0, [0.5]) == 0.2
    assert actual_success_rate(0.5, 8.0, [0.5, 0.5]) == 0.1
    # Floor and ceiling.
    assert actual_success_rate(0.01, 0.1) == 0.01
    assert actual_success_rate(1.0, 10.0) == 1.0


def test_complexity_score():
    low = AccessComplexity.LOW
    med = AccessComplexity.MEDIUM
    high = AccessComplexity.HIGH
    assert complexity_score([], 0) == 0.0
    assert complexity_score([low], 1) == 2.9
    assert complexity_score([med], 1) == 3.9
    assert complexity_score([high], 1) == 6.5
    assert complexity_score([low, high], 2) == pytest.approx((2.9 + 6.5) / 2 + 0.5)
    # Hop bonus saturates; score never leaves the scale.
    assert complexity_score([high, high], 8) == 10.0
    assert complexity_score([high], 100) == 10.0


def test_complexity_orders_harder_paths_higher():
    low = AccessComplexity.LOW
    high = AccessComplexity.HIGH
    easy = complexity_score([low, low], 2)
    hard = complexity_score([high, high], 2)
    longer = complexity_score([low, low, low], 3)
    assert hard > easy
    assert longer > easy


def test_risk_report_properties():
    report = RiskReport(
        probabilities={"a": 0.5, "b": 0.1},
        costs={"a": 10.0, "b": 1000.0},
        quality={"a": 1.0, "b": 3.0},
    )
    assert report.baseline == pytest.approx(105.0)
    assert report.weighted == pytest.approx(5.0 + 300.0)
    assert report.node_risk("b") == pytest.approx(300.0)
    assert report.node_risk("missing") == 0.0
