"""Risk arithmetic shared by both agents.

Every function here is a small pure formula; the simulation loop composes
them.  Costs are monetary (interruption cost of the component), probabilities
are plain floats in [0, 1], and time is in abstract work units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .scenario import AccessComplexity, TTCParams

# Success floor/ceiling for a single exploit attempt: nothing is a sure
# thing and nothing is truly impossible once a vulnerability exists.
MIN_SUCCESS_RATE = 0.01
MAX_SUCCESS_RATE = 1.0

# Effort score per access-complexity class, scaled from the inverted CVSS v2
# coefficients (0.71 / 0.61 / 0.35) onto a 0..10 axis.
COMPLEXITY_OF_AC = {
    AccessComplexity.LOW: 2.9,
    AccessComplexity.MEDIUM: 3.9,
    AccessComplexity.HIGH: 6.5,
}

_PATH_LENGTH_BONUS_CAP = 3.5
_PATH_LENGTH_BONUS_STEP = 0.5


def time_to_compromise(params: TTCParams, p1: float, u: float) -> float:
    """Expected effort: a fast known-exploit stage hit with probability p1,
    else a slow research stage that skilled attackers (u -> 0) shortcut."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 out of [0,1]: {p1}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u out of [0,1]: {u}")
    return params.t1 * p1 + params.t2 * (1.0 - p1) * (1.0 - u)


def known_exploit_probability(skill: float, vuln_count: int, coeff: float = 1.0) -> float:
    """Chance at least one usable ready-made exploit exists for the target."""
    if vuln_count < 0:
        raise ValueError("vuln_count must be >= 0")
    return 1.0 - math.exp(-vuln_count * skill * coeff)


def edge_weight(time_cost: float, consequence_cost: float, success_prob: float) -> float:
    """Attacker's planning weight: effort per unit of expected damage.

    Cheap, likely, damaging steps get small weights and are preferred.
    Callers must not pass success_prob 0; such steps are unusable and
    should be dropped from the graph instead.
    """
    if consequence_cost <= 0:
        raise ValueError(f"consequence cost must be positive, got {consequence_cost}")
    if success_prob <= 0:
        raise ValueError(f"success probability must be positive, got {success_prob}")
    return time_cost / (consequence_cost * success_prob)


def expected_risk(probabilities: dict[str, float], costs: dict[str, float]) -> float:
    """Plain expected loss: sum of compromise probability times cost."""
    return sum(probabilities[n] * costs[n] for n in probabilities)


def learned_risk(
    probabilities: dict[str, float],
    costs: dict[str, float],
    quality: dict[str, float],
) -> float:
    """Expected loss with the defender's learned importance factors.

    Nodes the defender has seen attacked carry quality > 1 and dominate the
    sum; with all factors at 1 this reduces exactly to expected_risk.
    """
    return sum(probabilities[n] * costs[n] * quality.get(n, 1.0) for n in probabilities)


def actual_success_rate(
    skill: float,
    exploitability: float,
    measure_effects: list[float] | None = None,
) -> float:
    """Per-attempt success chance, after defensive measures on the target."""
    rate = skill * (exploitability / 10.0)
    for effect in measure_effects or []:
        rate *= 1.0 - effect
    return min(max(rate, MIN_SUCCESS_RATE), MAX_SUCCESS_RATE)


def complexity_score(ac_values: list[AccessComplexity], hops: int) -> float:
    """Difficulty of a realized attack path on a 0..10 scale.

    Mean per-exploit effort plus a capped bonus for every extra hop past
    the first; an empty path scores 0.
    """
    if not ac_values:
        return 0.0
    base = sum(COMPLEXITY_OF_AC[ac] for ac in ac_values) / len(ac_values)
    bonus = min(_PATH_LENGTH_BONUS_CAP, _PATH_LENGTH_BONUS_STEP * max(hops - 1, 0))
    return min(max(base + bonus, 0.0), 10.0)


@dataclass
class RiskReport:
    """Defender-side risk snapshot for one round."""

    probabilities: dict[str, float] = field(default_factory=dict)
    costs: dict[str, float] = field(default_factory=dict)
    quality: dict[str, float] = field(default_factory=dict)

    @property
    def baseline(self) -> float:
        return expected_risk(self.probabilities, self.costs)

    @property
    def weighted(self) -> float:
        return learned_risk(self.probabilities, self.costs, self.quality)

    def node_risk(self, node_id: str) -> float:
        return (
            self.probabilities.get(node_id, 0.0)
            * self.costs.get(node_id, 0.0)
            * self.quality.get(node_id, 1.0)
        )
