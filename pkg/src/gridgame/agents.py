"""Attacker and defender decision logic.

The attacker plans least-effort paths over the action graph, keeps a
per-step success belief that sours with failures, and gets faster every
round.  The defender estimates risk from the same graph, spends income on
preventive measures picked greedily by risk reduction per unit cost, reacts
to detections by severing the offending link for the rest of the round, and
remembers where it was hurt through per-node importance factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .attack_graph import ActionEdge, action_node, cheapest_path, node_host
from .risk import (
    RiskReport,
    actual_success_rate,
    edge_weight,
    known_exploit_probability,
    time_to_compromise,
)
from .scenario import (
    CatalogEntry,
    Locality,
    ScenarioConfig,
    TopologyGraph,
)

# Success-rate proxy for reusing stolen valid credentials; there is no CVE
# to score, but valid accounts rarely bounce.
CREDENTIAL_EXPLOITABILITY = 9.0


class AttemptOutcome(Enum):
    SUCCESS = "success"
    RETRY = "retry"
    ABANDON = "abandon"


class NonTraversableError(Exception):
    """No reachable target or no usable path remains."""


@dataclass
class Belief:
    """Running success estimate for one step, optimistic until burned."""

    alpha: float = 2.0
    beta: float = 1.0

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def record(self, success: bool):
        if success:
            self.alpha += 1.0
        else:
            self.beta += 1.0


def _belief_key(edge: ActionEdge) -> tuple:
    return (edge.dst, edge.rule, edge.vuln_id or "")


@dataclass
class AttackerState:
    skill: float
    skill_increment: float
    omniscient: bool = False  # plan with true rates instead of beliefs
    beliefs: dict = field(default_factory=dict)
    compromised: set = field(default_factory=set)
    position: str = ""
    elapsed_time: float = 0.0
    goal: str = ""
    attacks_launched: int = 0

    def belief_for(self, edge: ActionEdge) -> Belief:
        return self.beliefs.setdefault(_belief_key(edge), Belief())

    def observe(self, edge: ActionEdge, success: bool):
        if not self.omniscient:
            self.belief_for(edge).record(success)


def update_skill(attacker: AttackerState) -> float:
    attacker.attacks_launched += 1
    attacker.skill = min(attacker.skill + attacker.skill_increment, 1.0)
    return attacker.skill


@dataclass
class Measure:
    kind: str  # catalog kind, or "reactive_block"
    target: tuple  # (node_id,), (node_id, vuln_id), or canonical link pair
    cost: float
    effect: float = 0.0
    technique: str = ""
    lead_rounds: int = 1  # preventive measures activate at the next boundary

    def identity(self) -> tuple:
        return (self.kind, self.target)


@dataclass
class DefenderState:
    capital: float
    funds: float
    income: float
    sensor_count: int
    catalog: list
    quality: dict = field(default_factory=dict)  # node -> Q >= 1
    active: list = field(default_factory=list)
    pending: list = field(default_factory=list)
    elapsed_time: float = 0.0
    spent: float = 0.0

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "DefenderState":
        return cls(
            capital=config.defender.capital,
            funds=config.defender.capital,
            income=config.defender.income,
            sensor_count=config.defender.sensor_count,
            catalog=list(config.defender.catalog),
        )

    def accrue(self, dt: float):
        if dt < 0:
            raise ValueError("time cannot run backwards")
        self.funds += self.income * dt
        self.elapsed_time += dt

    def activate_pending(self):
        self.active.extend(self.pending)
        self.pending = []

    def q_of(self, node_id: str) -> float:
        return self.quality.get(node_id, 1.0)

    def blocked_links(self) -> set:
        return {
            m.target for m in self.active if m.kind == "access_restriction"
        }

    def monitor_boost(self, link: tuple) -> float:
        return sum(
            m.effect for m in self.active
            if m.kind == "monitoring" and m.target == link
        )

    def effects_on(self, node_id: str, vuln_id: str | None) -> list:
        """Success-rate reductions active on a host, per exploited vuln.

        Patches apply only to their own vulnerability; hardening applies to
        every attempt against the host, credential reuse included.
        """
        out = []
        for measure in self.active:
            if measure.kind == "patching" and measure.target == (node_id, vuln_id):
                out.append(measure.effect)
            elif measure.kind == "hardening" and measure.target == (node_id,):
                out.append(measure.effect)
        return out

    def has_measure(self, identity: tuple) -> bool:
        return any(
            m.identity() == identity for m in self.active + self.pending
        )


def update_q(defender: DefenderState, detected_nodes: set, increment: float) -> dict:
    """Bump the importance factor once per node per round."""
    for node_id in sorted(detected_nodes):
        defender.quality[node_id] = defender.q_of(node_id) + increment
    return defender.quality


# --------------------------------------------------------------------------
# Attacker planning
# --------------------------------------------------------------------------

@dataclass
class PlanningContext:
    """Everything needed to weigh one action edge."""

    config: ScenarioConfig
    defender: DefenderState
    interactive: bool  # defender measures degrade true success rates

    def __post_init__(self):
        topo = self.config.topology
        self.outage = {n: p.outage_cost for n, p in topo.nodes.items()}
        self.vuln_count = {
            n: {
                Locality.REMOTE.value: sum(
                    1 for v in p.vulnerabilities if v.locality == Locality.REMOTE
                ),
                Locality.LOCAL.value: sum(
                    1 for v in p.vulnerabilities if v.locality == Locality.LOCAL
                ),
            }
            for n, p in topo.nodes.items()
        }
        self.exploitability = {
            v.id: v.exploitability for v in self.config.vulnerability_pool.values()
        }

    def edge_duration(self, attacker: AttackerState, edge: ActionEdge) -> float:
        """Expected effort for one attempt on this step."""
        engine = self.config.engine
        if edge.rule == "credential_lateral_movement":
            p1 = 1.0  # stolen credentials are the ready-made exploit
            locality = Locality.REMOTE.value
        else:
            locality = (
                Locality.LOCAL.value if edge.is_local else Locality.REMOTE.value
            )
            count = self.vuln_count[edge.dst_host][locality]
            p1 = known_exploit_probability(
                attacker.skill, count, engine.ttc.p1_coeff
            )
        return time_to_compromise(engine.ttc, p1, 1.0 - attacker.skill)

    def true_success_rate(self, attacker: AttackerState, edge: ActionEdge) -> float:
        if edge.vuln_id is not None:
            exploitability = self.exploitability[edge.vuln_id]
        else:
            exploitability = CREDENTIAL_EXPLOITABILITY
        effects = (
            self.defender.effects_on(edge.dst_host, edge.vuln_id)
            if self.interactive
            else []
        )
        return actual_success_rate(attacker.skill, exploitability, effects)

    def planning_probability(self, attacker: AttackerState, edge: ActionEdge) -> float:
        if attacker.omniscient:
            return self.true_success_rate(attacker, edge)
        return attacker.belief_for(edge).mean

    def edge_planning_weight(self, attacker: AttackerState, edge: ActionEdge) -> float:
        cost = max(self.outage[edge.dst_host], self.config.engine.c_min)
        prob = self.planning_probability(attacker, edge)
        return edge_weight(self.edge_duration(attacker, edge), cost, prob)


@dataclass
class Plan:
    cost: float
    nodes: list
    edges: list  # ActionEdge per hop


def build_adjacency(
    context: PlanningContext,
    attacker: AttackerState,
    edges: list,
    excluded: set,
) -> tuple:
    """Best action edge per (src, dst) pair with its planning weight."""
    best: dict = {}
    for edge in edges:
        if edge.identity() in excluded:
            continue
        weight = context.edge_planning_weight(attacker, edge)
        key = (edge.src, edge.dst)
        ranked = (weight, edge.rule, edge.vuln_id or "")
        if key not in best or ranked < best[key][0]:
            best[key] = (ranked, edge)
    adjacency: dict = {}
    edge_map: dict = {}
    for (src, dst), (ranked, edge) in sorted(best.items()):
        adjacency.setdefault(src, []).append((dst, ranked[0]))
        edge_map[(src, dst)] = edge
    return adjacency, edge_map


def plan_path(
    context: PlanningContext,
    attacker: AttackerState,
    edges: list,
    sources: set,
    goal: str,
    excluded: set = frozenset(),
) -> Plan | None:
    adjacency, edge_map = build_adjacency(context, attacker, edges, excluded)
    found = cheapest_path(adjacency, sorted(sources), {goal})
    if found is None:
        return None
    cost, nodes = found
    hop_edges = [edge_map[(a, b)] for a, b in zip(nodes, nodes[1:])]
    return Plan(cost=cost, nodes=nodes, edges=hop_edges)


def reachable_action_nodes(edges: list, sources: set) -> set:
    adjacency: dict = {}
    for edge in edges:
        adjacency.setdefault(edge.src, []).append(edge.dst)
    seen = set(sources)
    stack = sorted(seen)
    while stack:
        cur = stack.pop()
        for nxt in adjacency.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def select_target(
    topology: TopologyGraph,
    edges: list,
    sources: set,
) -> str:
    """Most expensive host the attacker could plausibly reach, excluding
    ground already held.  Ties break on the lexicographically first id."""
    held = {node_host(n) for n in sources}
    reachable = {
        node_host(n) for n in reachable_action_nodes(edges, sources)
    } - held
    if not reachable:
        raise NonTraversableError("no reachable target from current foothold")
    return max(
        sorted(reachable), key=lambda n: topology.nodes[n].outage_cost
    )


def attempt_action(
    rng,
    attacker: AttackerState,
    defender: DefenderState,
    context: PlanningContext,
    edge: ActionEdge,
    abandon_threshold: float,
) -> tuple:
    """One exploit attempt.  Returns (outcome, duration, success_rate).

    Time passes and defender income accrues whether or not the attempt
    lands; a failed step is retried until the attacker's belief in it drops
    under the abandon threshold, at which point they go replan.
    """
    duration = context.edge_duration(attacker, edge)
    rate = context.true_success_rate(attacker, edge)
    success = bool(rng.random() < rate)
    attacker.elapsed_time += duration
    defender.accrue(duration)
    attacker.observe(edge, success)
    if success:
        attacker.compromised.add(edge.dst)
        attacker.position = edge.dst
        return AttemptOutcome.SUCCESS, duration, rate
    believed = (
        context.true_success_rate(attacker, edge)
        if attacker.omniscient
        else attacker.belief_for(edge).mean
    )
    if believed < abandon_threshold:
        return AttemptOutcome.ABANDON, duration, rate
    return AttemptOutcome.RETRY, duration, rate


# --------------------------------------------------------------------------
# Defender estimation and planning
# --------------------------------------------------------------------------

def estimate_probabilities(
    topology: TopologyGraph,
    edges: list,
    defender: DefenderState,
) -> dict:
    """Defender-side compromise probability per host.

    Entry points are treated as lost (internet-facing), unreachable hosts
    as safe, and everything else gets the most exploitable unpatched way
    in, discounted by active measures.  The defender does not know the
    attacker's skill, so raw exploitability stands in for it.
    """
    entries = set(topology.entry_points)
    sources = {action_node(e, "user") for e in entries}
    reachable_hosts = {
        node_host(n) for n in reachable_action_nodes(edges, sources)
    }
    probs: dict = {}
    incoming: dict = {}
    for edge in edges:
        incoming.setdefault(edge.dst_host, []).append(edge)
    for node_id in topology.sorted_node_ids():
        if node_id in entries:
            probs[node_id] = 1.0
            continue
        if node_id not in reachable_hosts:
            probs[node_id] = 0.0
            continue
        best = 0.0
        for edge in incoming.get(node_id, ()):
            if edge.vuln_id is not None:
                exploitability = next(
                    v.exploitability
                    for v in topology.nodes[node_id].vulnerabilities
                    if v.id == edge.vuln_id
                )
            else:
                exploitability = CREDENTIAL_EXPLOITABILITY
            rate = exploitability / 10.0
            for effect in defender.effects_on(node_id, edge.vuln_id):
                rate *= 1.0 - effect
            best = max(best, rate)
        probs[node_id] = best
    return probs


def risk_report(
    topology: TopologyGraph,
    edges: list,
    defender: DefenderState,
) -> RiskReport:
    return RiskReport(
        probabilities=estimate_probabilities(topology, edges, defender),
        costs={n: p.outage_cost for n, p in topology.nodes.items()},
        quality={n: defender.q_of(n) for n in topology.nodes},
    )


def _is_bridge(topology: TopologyGraph, link: tuple, already_blocked: set) -> bool:
    """Would severing this link disconnect currently-connected hosts?"""
    keep = [
        e.key() for e in topology.edges
        if e.key() != link and e.key() not in already_blocked
    ]
    adjacency: dict = {n: set() for n in topology.nodes}
    for a, b in keep:
        adjacency[a].add(b)
        adjacency[b].add(a)
    a, b = link
    seen = {a}
    stack = [a]
    while stack:
        cur = stack.pop()
        for nxt in adjacency[cur]:
            if nxt == b:
                return False
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def _candidate_measures(
    topology: TopologyGraph,
    edges: list,
    report: RiskReport,
    defender: DefenderState,
) -> list:
    """(gain, measure) candidates; gain is estimated campaign-risk removed."""
    blocked = defender.blocked_links()
    incoming: dict = {}
    for edge in edges:
        incoming.setdefault(edge.dst_host, []).append(edge)
    catalog = {entry.kind: entry for entry in defender.catalog}
    out: list = []

    def add(entry: CatalogEntry, target: tuple, gain: float):
        measure = Measure(
            kind=entry.kind,
            target=target,
            cost=entry.cost,
            effect=entry.effect,
            technique=entry.technique,
        )
        if gain > 0 and not defender.has_measure(measure.identity()):
            out.append((gain, measure))

    for node_id in topology.sorted_node_ids():
        node_risk = report.node_risk(node_id)
        if "patching" in catalog:
            entry = catalog["patching"]
            exploited_here = sorted(
                {e.vuln_id for e in incoming.get(node_id, ()) if e.vuln_id}
            )
            for vuln_id in exploited_here:
                add(entry, (node_id, vuln_id), node_risk * entry.effect)
        if "hardening" in catalog:
            entry = catalog["hardening"]
            add(entry, (node_id,), node_risk * entry.effect)

    links = sorted({e.key() for e in topology.edges} - blocked)
    for link in links:
        if "access_restriction" in catalog:
            entry = catalog["access_restriction"]
            # Risk removed scales with how much of each host's exposure
            # arrives over this link; bridges stay up to keep the plant
            # running.
            gain = 0.0
            for node_id, in_edges in sorted(incoming.items()):
                crossing = sum(1 for e in in_edges if link in e.links)
                if crossing:
                    gain += report.node_risk(node_id) * crossing / len(in_edges)
            if gain > 0 and not _is_bridge(topology, link, blocked):
                add(entry, link, gain)
        if "monitoring" in catalog:
            entry = catalog["monitoring"]
            gain = entry.effect * (
                report.node_risk(link[0]) + report.node_risk(link[1])
            ) / 2.0
            add(entry, link, gain)
    return out


def defender_plan(
    topology: TopologyGraph,
    edges: list,
    report: RiskReport,
    defender: DefenderState,
) -> list:
    """Greedy spend: best risk-reduction per currency unit first.

    Purchases land in ``pending`` and activate at the next round boundary;
    funds decrease by exactly the summed costs.
    """
    candidates = _candidate_measures(topology, edges, report, defender)
    candidates.sort(key=lambda item: (-item[0] / item[1].cost if item[1].cost > 0
                                      else -math.inf, item[1].kind, item[1].target))
    bought: list = []
    for gain, measure in candidates:
        if measure.cost > defender.funds:
            continue
        defender.funds -= measure.cost
        defender.spent += measure.cost
        defender.pending.append(measure)
        bought.append(measure)
    return bought


def react(defender: DefenderState, link: tuple) -> Measure:
    """Reactive block: free, instant, and scoped to the current round."""
    return Measure(
        kind="reactive_block",
        target=link,
        cost=0.0,
        technique="D3-NI",
        lead_rounds=0,
    )
