"""Attacker and defender behavior tests on small handmade topologies."""

import math

import pytest

from gridgame.agents import (
    AttackerState,
    AttemptOutcome,
    Belief,
    DefenderState,
    NonTraversableError,
    PlanningContext,
    attempt_action,
    defender_plan,
    estimate_probabilities,
    plan_path,
    react,
    risk_report,
    select_target,
    update_q,
    update_skill,
)
from gridgame.attack_graph import Derivation, action_edges, facts_from_topology
from gridgame.scenario import load_scenario_dict


class FixedRng:
    """Deterministic stand-in feeding preset uniform draws."""

    def __init__(self, draws):
        self.draws = list(draws)

    def random(self):
        return self.draws.pop(0)


def make_config(nodes, edges, entries, pool, catalog=None, **defender_extra):
    doc = {
        "topology": {
            "nodes": nodes,
            "edges": [{"a": a, "b": b} for a, b in edges],
            "subnets": [[n["node_id"] for n in nodes]],
            "entry_points": entries,
        },
        "vulnerability_pool": pool,
        "defender": {"capital": 5000, "income": 5, "sensor_count": 2,
                     **defender_extra},
        "attacker": {},
        "engine": {"rounds": 1, "seed": 0},
    }
    if catalog is not None:
        doc["defender"]["catalog"] = catalog
    return load_scenario_dict(doc)


POOL = [
    {"id": "CVE-R", "access_complexity": "Low", "exploitability": 8.0,
     "locality": "remote", "consequence": "codeExec"},
    {"id": "CVE-L", "access_complexity": "Medium", "exploitability": 3.4,
     "locality": "local", "consequence": "privEscalation"},
]


def two_host(catalog=None, **defender_extra):
    return make_config(
        nodes=[
            {"node_id": "dmz", "purdue_level": 5, "peak_power_kw": 2.0,
             "outage_cost": 50.0, "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 80}]},
            {"node_id": "plc", "purdue_level": 1, "peak_power_kw": 400.0,
             "outage_cost": 9000.0, "vulnerabilities": ["CVE-R", "CVE-L"],
             "services": [{"protocol": "tcp", "port": 502}]},
        ],
        edges=[("dmz", "plc")],
        entries=["dmz"],
        pool=POOL,
        catalog=catalog,
        **defender_extra,
    )


def edges_for(config, blocked=()):
    derivation = Derivation(
        facts_from_topology(config.topology, blocked), full_provenance=False
    )
    return action_edges(derivation)


def remote_edge(edges, dst):
    return next(
        e for e in edges if e.rule == "remote_exploit" and e.dst == dst
    )


# -- attacker ---------------------------------------------------------------

def test_skill_schedule_caps_at_one():
    attacker = AttackerState(skill=0.5, skill_increment=0.02)
    trace = [attacker.skill]
    for _ in range(30):
        trace.append(update_skill(attacker))
    for k in range(31):
        assert trace[k] == pytest.approx(min(0.5 + 0.02 * k, 1.0))
    assert trace[25] == pytest.approx(1.0)
    assert trace[24] < 1.0
    assert attacker.attacks_launched == 30


def test_belief_starts_optimistic_and_decays():
    belief = Belief()
    assert belief.mean == pytest.approx(2.0 / 3.0)
    belief.record(False)
    assert belief.mean == pytest.approx(0.5)
    belief.record(True)
    assert belief.mean == pytest.approx(0.6)


def test_repeated_failure_leads_to_abandonment():
    cfg = two_host()
    attacker = AttackerState(skill=0.5, skill_increment=0.02)
    defender = DefenderState.from_config(cfg)
    context = PlanningContext(cfg, defender, interactive=True)
    edge = remote_edge(edges_for(cfg), "plc")
    rng = FixedRng([0.99] * 10)  # every draw misses
    outcomes = []
    for _ in range(8):
        outcome, _, _ = attempt_action(
            rng, attacker, defender, context, edge, 0.2
        )
        outcomes.append(outcome)
    # belief mean after f failures is 2/(3+f); first dip below 0.2 is f=8
    assert outcomes[:7] == [AttemptOutcome.RETRY] * 7
    assert outcomes[7] is AttemptOutcome.ABANDON


def test_success_updates_position_and_belief():
    cfg = two_host()
    attacker = AttackerState(skill=0.5, skill_increment=0.02)
    defender = DefenderState.from_config(cfg)
    context = PlanningContext(cfg, defender, interactive=True)
    edge = remote_edge(edges_for(cfg), "plc")
    # skill 0.5 on exploitability 8.0 gives a 0.4 true rate
    outcome, duration, rate = attempt_action(
        FixedRng([0.39]), attacker, defender, context, edge, 0.2
    )
    assert outcome is AttemptOutcome.SUCCESS
    assert rate == pytest.approx(0.4)
    assert duration > 0
    assert attacker.position == "plc"
    assert "plc" in attacker.compromised
    assert attacker.elapsed_time == pytest.approx(duration)
    assert defender.elapsed_time == pytest.approx(duration)
    assert attacker.belief_for(edge).mean == pytest.approx(3.0 / 4.0)


def test_omniscient_attacker_keeps_no_beliefs():
    cfg = two_host()
    attacker = AttackerState(skill=0.5, skill_increment=0.02, omniscient=True)
    defender = DefenderState.from_config(cfg)
    context = PlanningContext(cfg, defender, interactive=False)
    edge = remote_edge(edges_for(cfg), "plc")
    attempt_action(FixedRng([0.99]), attacker, defender, context, edge, 0.2)
    assert attacker.beliefs == {}
    assert context.planning_probability(attacker, edge) == pytest.approx(0.4)


def test_credential_step_uses_ready_exploit_duration():
    cfg = make_config(
        nodes=[
            {"node_id": "eng", "purdue_level": 3, "outage_cost": 100.0,
             "vulnerabilities": ["CVE-R", "CVE-L"], "credentials": ["ops"],
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "scada", "purdue_level": 2, "outage_cost": 5000.0,
             "accounts": ["ops"],
             "services": [{"protocol": "tcp", "port": 2404}]},
        ],
        edges=[("eng", "scada")],
        entries=["eng"],
        pool=POOL,
    )
    attacker = AttackerState(skill=0.5, skill_increment=0.02)
    defender = DefenderState.from_config(cfg)
    context = PlanningContext(cfg, defender, interactive=True)
    edge = next(
        e for e in edges_for(cfg) if e.rule == "credential_lateral_movement"
    )
    # ready-made exploit: expected effort collapses to the first-term time
    assert context.edge_duration(attacker, edge) == pytest.approx(
        cfg.engine.ttc.t1
    )
    assert context.true_success_rate(attacker, edge) == pytest.approx(0.45)
    # hardening the account host degrades credential reuse too
    from gridgame.agents import Measure
    defender.active.append(Measure(
        kind="hardening", target=("scada",), cost=400.0, effect=0.4,
    ))
    assert context.true_success_rate(attacker, edge) == pytest.approx(0.27)


def test_plan_path_prefers_cheap_reliable_route():
    cfg = make_config(
        nodes=[
            {"node_id": "a", "purdue_level": 5, "outage_cost": 10.0,
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "b", "purdue_level": 4, "outage_cost": 10.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "c", "purdue_level": 4, "outage_cost": 10.0,
             "vulnerabilities": ["CVE-W"],
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "t", "purdue_level": 3, "outage_cost": 9000.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
        ],
        edges=[("a", "b"), ("a", "c"), ("b", "t"), ("c", "t")],
        entries=["a"],
        pool=POOL + [
            {"id": "CVE-W", "access_complexity": "High", "exploitability": 1.0,
             "locality": "remote", "consequence": "codeExec"},
        ],
    )
    attacker = AttackerState(skill=0.5, skill_increment=0.02, omniscient=True)
    defender = DefenderState.from_config(cfg)
    context = PlanningContext(cfg, defender, interactive=False)
    plan = plan_path(context, attacker, edges_for(cfg), {"a"}, "t")
    assert plan is not None
    # the c route has a tenth the success odds, so planning goes through b
    assert plan.nodes == ["a", "b", "t"]
    assert [e.rule for e in plan.edges] == ["remote_exploit"] * 2


def test_select_target_picks_costliest_reachable():
    cfg = two_host()
    edges = edges_for(cfg)
    assert select_target(cfg.topology, edges, {"dmz"}) == "plc"


def test_select_target_breaks_ties_lexicographically():
    cfg = make_config(
        nodes=[
            {"node_id": "a", "purdue_level": 5, "outage_cost": 10.0,
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "y", "purdue_level": 4, "outage_cost": 700.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "x", "purdue_level": 4, "outage_cost": 700.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
        ],
        edges=[("a", "x"), ("a", "y")],
        entries=["a"],
        pool=POOL,
    )
    assert select_target(cfg.topology, edges_for(cfg), {"a"}) == "x"


def test_select_target_raises_when_nothing_reachable():
    cfg = two_host()
    with pytest.raises(NonTraversableError):
        select_target(cfg.topology, [], {"dmz"})


# -- defender ---------------------------------------------------------------

def test_funds_ledger_invariant():
    cfg = two_host()
    defender = DefenderState.from_config(cfg)
    defender.accrue(3.0)
    defender.accrue(7.5)
    report = risk_report(cfg.topology, edges_for(cfg), defender)
    bought = defender_plan(cfg.topology, edges_for(cfg), report, defender)
    assert bought, "expected at least one purchase with full capital"
    expected = (
        defender.capital
        + defender.income * defender.elapsed_time
        - defender.spent
    )
    assert defender.funds == pytest.approx(expected, abs=1e-12)
    assert defender.spent == pytest.approx(sum(m.cost for m in bought))


def test_accrue_rejects_negative_time():
    defender = DefenderState.from_config(two_host())
    with pytest.raises(ValueError):
        defender.accrue(-0.1)


def test_update_q_bumps_once_per_node_per_round():
    defender = DefenderState.from_config(two_host())
    update_q(defender, {"plc", "dmz"}, 0.5)
    assert defender.q_of("plc") == pytest.approx(1.5)
    assert defender.q_of("dmz") == pytest.approx(1.5)
    update_q(defender, {"plc"}, 0.5)
    assert defender.q_of("plc") == pytest.approx(2.0)
    assert defender.q_of("dmz") == pytest.approx(1.5)


def test_estimate_probabilities_entry_unreachable_and_discounts():
    cfg = two_host()
    defender = DefenderState.from_config(cfg)
    edges = edges_for(cfg)
    probs = estimate_probabilities(cfg.topology, edges, defender)
    assert probs["dmz"] == 1.0
    assert probs["plc"] == pytest.approx(0.8)
    # patching the remote vuln leaves the local escalation as the best way in
    from gridgame.agents import Measure
    defender.active.append(Measure(
        kind="patching", target=("plc", "CVE-R"), cost=800.0, effect=0.6,
    ))
    probs = estimate_probabilities(cfg.topology, edges, defender)
    assert probs["plc"] == pytest.approx(0.34)
    # hardening discounts every way in at once
    defender.active.append(Measure(
        kind="hardening", target=("plc",), cost=400.0, effect=0.4,
    ))
    probs = estimate_probabilities(cfg.topology, edges, defender)
    assert probs["plc"] == pytest.approx(0.34 * 0.6)
    # severing the only link leaves plc unreachable
    probs = estimate_probabilities(
        cfg.topology, edges_for(cfg, blocked=(("dmz", "plc"),)), defender
    )
    assert probs["plc"] == 0.0


def test_defender_plan_greedy_by_gain_per_cost():
    catalog = [
        {"kind": "patching", "cost": 800, "effect": 0.6, "technique": "D3-SU"},
        {"kind": "hardening", "cost": 400, "effect": 0.4, "technique": "D3-PH"},
    ]
    cfg = two_host(catalog=catalog, capital=1200)
    defender = DefenderState.from_config(cfg)
    edges = edges_for(cfg)
    report = risk_report(cfg.topology, edges, defender)
    bought = defender_plan(cfg.topology, edges, report, defender)
    # plc risk 0.8 * 9000: hardening gain/cost 2880/400 beats patch 4320/800;
    # the two patch candidates tie, so the target id breaks the tie
    assert [(m.kind, m.target) for m in bought] == [
        ("hardening", ("plc",)),
        ("patching", ("plc", "CVE-L")),
    ]
    assert defender.funds == pytest.approx(0.0)
    # purchases sit in pending until the round boundary
    assert defender.pending == bought and defender.active == []
    defender.activate_pending()
    assert defender.active == bought and defender.pending == []


def test_defender_never_rebuys_owned_measures():
    catalog = [
        {"kind": "hardening", "cost": 400, "effect": 0.4, "technique": "D3-PH"},
    ]
    cfg = two_host(catalog=catalog, capital=10000)
    defender = DefenderState.from_config(cfg)
    edges = edges_for(cfg)
    report = risk_report(cfg.topology, edges, defender)
    first = defender_plan(cfg.topology, edges, report, defender)
    defender.activate_pending()
    second = defender_plan(cfg.topology, edges, report, defender)
    assert {m.identity() for m in first} & {m.identity() for m in second} == set()


def test_access_restriction_spares_bridges():
    catalog = [
        {"kind": "access_restriction", "cost": 100, "effect": 0.0,
         "technique": "D3-NI"},
    ]
    line = make_config(
        nodes=[
            {"node_id": "a", "purdue_level": 5, "outage_cost": 10.0,
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "b", "purdue_level": 4, "outage_cost": 9000.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
        ],
        edges=[("a", "b")],
        entries=["a"],
        pool=POOL,
        catalog=catalog,
        capital=10000,
    )
    defender = DefenderState.from_config(line)
    edges = edges_for(line)
    report = risk_report(line.topology, edges, defender)
    # the only link is a bridge, so nothing gets cut
    assert defender_plan(line.topology, edges, report, defender) == []

    ring = make_config(
        nodes=[
            {"node_id": "a", "purdue_level": 5, "outage_cost": 10.0,
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "b", "purdue_level": 4, "outage_cost": 9000.0,
             "vulnerabilities": ["CVE-R"],
             "services": [{"protocol": "tcp", "port": 22}]},
            {"node_id": "c", "purdue_level": 4, "outage_cost": 20.0,
             "services": [{"protocol": "tcp", "port": 22}]},
        ],
        edges=[("a", "b"), ("b", "c"), ("a", "c")],
        entries=["a"],
        pool=POOL,
        catalog=catalog,
        capital=10000,
    )
    defender = DefenderState.from_config(ring)
    edges = edges_for(ring)
    report = risk_report(ring.topology, edges, defender)
    bought = defender_plan(ring.topology, edges, report, defender)
    assert any(m.kind == "access_restriction" for m in bought)


def test_reactive_block_is_free_and_immediate():
    defender = DefenderState.from_config(two_host())
    measure = react(defender, ("dmz", "plc"))
    assert measure.cost == 0.0
    assert measure.lead_rounds == 0
    assert measure.kind == "reactive_block"
