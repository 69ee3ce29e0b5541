"""Campaign loop tests: determinism, record invariants, sweeps, variants.

The cross-method path-optimality check carries its own oracle: an
exhaustive simple-path enumeration over true edge weights, independent of
the planner's Dijkstra.
"""

import itertools
import json
import math

import numpy as np
import pytest

from gridgame.agents import AttackerState, DefenderState, PlanningContext
from gridgame.alerts import read_bundle
from gridgame.engine import (
    COMPARISON_METHODS,
    OUTCOME_DETECTED,
    OUTCOME_NON_TRAVERSABLE,
    OUTCOME_SUCCESS,
    method_comparison,
    run_campaign,
    run_variant,
    sweep,
)
from gridgame.alerts import export_dataset
from gridgame.risk import edge_weight, known_exploit_probability, time_to_compromise
from gridgame.scenario import load_default_scenario, load_scenario_dict


def small_doc(rounds=6, seed=11, method="with_defender", **engine_extra):
    return {
        "topology": {
            "nodes": [
                {"node_id": "web", "purdue_level": 5, "outage_cost": 40.0,
                 "vulnerabilities": ["CVE-A"],
                 "services": [{"protocol": "tcp", "port": 443}]},
                {"node_id": "hist", "purdue_level": 3, "outage_cost": 900.0,
                 "vulnerabilities": ["CVE-A", "CVE-L"],
                 "services": [{"protocol": "tcp", "port": 1433}]},
                {"node_id": "eng", "purdue_level": 3, "outage_cost": 700.0,
                 "vulnerabilities": ["CVE-B"],
                 "services": [{"protocol": "tcp", "port": 3389}]},
                {"node_id": "plc", "purdue_level": 1, "outage_cost": 8000.0,
                 "vulnerabilities": ["CVE-A", "CVE-B"],
                 "services": [{"protocol": "tcp", "port": 502}]},
            ],
            "edges": [
                {"a": "web", "b": "hist"}, {"a": "web", "b": "eng"},
                {"a": "hist", "b": "plc"}, {"a": "eng", "b": "plc"},
                {"a": "hist", "b": "eng"},
            ],
            "subnets": [["web"], ["hist", "eng"], ["plc"]],
            "entry_points": ["web"],
        },
        "vulnerability_pool": [
            {"id": "CVE-A", "access_complexity": "Low", "exploitability": 8.6,
             "locality": "remote", "consequence": "codeExec"},
            {"id": "CVE-B", "access_complexity": "High", "exploitability": 6.4,
             "locality": "remote", "consequence": "codeExec"},
            {"id": "CVE-L", "access_complexity": "Medium", "exploitability": 3.4,
             "locality": "local", "consequence": "privEscalation"},
        ],
        "defender": {"capital": 3000, "income": 4, "sensor_count": 3},
        "attacker": {},
        "engine": {"rounds": rounds, "seed": seed,
                   "generation_method": method, **engine_extra},
    }


@pytest.fixture(scope="module")
def default_log():
    return run_campaign(load_default_scenario())


@pytest.fixture(scope="module")
def small_log():
    return run_campaign(load_scenario_dict(small_doc()))


def test_round_record_invariants(small_log):
    config = load_scenario_dict(small_doc())
    assert len(small_log.rounds) == config.engine.rounds
    for record in small_log.rounds:
        assert record.outcome in (
            OUTCOME_SUCCESS, OUTCOME_DETECTED, OUTCOME_NON_TRAVERSABLE
        )
        assert 0.0 <= record.complexity <= 10.0
        assert len(record.attempts) <= config.engine.action_cap
        assert record.duration == pytest.approx(
            sum(a.duration for a in record.attempts), abs=1e-9
        )
        if record.outcome == OUTCOME_SUCCESS:
            assert record.realized_path[-1] == record.target
        if record.outcome == OUTCOME_DETECTED:
            assert record.detections >= 1
        if record.cap_reached:
            assert record.outcome == OUTCOME_NON_TRAVERSABLE
            assert len(record.attempts) == config.engine.action_cap
        assert record.detections == sum(1 for a in record.attempts if a.detected)
        # labels reference attempts that exist
        for alert_id in record.alert_ids:
            assert isinstance(alert_id, int)


def test_skill_trace_follows_schedule(default_log):
    for k, record in enumerate(default_log.rounds):
        assert record.skill == pytest.approx(min(0.5 + 0.02 * k, 1.0))
    assert default_log.rounds[25].skill == pytest.approx(1.0)
    assert default_log.rounds[24].skill == pytest.approx(0.98)
    assert default_log.final_skill == pytest.approx(1.0)


def test_funds_ledger_across_campaign(small_log):
    config = load_scenario_dict(small_doc())
    elapsed = sum(r.duration for r in small_log.rounds)
    spent = sum(p["cost"] for r in small_log.rounds for p in r.purchases)
    expected = config.defender.capital + config.defender.income * elapsed - spent
    assert small_log.final_funds == pytest.approx(expected, rel=1e-12)
    # per-round ledger, too
    for record in small_log.rounds:
        income = config.defender.income * record.duration
        cost = sum(p["cost"] for p in record.purchases)
        assert record.funds_end == pytest.approx(
            record.funds_start + income - cost, rel=1e-12
        )


def test_event_ids_sequential_and_time_ordered(default_log):
    ids = [a.event.event_id for a in default_log.alerts]
    assert ids == list(range(1, len(ids) + 1))
    stamps = [
        (a.event.event_second, a.event.event_microsecond)
        for a in default_log.alerts
    ]
    assert stamps == sorted(stamps)
    labels = {a.label for a in default_log.alerts}
    assert labels == {"attack", "background"}
    # every attack alert points at a recorded attempt in its round
    by_round = {r.round_no: r for r in default_log.rounds}
    for alert in default_log.alerts:
        if alert.label == "attack":
            round_no, ref = alert.action_ref.split(":")
            assert int(round_no[1:]) == alert.round_no
            index = int(ref[1:])
            assert 1 <= index <= len(by_round[alert.round_no].attempts)
            assert by_round[alert.round_no].attempts[index - 1].detected


def test_campaign_is_deterministic_and_bundle_byte_identical(tmp_path):
    config_a = load_scenario_dict(small_doc())
    config_b = load_scenario_dict(small_doc())
    log_a = run_campaign(config_a)
    log_b = run_campaign(config_b)
    export_dataset(log_a, tmp_path / "a")
    export_dataset(log_b, tmp_path / "b")
    for name in ("manifest.json", "rounds.jsonl", "alerts.u2", "labels.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_seed_changes_output():
    log_a = run_campaign(load_scenario_dict(small_doc(seed=11)))
    log_b = run_campaign(load_scenario_dict(small_doc(seed=12)))
    assert [r.to_dict() for r in log_a.rounds] != [r.to_dict() for r in log_b.rounds]


def test_bundle_read_back_matches_log(tmp_path, small_log):
    out = export_dataset(small_log, tmp_path / "bundle")
    events, labels, manifest = read_bundle(out)
    assert len(events) == len(small_log.alerts)
    assert manifest == json.loads(json.dumps(small_log.manifest()))
    assert [l[0] for l in labels] == [e.event_id for e in events]
    attack_rows = [l for l in labels if l[1] == "attack"]
    assert len(attack_rows) == manifest["attack_event_count"]
    with open(out / "rounds.jsonl") as handle:
        rows = [json.loads(line) for line in handle]
    assert [r["round"] for r in rows] == list(range(1, len(small_log.rounds) + 1))


def test_defender_raises_attack_complexity_over_no_defender():
    doc_on = small_doc(rounds=12, seed=3, method="with_defender")
    doc_off = small_doc(rounds=12, seed=3, method="optimal_no_defender")
    log_on = run_campaign(load_scenario_dict(doc_on))
    log_off = run_campaign(load_scenario_dict(doc_off))
    paths_on = {tuple(r.realized_path) for r in log_on.rounds}
    paths_off = {tuple(r.realized_path) for r in log_off.rounds}
    # an active defender forces detours: at least as many distinct routes
    assert len(paths_on) >= len(paths_off)


def test_random_walk_reaches_or_exhausts():
    log = run_variant(
        load_scenario_dict(small_doc(rounds=8, seed=5)), "single_attack_random"
    )
    assert len(log.rounds) == 8
    for record in log.rounds:
        assert record.method == "single_attack_random"
        assert record.planned_path == []
        # no defender purchases in non-interactive methods
        assert record.purchases == []


def test_action_cap_forces_termination():
    doc = small_doc(rounds=2, seed=1, action_cap=3)
    # an unpatchable wall: the only remote vuln is nearly impossible
    for node in doc["topology"]["nodes"]:
        node["vulnerabilities"] = ["CVE-W"] if node["node_id"] != "web" else []
    doc["vulnerability_pool"] = [
        {"id": "CVE-W", "access_complexity": "High", "exploitability": 0.05,
         "locality": "remote", "consequence": "codeExec"},
    ]
    doc["engine"]["abandon_threshold"] = 0.0  # never give up, hit the cap
    log = run_campaign(load_scenario_dict(doc))
    for record in log.rounds:
        assert record.outcome == OUTCOME_NON_TRAVERSABLE
        assert record.cap_reached
        assert len(record.attempts) == 3


def brute_force_cheapest_host_path(config, target):
    """Minimum true-weight simple path from the entry to the target when
    every vulnerability is a certainty; hosts only, no local steps."""
    topology = config.topology
    attacker = AttackerState(skill=1.0, skill_increment=0.0, omniscient=True)
    defender = DefenderState.from_config(config)
    context = PlanningContext(config, defender, interactive=False)

    weights = {}
    adjacency = {}
    from gridgame.attack_graph import Derivation, action_edges, facts_from_topology
    edges = action_edges(
        Derivation(facts_from_topology(topology), full_provenance=False)
    )
    for edge in edges:
        if edge.rule != "remote_exploit":
            continue
        weight = context.edge_planning_weight(attacker, edge)
        key = (edge.src, edge.dst)
        if key not in weights or weight < weights[key]:
            weights[key] = weight
    for (src, dst), weight in weights.items():
        adjacency.setdefault(src, []).append((dst, weight))

    entry = sorted(topology.entry_points)[0]
    best = None

    def dfs(node, cost, seen):
        nonlocal best
        if node == target:
            if best is None or cost < best:
                best = cost
            return
        for nxt, weight in adjacency.get(node, ()):
            if nxt not in seen:
                dfs(nxt, cost + weight, seen | {nxt})

    dfs(entry, 0.0, {entry})
    return best


def test_optimal_method_realizes_brute_force_path():
    rng = np.random.default_rng(77)
    for trial in range(20):
        n = int(rng.integers(4, 9))
        names = [f"v{i}" for i in range(n)]
        edge_set = {(names[int(rng.integers(i))], names[i]) for i in range(1, n)}
        for _ in range(n):
            a, b = rng.choice(n, size=2, replace=False)
            key = tuple(sorted((names[int(a)], names[int(b)])))
            edge_set.add(key)
        nodes = []
        for i, name in enumerate(names):
            nodes.append({
                "node_id": name,
                "purdue_level": 5,
                "outage_cost": float(round(rng.uniform(10, 5000), 2)),
                "vulnerabilities": [] if i == 0 else ["CVE-SURE"],
                "services": [{"protocol": "tcp", "port": 22}],
            })
        nodes[-1]["outage_cost"] = 9999.0  # unambiguous target
        doc = {
            "topology": {
                "nodes": nodes,
                "edges": [{"a": a, "b": b} for a, b in sorted(edge_set)],
                "subnets": [names],
                "entry_points": [names[0]],
            },
            "vulnerability_pool": [
                {"id": "CVE-SURE", "access_complexity": "Low",
                 "exploitability": 10.0, "locality": "remote",
                 "consequence": "codeExec"},
            ],
            "defender": {"capital": 0, "income": 0, "sensor_count": 0},
            "attacker": {"skill_init": 1.0, "skill_increment": 0.0},
            "engine": {"rounds": 1, "seed": int(rng.integers(10**6)),
                       "generation_method": "optimal_no_defender"},
        }
        config = load_scenario_dict(doc)
        log = run_campaign(config)
        record = log.rounds[0]
        assert record.outcome == OUTCOME_SUCCESS, f"trial {trial}"
        assert record.target == names[-1]
        # every step is certain, so the walk equals the plan
        assert record.realized_path == record.planned_path, f"trial {trial}"
        want = brute_force_cheapest_host_path(config, names[-1])
        got = 0.0
        attacker = AttackerState(skill=1.0, skill_increment=0.0, omniscient=True)
        defender = DefenderState.from_config(config)
        context = PlanningContext(config, defender, interactive=False)
        from gridgame.attack_graph import Derivation, action_edges, facts_from_topology
        edges = action_edges(
            Derivation(facts_from_topology(config.topology), full_provenance=False)
        )
        lookup = {}
        for edge in edges:
            key = (edge.src, edge.dst)
            weight = context.edge_planning_weight(attacker, edge)
            if key not in lookup or weight < lookup[key]:
                lookup[key] = weight
        for a, b in zip(record.realized_path, record.realized_path[1:]):
            got += lookup[(a, b)]
        assert got == pytest.approx(want, rel=1e-9), f"trial {trial}"


def test_sweep_grid_order_and_parallel_equivalence():
    doc = small_doc(rounds=3, seed=0)
    rows = sweep(doc, [0, 2], ["low", "high"], [1, 2], jobs=1)
    assert [(r["sensors"], r["funds"]) for r in rows] == [
        (0, "low"), (0, "high"), (2, "low"), (2, "high"),
    ]
    for row in rows:
        assert row["seeds"] == 2
        assert row["rounds_per_seed"] == 3
        assert 0.0 <= row["mean_complexity"] <= 10.0
        assert row["ci_low"] <= row["mean_complexity"] <= row["ci_high"]
    parallel = sweep(doc, [0, 2], ["low", "high"], [1, 2], jobs=2)
    assert parallel == rows


def test_sweep_single_seed_has_undefined_interval():
    rows = sweep(small_doc(rounds=2, seed=0), [1], ["medium"], [7])
    assert len(rows) == 1
    assert math.isnan(rows[0]["ci_low"]) and math.isnan(rows[0]["ci_high"])
    assert rows[0]["seeds"] == 1


def test_sweep_rejects_unknown_fund_level():
    with pytest.raises(ValueError, match="unknown fund level"):
        sweep(small_doc(rounds=2), [1], ["lavish"], [1])


def test_method_comparison_requires_enough_rounds(tmp_path):
    with pytest.raises(ValueError, match="50"):
        method_comparison(small_doc(rounds=30), [1], tmp_path)


def test_method_comparison_writes_bundles(tmp_path):
    manifest = method_comparison(small_doc(rounds=50), [3], tmp_path, jobs=1)
    assert manifest["methods"] == list(COMPARISON_METHODS)
    assert len(manifest["bundles"]) == 3
    for entry in manifest["bundles"]:
        # bundle names are relative to the output directory, so a moved or
        # copied comparison stays self-describing
        events, labels, sub_manifest = read_bundle(tmp_path / entry["bundle"])
        assert sub_manifest["rounds"] == 50
        assert sub_manifest["method"] == entry["method"]
        assert len(events) == entry["event_count"]
    # campaigns share the attacker learning curve regardless of method
    seeds = {e["seed"] for e in manifest["bundles"]}
    assert seeds == {3}
    assert (tmp_path / "manifest.json").exists()
