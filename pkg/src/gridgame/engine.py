"""Campaign orchestration: rounds, knowledge transfer, variants, sweeps.

A campaign is M sequential rounds against one topology.  Within a round the
attacker picks the most valuable reachable target, plans a least-effort
path, and executes it step by step while sensors may detect steps and the
defender reacts.  Between rounds the attacker keeps skill and beliefs, the
defender keeps importance factors, purchased measures, and income, so both
sides enter the next round smarter.

The clock is event-driven: time advances only when the attacker acts, and
defender income accrues on the same clock.  All randomness flows through
per-round child streams of the campaign seed, which makes every artifact
byte-reproducible.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from scipy import stats

from . import __version__
from .agents import (
    AttackerState,
    AttemptOutcome,
    DefenderState,
    NonTraversableError,
    Plan,
    PlanningContext,
    attempt_action,
    defender_plan,
    plan_path,
    risk_report,
    select_target,
    update_q,
    update_skill,
)
from .alerts import (
    FORMAT_VERSION,
    LabeledAlert,
    RECORD_TYPE,
    SignatureCatalog,
    build_catalog,
    emit_attack_alerts,
    emit_background,
    export_dataset,
)
from .attack_graph import (
    Derivation,
    action_edges,
    action_node,
    facts_from_topology,
)
from .centrality import place_sensors
from .risk import complexity_score
from .rng import RngFactory
from .scenario import (
    FUND_SCENARIOS,
    ScenarioConfig,
    apply_overrides,
    load_scenario_dict,
)

OUTCOME_SUCCESS = "success"
OUTCOME_DETECTED = "failed_detected"
OUTCOME_NON_TRAVERSABLE = "failed_non_traversable"


@dataclass
class AttemptRecord:
    index: int  # 1-based within the round; labels reference "r{N}:a{index}"
    src: str
    dst: str
    rule: str
    vuln_id: str | None
    duration: float
    success: bool
    detected: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "src": self.src,
            "dst": self.dst,
            "rule": self.rule,
            "vuln_id": self.vuln_id,
            "duration": self.duration,
            "success": self.success,
            "detected": self.detected,
        }


@dataclass
class RoundRecord:
    round_no: int
    method: str
    skill: float
    target: str
    entry: str
    planned_path: list
    realized_path: list
    outcome: str
    cap_reached: bool
    exploited_vulns: list
    complexity: float
    detections: int
    start_clock: float
    duration: float
    attempts: list
    sensors: list
    risk_baseline: float
    risk_weighted: float
    funds_start: float
    funds_end: float
    purchases: list
    alert_ids: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "round": self.round_no,
            "method": self.method,
            "skill": self.skill,
            "target": self.target,
            "entry": self.entry,
            "planned_path": list(self.planned_path),
            "realized_path": list(self.realized_path),
            "outcome": self.outcome,
            "cap_reached": self.cap_reached,
            "exploited_vulns": list(self.exploited_vulns),
            "complexity": self.complexity,
            "detections": self.detections,
            "start_clock": self.start_clock,
            "duration": self.duration,
            "attempts": [a.to_dict() for a in self.attempts],
            "sensors": [list(link) for link in self.sensors],
            "risk_baseline": self.risk_baseline,
            "risk_weighted": self.risk_weighted,
            "funds_start": self.funds_start,
            "funds_end": self.funds_end,
            "purchases": list(self.purchases),
            "alert_ids": list(self.alert_ids),
        }


@dataclass
class CampaignLog:
    scenario_hash: str
    seed: int
    method: str
    rounds: list
    alerts: list  # LabeledAlert, event ids assigned and ordered
    final_skill: float
    final_funds: float
    final_quality: dict
    rng_info: dict

    def manifest(self) -> dict:
        attack_count = sum(1 for a in self.alerts if a.label == "attack")
        return {
            "format_version": FORMAT_VERSION,
            "record_type": RECORD_TYPE,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "method": self.method,
            "rounds": len(self.rounds),
            "event_count": len(self.alerts),
            "attack_event_count": attack_count,
            "background_event_count": len(self.alerts) - attack_count,
            "final_skill": self.final_skill,
            "final_funds": self.final_funds,
            "rng": self.rng_info,
            "tool": {"name": "gridgame", "version": __version__},
        }


class _GraphCache:
    """Derivation and action edges keyed by the set of blocked links.

    Preventive and reactive blocks are the only inputs that change the
    graph's structure mid-campaign; measure effects only reweight edges.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self._store: dict = {}

    def get(self, blocked: frozenset) -> tuple:
        if blocked not in self._store:
            facts = facts_from_topology(
                self.config.topology, tuple(sorted(blocked))
            )
            derivation = Derivation(facts, full_provenance=False)
            self._store[blocked] = (derivation, action_edges(derivation))
        return self._store[blocked]


def _effective_p_detect(edge, sensors, defender, base_p, interactive) -> float:
    covered = [link for link in edge.links if link in set(sensors)]
    if not covered:
        return base_p
    boost = max(defender.monitor_boost(link) for link in covered) if interactive else 0.0
    return min(base_p + boost, 1.0)


def run_round(
    config: ScenarioConfig,
    attacker: AttackerState,
    defender: DefenderState,
    factory: RngFactory,
    catalog: SignatureCatalog,
    cache: _GraphCache,
    round_no: int,
    clock: float,
    method: str,
) -> tuple:
    """One attack episode.  Returns (record, labeled alerts, new clock)."""
    topology = config.topology
    params = config.engine
    interactive = method == "with_defender"
    random_walk = method == "single_attack_random"
    rng_attack = factory.stream("round", round_no, "attack")
    rng_noise = factory.stream("round", round_no, "noise")

    defender.activate_pending()
    persistent_blocked = frozenset(defender.blocked_links())
    derivation, edges = cache.get(persistent_blocked)

    available = {e.key() for e in topology.edges} - set(persistent_blocked)
    sensor_count = min(defender.sensor_count, len(available))
    sensors = place_sensors(
        topology, sensor_count, quality=defender.quality,
        c_min=params.c_min, exclude_links=persistent_blocked,
    )

    context = PlanningContext(config, defender, interactive)
    report = risk_report(topology, edges, defender)
    sources = {action_node(e, "user") for e in sorted(topology.entry_points)}
    attacker.compromised = set(sources)
    attacker.position = min(sources)

    start_clock = clock
    funds_start = defender.funds
    attempts: list = []
    attack_alerts: list = []
    excluded: set = set()
    round_blocked: set = set()
    detected_hosts: set = set()
    exploited: list = []
    attempted_acs: list = []
    realized: list = []
    detections = 0
    outcome = None
    cap_reached = False
    skill_at_round = attacker.skill

    vuln_ac = {v.id: v.access_complexity for v in config.vulnerability_pool.values()}

    try:
        target = select_target(topology, edges, sources)
    except NonTraversableError:
        target = ""

    plan: Plan | None = None
    plan_step = 0
    planned_nodes: list = []

    if target:
        attacker.goal = target
        if not random_walk:
            plan = plan_path(context, attacker, edges, attacker.compromised,
                             target, excluded)
            planned_nodes = list(plan.nodes) if plan else []
            if plan is None:
                outcome = OUTCOME_NON_TRAVERSABLE
    else:
        outcome = OUTCOME_NON_TRAVERSABLE

    def next_edge():
        if random_walk:
            candidates = sorted(
                (e for e in edges
                 if e.src in attacker.compromised
                 and e.dst not in attacker.compromised
                 and e.identity() not in excluded),
                key=lambda e: e.identity(),
            )
            if not candidates:
                return None
            return candidates[int(rng_attack.integers(len(candidates)))]
        if plan is None or plan_step >= len(plan.edges):
            return None
        return plan.edges[plan_step]

    while outcome is None:
        if len(attempts) >= params.action_cap:
            outcome = OUTCOME_NON_TRAVERSABLE
            cap_reached = True
            break
        edge = next_edge()
        if edge is None:
            outcome = OUTCOME_DETECTED if detections else OUTCOME_NON_TRAVERSABLE
            break

        step_result, duration, _rate = attempt_action(
            rng_attack, attacker, defender, context, edge,
            params.abandon_threshold,
        )
        clock += duration
        success = step_result is AttemptOutcome.SUCCESS
        if edge.vuln_id is not None:
            attempted_acs.append(vuln_ac[edge.vuln_id])

        p_detect = _effective_p_detect(
            edge, sensors, defender, params.p_detect, interactive
        )
        events = emit_attack_alerts(
            rng_attack, catalog, topology, edge, sensors, p_detect,
            clock, blocked_flag=interactive,
        )
        detected = bool(events)
        attempt = AttemptRecord(
            index=len(attempts) + 1,
            src=edge.src,
            dst=edge.dst,
            rule=edge.rule,
            vuln_id=edge.vuln_id,
            duration=duration,
            success=success,
            detected=detected,
        )
        attempts.append(attempt)

        needs_replan = False
        if detected:
            detections += 1
            attack_alerts.append(LabeledAlert(
                event=events[0],
                label="attack",
                round_no=round_no,
                action_ref=f"r{round_no}:a{attempt.index}",
            ))
            if interactive:
                blocked_link = sensors[events[0].sensor_id - 1]
                round_blocked.add(blocked_link)
                detected_hosts.update((edge.src_host, edge.dst_host))
                needs_replan = True

        if success:
            if not realized:
                realized.append(edge.src)
            realized.append(edge.dst)
            if edge.vuln_id is not None:
                exploited.append(edge.vuln_id)
            if edge.dst == target:
                outcome = OUTCOME_SUCCESS
                break
            if not needs_replan and not random_walk:
                plan_step += 1
        elif step_result is AttemptOutcome.ABANDON:
            excluded.add(edge.identity())
            needs_replan = True

        if needs_replan:
            derivation, edges = cache.get(
                persistent_blocked | frozenset(round_blocked)
            )
            if not random_walk:
                plan = plan_path(context, attacker, edges,
                                 attacker.compromised, target, excluded)
                plan_step = 0
                if plan is None:
                    outcome = (OUTCOME_DETECTED if detections
                               else OUTCOME_NON_TRAVERSABLE)
                    break

    duration_total = clock - start_clock
    hops = sum(1 for a in attempts if a.success)
    complexity = complexity_score(attempted_acs, hops)

    update_skill(attacker)
    purchases: list = []
    if interactive:
        update_q(defender, detected_hosts, params.q_increment)
        # Reactive blocks expire with the round; buy against the graph the
        # attacker will face next time.
        _, lasting_edges = cache.get(persistent_blocked)
        post_report = risk_report(topology, lasting_edges, defender)
        bought = defender_plan(topology, lasting_edges, post_report, defender)
        purchases = [
            {"kind": m.kind, "target": list(m.target), "cost": m.cost,
             "effect": m.effect, "technique": m.technique}
            for m in bought
        ]

    background = [
        LabeledAlert(event=e, label="background", round_no=round_no, action_ref="")
        for e in emit_background(
            rng_noise, catalog, topology, sensors,
            params.noise.background_rate, start_clock, duration_total,
        )
    ]
    merged = attack_alerts + background
    merged.sort(key=lambda a: (a.event.event_second, a.event.event_microsecond,
                               a.label, a.action_ref))

    record = RoundRecord(
        round_no=round_no,
        method=method,
        skill=skill_at_round,
        target=target,
        entry=realized[0] if realized else (planned_nodes[0] if planned_nodes else ""),
        planned_path=planned_nodes,
        realized_path=realized,
        outcome=outcome,
        cap_reached=cap_reached,
        exploited_vulns=exploited,
        complexity=complexity,
        detections=detections,
        start_clock=start_clock,
        duration=duration_total,
        attempts=attempts,
        sensors=sensors,
        risk_baseline=report.baseline,
        risk_weighted=report.weighted,
        funds_start=funds_start,
        funds_end=defender.funds,
        purchases=purchases,
    )
    return record, merged, clock


def run_campaign(config: ScenarioConfig, method: str | None = None) -> CampaignLog:
    method = method or config.engine.generation_method
    factory = RngFactory(config.engine.seed)
    catalog = build_catalog(config)
    cache = _GraphCache(config)
    attacker = AttackerState(
        skill=config.attacker.skill_init,
        skill_increment=config.attacker.skill_increment,
        omniscient=method == "optimal_no_defender",
    )
    defender = DefenderState.from_config(config)

    rounds: list = []
    alerts: list = []
    clock = 0.0
    next_event_id = 1
    for round_no in range(1, config.engine.rounds + 1):
        record, round_alerts, clock = run_round(
            config, attacker, defender, factory, catalog, cache,
            round_no, clock, method,
        )
        for alert in round_alerts:
            alert.event.event_id = next_event_id
            record.alert_ids.append(next_event_id)
            next_event_id += 1
        rounds.append(record)
        alerts.extend(round_alerts)

    return CampaignLog(
        scenario_hash=config.fingerprint(),
        seed=config.engine.seed,
        method=method,
        rounds=rounds,
        alerts=alerts,
        final_skill=attacker.skill,
        final_funds=defender.funds,
        final_quality=dict(sorted(defender.quality.items())),
        rng_info=factory.describe(),
    )


def run_variant(config: ScenarioConfig, method: str) -> CampaignLog:
    return run_campaign(config, method=method)


# --------------------------------------------------------------------------
# Parameter sweep
# --------------------------------------------------------------------------

def _sweep_cell(args: tuple) -> tuple:
    doc_json, sensor_count, funds, seed = args
    doc = apply_overrides(
        json.loads(doc_json), seed=seed, sensor_count=sensor_count, funds=funds
    )
    config = load_scenario_dict(doc)
    log = run_campaign(config)
    scores = [r.complexity for r in log.rounds]
    return (sensor_count, funds, seed, scores)


def sweep(
    base_doc: dict,
    sensor_counts: list,
    fund_levels: list,
    seeds: list,
    jobs: int = 1,
) -> list:
    """Mean attack complexity per (sensor count, fund level) cell.

    The confidence interval is a 95% t-interval over per-seed means; a
    single seed leaves it undefined (NaN).  Rows come back in grid order
    regardless of execution order or parallelism.
    """
    for level in fund_levels:
        if level not in FUND_SCENARIOS:
            raise ValueError(f"unknown fund level {level!r}")
    tasks = [
        (json.dumps(base_doc), k, funds, seed)
        for k in sensor_counts for funds in fund_levels for seed in seeds
    ]
    results: dict = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for k, funds, seed, scores in pool.map(_sweep_cell, tasks):
                results[(k, funds, seed)] = scores
    else:
        for task in tasks:
            k, funds, seed, scores = _sweep_cell(task)
            results[(k, funds, seed)] = scores

    rows = []
    for k in sensor_counts:
        for funds in fund_levels:
            seed_means = [
                sum(results[(k, funds, s)]) / len(results[(k, funds, s)])
                for s in seeds
            ]
            n = len(seed_means)
            mean = sum(seed_means) / n
            if n > 1:
                sd = math.sqrt(sum((x - mean) ** 2 for x in seed_means) / (n - 1))
                half = float(stats.t.ppf(0.975, n - 1)) * sd / math.sqrt(n)
                ci_low, ci_high = mean - half, mean + half
            else:
                ci_low = ci_high = float("nan")
            rows.append({
                "sensors": k,
                "funds": funds,
                "mean_complexity": mean,
                "ci_low": ci_low,
                "ci_high": ci_high,
                "seeds": n,
                "rounds_per_seed": len(results[(k, funds, seeds[0])]),
            })
    return rows


# --------------------------------------------------------------------------
# Method comparison bundles
# --------------------------------------------------------------------------

COMPARISON_METHODS = ("with_defender", "single_attack_random", "optimal_no_defender")
MIN_COMPARISON_ROUNDS = 50


def _comparison_cell(args: tuple) -> tuple:
    doc_json, seed, method, out_dir = args
    doc = apply_overrides(json.loads(doc_json), seed=seed, method=method)
    config = load_scenario_dict(doc)
    log = run_campaign(config)
    name = f"seed{seed}_{method}"
    export_dataset(log, Path(out_dir) / name)
    return (seed, method, name, log.manifest()["event_count"])


def method_comparison(base_doc: dict, seeds: list, out_dir, jobs: int = 1) -> dict:
    """One bundle per (seed, method); returns the cross-bundle manifest."""
    rounds = int(base_doc["engine"]["rounds"])
    if rounds < MIN_COMPARISON_ROUNDS:
        raise ValueError(
            f"method comparison needs >= {MIN_COMPARISON_ROUNDS} rounds, got {rounds}"
        )
    tasks = [
        (json.dumps(base_doc), seed, method, str(out_dir))
        for seed in seeds for method in COMPARISON_METHODS
    ]
    cells: dict = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for seed, method, bundle, count in pool.map(_comparison_cell, tasks):
                cells[(seed, method)] = (bundle, count)
    else:
        for task in tasks:
            seed, method, bundle, count = _comparison_cell(task)
            cells[(seed, method)] = (bundle, count)

    entries = [
        {
            "seed": seed,
            "method": method,
            "bundle": cells[(seed, method)][0],
            "event_count": cells[(seed, method)][1],
        }
        for seed in seeds for method in COMPARISON_METHODS
    ]
    manifest = {
        "format_version": FORMAT_VERSION,
        "rounds": rounds,
        "methods": list(COMPARISON_METHODS),
        "seeds": list(seeds),
        "bundles": entries,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest
