"""Scenario definition: topology, vulnerabilities, costs, and run configuration.

A scenario is a single JSON document.  The topology is either given
explicitly (nodes/edges/subnets/entry_points) or produced by the built-in
Purdue-model generator from parameters plus a seed, so documents stay
small, diffable, and reproducible.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import jsonschema

from .rng import RngFactory


class ScenarioError(Exception):
    """Base error for scenario loading and validation."""


class ScenarioParseError(ScenarioError):
    """Document does not conform to the scenario JSON schema."""


class ScenarioValidationError(ScenarioError):
    """Schema-valid document with dangling or inconsistent references."""


class AccessComplexity(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class Locality(str, Enum):
    REMOTE = "remote"
    LOCAL = "local"


class Consequence(str, Enum):
    PRIV_ESCALATION = "privEscalation"
    CODE_EXEC = "codeExec"
    DOS = "dos"
    INFO_LEAK = "infoLeak"


@dataclass(frozen=True)
class Vulnerability:
    id: str
    access_complexity: AccessComplexity
    exploitability: float
    locality: Locality
    consequence: Consequence

    def __post_init__(self):
        if not self.id:
            raise ScenarioValidationError("vulnerability id must be non-empty")
        if not 0.0 <= self.exploitability <= 10.0:
            raise ScenarioValidationError(
                f"exploitability of {self.id} out of [0,10]: {self.exploitability}"
            )


@dataclass(frozen=True)
class Service:
    protocol: str
    port: int


@dataclass
class NodeProfile:
    node_id: str
    purdue_level: int
    peak_power_kw: float = 0.0
    outage_cost: float = 0.0
    vulnerabilities: list[Vulnerability] = field(default_factory=list)
    services: list[Service] = field(default_factory=list)
    accounts: list[str] = field(default_factory=list)
    credentials: list[str] = field(default_factory=list)
    routes: bool = False
    address: str = ""

    def __post_init__(self):
        if not 0 <= self.purdue_level <= 5:
            raise ScenarioValidationError(
                f"node {self.node_id}: purdue_level {self.purdue_level} out of [0,5]"
            )
        if self.peak_power_kw < 0:
            raise ScenarioValidationError(f"node {self.node_id}: negative peak power")
        if self.outage_cost < 0:
            raise ScenarioValidationError(f"node {self.node_id}: negative outage cost")


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    medium: str = "lan"

    def key(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass
class TopologyGraph:
    nodes: dict[str, NodeProfile]
    edges: list[Edge]
    subnets: list[list[str]]
    entry_points: list[str]

    def validate(self):
        for e in self.edges:
            for end in (e.a, e.b):
                if end not in self.nodes:
                    raise ScenarioValidationError(f"edge references unknown node {end!r}")
        if not self.entry_points:
            raise ScenarioValidationError("entry_points must be non-empty")
        for ep in self.entry_points:
            if ep not in self.nodes:
                raise ScenarioValidationError(f"entry point references unknown node {ep!r}")
        assigned = [n for subnet in self.subnets for n in subnet]
        if sorted(assigned) != sorted(self.nodes):
            raise ScenarioValidationError("subnets do not partition the node set")
        adjacency: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            adjacency[e.a].add(e.b)
            adjacency[e.b].add(e.a)
        for subnet in self.subnets:
            members = set(subnet)
            if len(members) <= 1:
                continue
            seen = {subnet[0]}
            stack = [subnet[0]]
            while stack:
                cur = stack.pop()
                for nxt in adjacency[cur]:
                    if nxt in members and nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            if seen != members:
                raise ScenarioValidationError(
                    f"subnet containing {subnet[0]!r} is not internally connected"
                )

    def neighbors(self, node_id: str) -> set[str]:
        out = set()
        for e in self.edges:
            if e.a == node_id:
                out.add(e.b)
            elif e.b == node_id:
                out.add(e.a)
        return out

    def sorted_node_ids(self) -> list[str]:
        return sorted(self.nodes)


# Purdue-level criticality multipliers applied to interruption cost.
# Deep OT levels weigh heavier than office IT; overridable per scenario.
DEFAULT_CRITICALITY = {0: 3.0, 1: 2.5, 2: 2.0, 3: 1.5, 4: 1.0, 5: 1.0}
DEFAULT_COST_RATE = 10.0  # currency per kW·h, industry-sector interruption
DEFAULT_OUTAGE_HOURS = 12.0  # worst-case interruption horizon

# Named defender funding presets: (starting capital, income per time unit).
FUND_SCENARIOS = {
    "low": (1000.0, 1.0),
    "medium": (5000.0, 5.0),
    "high": (20000.0, 20.0),
}


def purdue_criticality(level: int, table: dict[int, float] | None = None) -> float:
    table = table or DEFAULT_CRITICALITY
    return table[level]


def outage_cost(
    profile: NodeProfile,
    rate: float = DEFAULT_COST_RATE,
    horizon: float = DEFAULT_OUTAGE_HOURS,
    criticality: dict[int, float] | None = None,
) -> float:
    """Interruption cost of losing this component over the outage horizon."""
    if rate < 0 or horizon <= 0:
        raise ScenarioValidationError("outage cost rate must be >= 0 and horizon > 0")
    cost = profile.peak_power_kw * rate * horizon * purdue_criticality(
        profile.purdue_level, criticality
    )
    profile.outage_cost = cost
    return cost


@dataclass
class TTCParams:
    t1: float = 1.0
    t2: float = 5.8
    p1_coeff: float = 1.0

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise ScenarioValidationError("ttc stage times must be positive")


@dataclass
class NoiseParams:
    background_rate: float = 0.15  # benign alerts per time unit per sensor
    benign_pool_size: int = 32
    signature_overlap: float = 0.5  # fraction of benign pool reusing attack signatures


@dataclass
class EngineParams:
    rounds: int
    seed: int
    generation_method: str = "with_defender"
    ttc: TTCParams = field(default_factory=TTCParams)
    noise: NoiseParams = field(default_factory=NoiseParams)
    p_detect: float = 0.8
    abandon_threshold: float = 0.2
    q_increment: float = 0.5
    action_cap: int = 200
    c_min: float = 1.0

    def __post_init__(self):
        if self.rounds < 1:
            raise ScenarioValidationError("engine.rounds must be >= 1")
        if self.generation_method not in GENERATION_METHODS:
            raise ScenarioValidationError(
                f"unknown generation_method {self.generation_method!r}"
            )


GENERATION_METHODS = ("with_defender", "single_attack_random", "optimal_no_defender")


@dataclass
class CatalogEntry:
    kind: str  # patching | hardening | access_restriction | monitoring
    cost: float
    effect: float = 0.0
    technique: str = ""


DEFAULT_CATALOG = [
    CatalogEntry("patching", cost=800.0, effect=0.6, technique="D3-SU"),
    CatalogEntry("hardening", cost=400.0, effect=0.4, technique="D3-PH"),
    CatalogEntry("access_restriction", cost=1200.0, technique="D3-NI"),
    CatalogEntry("monitoring", cost=300.0, effect=0.1, technique="D3-NTA"),
]


@dataclass
class DefenderParams:
    capital: float
    income: float
    sensor_count: int
    catalog: list[CatalogEntry] = field(default_factory=lambda: list(DEFAULT_CATALOG))

    def __post_init__(self):
        if self.sensor_count < 0:
            raise ScenarioValidationError("defender.sensor_count must be >= 0")


@dataclass
class AttackerParams:
    skill_init: float = 0.5
    skill_increment: float = 0.02

    def __post_init__(self):
        if not 0.0 <= self.skill_init <= 1.0:
            raise ScenarioValidationError("attacker.skill_init out of [0,1]")


@dataclass
class ScenarioConfig:
    topology: TopologyGraph
    vulnerability_pool: dict[str, Vulnerability]
    defender: DefenderParams
    attacker: AttackerParams
    engine: EngineParams
    document: dict = field(default_factory=dict)

    def fingerprint(self) -> str:
        return hashlib.sha256(canonical_json(self.document).encode()).hexdigest()


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# --------------------------------------------------------------------------
# JSON schema for scenario documents
# --------------------------------------------------------------------------

_SERVICE_SCHEMA = {
    "type": "object",
    "required": ["protocol", "port"],
    "properties": {
        "protocol": {"type": "string"},
        "port": {"type": "integer", "minimum": 0, "maximum": 65535},
    },
}

_NODE_SCHEMA = {
    "type": "object",
    "required": ["node_id", "purdue_level"],
    "properties": {
        "node_id": {"type": "string", "minLength": 1},
        "purdue_level": {"type": "integer", "minimum": 0, "maximum": 5},
        "peak_power_kw": {"type": "number", "minimum": 0},
        "outage_cost": {"type": "number", "minimum": 0},
        "vulnerabilities": {"type": "array", "items": {"type": "string"}},
        "services": {"type": "array", "items": _SERVICE_SCHEMA},
        "accounts": {"type": "array", "items": {"type": "string"}},
        "credentials": {"type": "array", "items": {"type": "string"}},
        "routes": {"type": "boolean"},
        "address": {"type": "string"},
    },
}

_EXPLICIT_TOPOLOGY_SCHEMA = {
    "type": "object",
    "required": ["nodes", "edges", "subnets", "entry_points"],
    "properties": {
        "nodes": {"type": "array", "items": _NODE_SCHEMA},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["a", "b"],
                "properties": {
                    "a": {"type": "string"},
                    "b": {"type": "string"},
                    "medium": {"type": "string"},
                },
            },
        },
        "subnets": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}},
        },
        "entry_points": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    },
}

_GENERATE_TOPOLOGY_SCHEMA = {
    "type": "object",
    "required": ["generate"],
    "properties": {
        "generate": {
            "type": "object",
            "properties": {
                "seed": {"type": "integer"},
                "subnets_per_level": {
                    "type": "object",
                    "patternProperties": {"^[0-5]$": {"type": "integer", "minimum": 0}},
                    "additionalProperties": False,
                },
                "hosts_per_subnet": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "routing_levels": {"type": "array", "items": {"type": "integer"}},
                "cost_rate": {"type": "number", "minimum": 0},
                "outage_horizon_hours": {"type": "number", "exclusiveMinimum": 0},
                "criticality": {
                    "type": "object",
                    "patternProperties": {"^[0-5]$": {"type": "number", "minimum": 0}},
                    "additionalProperties": False,
                },
            },
        },
    },
}

_VULN_SCHEMA = {
    "type": "object",
    "required": ["id", "access_complexity", "exploitability", "locality", "consequence"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "access_complexity": {"enum": ["Low", "Medium", "High"]},
        "exploitability": {"type": "number", "minimum": 0, "maximum": 10},
        "locality": {"enum": ["remote", "local"]},
        "consequence": {"enum": ["privEscalation", "codeExec", "dos", "infoLeak"]},
    },
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["topology", "vulnerability_pool", "defender", "attacker", "engine"],
    "properties": {
        "topology": {"oneOf": [_EXPLICIT_TOPOLOGY_SCHEMA, _GENERATE_TOPOLOGY_SCHEMA]},
        "vulnerability_pool": {"type": "array", "items": _VULN_SCHEMA},
        "defender": {
            "type": "object",
            "required": ["capital", "income", "sensor_count"],
            "properties": {
                "capital": {"type": "number", "minimum": 0},
                "income": {"type": "number", "minimum": 0},
                "sensor_count": {"type": "integer", "minimum": 0},
                "catalog": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["kind", "cost"],
                        "properties": {
                            "kind": {
                                "enum": [
                                    "patching",
                                    "hardening",
                                    "access_restriction",
                                    "monitoring",
                                ]
                            },
                            "cost": {"type": "number", "minimum": 0},
                            "effect": {"type": "number", "minimum": 0, "maximum": 0.999},
                            "technique": {"type": "string"},
                        },
                    },
                },
            },
        },
        "attacker": {
            "type": "object",
            "properties": {
                "skill_init": {"type": "number", "minimum": 0, "maximum": 1},
                "skill_increment": {"type": "number", "minimum": 0},
            },
        },
        "engine": {
            "type": "object",
            "required": ["rounds", "seed"],
            "properties": {
                "rounds": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "generation_method": {"enum": list(GENERATION_METHODS)},
                "ttc": {
                    "type": "object",
                    "properties": {
                        "t1": {"type": "number", "exclusiveMinimum": 0},
                        "t2": {"type": "number", "exclusiveMinimum": 0},
                        "p1_coeff": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "noise": {
                    "type": "object",
                    "properties": {
                        "background_rate": {"type": "number", "minimum": 0},
                        "benign_pool_size": {"type": "integer", "minimum": 1},
                        "signature_overlap": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
                "p_detect": {"type": "number", "minimum": 0, "maximum": 1},
                "abandon_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                "q_increment": {"type": "number", "minimum": 0},
                "action_cap": {"type": "integer", "minimum": 1},
                "c_min": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


# --------------------------------------------------------------------------
# Purdue topology generator
# --------------------------------------------------------------------------

DEFAULT_SUBNETS_PER_LEVEL = {5: 4, 4: 5, 3: 4, 2: 4, 1: 3, 0: 1}  # 21 subnets

# Member roles drawn per level (gateway is always added).
_LEVEL_ROLES = {
    5: ["web", "mail", "ws"],
    4: ["erp", "db", "ws"],
    3: ["historian", "eng", "app"],
    2: ["scada", "hmi", "db"],
    1: ["plc", "rtu"],
    0: ["sensor", "actuator"],
}

_ROLE_SERVICES = {
    "gw": [Service("tcp", 22)],
    "web": [Service("tcp", 80), Service("tcp", 443)],
    "mail": [Service("tcp", 25)],
    "ws": [Service("tcp", 3389)],
    "erp": [Service("tcp", 8080)],
    "db": [Service("tcp", 1433)],
    "historian": [Service("tcp", 8443), Service("tcp", 1433)],
    "eng": [Service("tcp", 3389), Service("tcp", 22)],
    "app": [Service("tcp", 8080)],
    "scada": [Service("tcp", 2404), Service("tcp", 102)],
    "hmi": [Service("tcp", 5900)],
    "plc": [Service("tcp", 502)],
    "rtu": [Service("tcp", 20000)],
    "sensor": [Service("tcp", 502)],
    "actuator": [Service("tcp", 502)],
}

# Peak power draw ranges (kW) per role; OT roles represent controlled load.
_ROLE_POWER = {
    "gw": (3, 8),
    "web": (2, 6),
    "mail": (2, 5),
    "ws": (1, 3),
    "erp": (3, 8),
    "db": (4, 10),
    "historian": (30, 80),
    "eng": (10, 25),
    "app": (20, 60),
    "scada": (1200, 1600),
    "hmi": (120, 260),
    "plc": (300, 700),
    "rtu": (250, 600),
    "sensor": (150, 350),
    "actuator": (180, 400),
}


@dataclass
class GeneratorParams:
    seed: int = 0
    subnets_per_level: dict[int, int] = field(
        default_factory=lambda: dict(DEFAULT_SUBNETS_PER_LEVEL)
    )
    hosts_per_subnet: tuple[int, int] = (2, 4)
    routing_levels: tuple[int, ...] = (5, 4)
    cost_rate: float = DEFAULT_COST_RATE
    outage_horizon_hours: float = DEFAULT_OUTAGE_HOURS
    criticality: dict[int, float] = field(default_factory=lambda: dict(DEFAULT_CRITICALITY))

    @classmethod
    def from_dict(cls, raw: dict) -> "GeneratorParams":
        params = cls()
        if "seed" in raw:
            params.seed = int(raw["seed"])
        if "subnets_per_level" in raw:
            params.subnets_per_level = {int(k): int(v) for k, v in raw["subnets_per_level"].items()}
        if "hosts_per_subnet" in raw:
            lo, hi = raw["hosts_per_subnet"]
            params.hosts_per_subnet = (int(lo), int(hi))
        if "routing_levels" in raw:
            params.routing_levels = tuple(int(x) for x in raw["routing_levels"])
        if "cost_rate" in raw:
            params.cost_rate = float(raw["cost_rate"])
        if "outage_horizon_hours" in raw:
            params.outage_horizon_hours = float(raw["outage_horizon_hours"])
        if "criticality" in raw:
            params.criticality = {int(k): float(v) for k, v in raw["criticality"].items()}
        return params


def _vuln_candidates(pool: list[Vulnerability], locality: Locality,
                     consequence: Consequence | None = None) -> list[Vulnerability]:
    out = [v for v in pool if v.locality == locality]
    if consequence is not None:
        out = [v for v in out if v.consequence == consequence]
    return sorted(out, key=lambda v: v.id)


# Access-complexity preference per level band: IT favors easy exploits,
# OT favors the harder ICS-specific ones.
_LEVEL_AC_WEIGHTS = {
    5: {"Low": 0.6, "Medium": 0.3, "High": 0.1},
    4: {"Low": 0.5, "Medium": 0.35, "High": 0.15},
    3: {"Low": 0.35, "Medium": 0.4, "High": 0.25},
    2: {"Low": 0.2, "Medium": 0.4, "High": 0.4},
    1: {"Low": 0.1, "Medium": 0.4, "High": 0.5},
    0: {"Low": 0.1, "Medium": 0.3, "High": 0.6},
}


def _weighted_choice(rng, items: list[Vulnerability], level: int) -> Vulnerability:
    weights = [_LEVEL_AC_WEIGHTS[level][v.access_complexity.value] for v in items]
    total = sum(weights)
    probs = [w / total for w in weights]
    idx = rng.choice(len(items), p=probs)
    return items[int(idx)]


def generate_purdue_topology(params: GeneratorParams,
                             pool: list[Vulnerability]) -> TopologyGraph:
    """Build a layered Purdue-model network; pure function of (params, seed)."""
    counts = {lvl: n for lvl, n in params.subnets_per_level.items() if n > 0}
    if not counts or sum(counts.values()) < 1:
        raise ScenarioValidationError("generator params must request at least one subnet")

    rng = RngFactory(params.seed).stream("purdue-topology")
    remote_exec = _vuln_candidates(pool, Locality.REMOTE, Consequence.CODE_EXEC)
    local_escal = _vuln_candidates(pool, Locality.LOCAL, Consequence.PRIV_ESCALATION)
    remote_other = [
        v for v in _vuln_candidates(pool, Locality.REMOTE)
        if v.consequence != Consequence.CODE_EXEC
    ]

    nodes: dict[str, NodeProfile] = {}
    edges: list[Edge] = []
    subnets: list[list[str]] = []
    gateways: dict[int, list[str]] = {}
    lo, hi = params.hosts_per_subnet

    subnet_idx = 0
    for level in sorted(counts, reverse=True):
        gateways[level] = []
        for _ in range(counts[level]):
            gw_id = f"l{level}s{subnet_idx:02d}-gw"
            members = [gw_id]
            gw = NodeProfile(
                node_id=gw_id,
                purdue_level=level,
                services=list(_ROLE_SERVICES["gw"]),
                routes=level in params.routing_levels,
            )
            gw.peak_power_kw = float(rng.integers(*_ROLE_POWER["gw"]))
            # Every gateway is exploitable so attack paths can cross it.
            if remote_exec:
                gw.vulnerabilities.append(_weighted_choice(rng, remote_exec, level))
            nodes[gw_id] = gw
            n_members = int(rng.integers(lo, hi + 1))
            roles = _LEVEL_ROLES[level]
            for h in range(n_members):
                role = roles[h % len(roles)]
                node_id = f"l{level}s{subnet_idx:02d}-{role}{h}"
                profile = NodeProfile(
                    node_id=node_id,
                    purdue_level=level,
                    services=list(_ROLE_SERVICES[role]),
                )
                profile.peak_power_kw = float(rng.integers(*_ROLE_POWER[role]))
                if remote_exec and rng.random() < 0.75:
                    profile.vulnerabilities.append(_weighted_choice(rng, remote_exec, level))
                if local_escal and rng.random() < 0.35:
                    profile.vulnerabilities.append(local_escal[int(rng.integers(len(local_escal)))])
                if remote_other and rng.random() < 0.25:
                    profile.vulnerabilities.append(remote_other[int(rng.integers(len(remote_other)))])
                # Engineering/admin hosts hold credentials reused one level down.
                if role in ("eng", "ws") and rng.random() < 0.5:
                    profile.credentials.append(f"admin-l{max(level - 1, 0)}")
                if role in ("scada", "hmi", "plc", "rtu", "historian", "db"):
                    profile.accounts.append(f"admin-l{level}")
                nodes[node_id] = profile
                members.append(node_id)
                edges.append(Edge(gw_id, node_id))
            subnets.append(members)
            gateways[level].append(gw_id)
            subnet_idx += 1

    # Uplinks: each gateway connects to 1-2 gateways in the next level up.
    levels_present = sorted(counts, reverse=True)
    for i, level in enumerate(levels_present):
        if i == 0:
            top = gateways[level]
            for a, b in zip(top, top[1:]):
                edges.append(Edge(a, b, medium="backbone"))
            continue
        above = gateways[levels_present[i - 1]]
        for gw_id in gateways[level]:
            n_links = 1 if len(above) == 1 else int(rng.integers(1, min(2, len(above)) + 1))
            picks = rng.choice(len(above), size=n_links, replace=False)
            for p in sorted(int(x) for x in picks):
                edges.append(Edge(above[p], gw_id, medium="uplink"))

    for profile in nodes.values():
        outage_cost(profile, params.cost_rate, params.outage_horizon_hours, params.criticality)

    # Deterministic addresses: 10.level.subnet.host
    per_subnet_counter: dict[str, int] = {}
    for subnet_no, members in enumerate(subnets):
        for host_no, node_id in enumerate(members):
            if not nodes[node_id].address:
                level = nodes[node_id].purdue_level
                nodes[node_id].address = f"10.{level}.{subnet_no}.{host_no + 1}"
            per_subnet_counter[node_id] = host_no

    top_level = levels_present[0]
    entries = sorted(
        n for n, p in nodes.items() if p.purdue_level == top_level and "-web" in n
    )
    if not entries:
        entries = [gateways[top_level][0]]

    topo = TopologyGraph(nodes=nodes, edges=edges, subnets=subnets, entry_points=entries)
    topo.validate()
    return topo


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------

def _schema_error_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(
        f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path
    )


def load_scenario(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc}") from exc
    return load_scenario_dict(doc)


def load_scenario_dict(doc: dict) -> ScenarioConfig:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ScenarioParseError(f"schema violation at {_schema_error_path(err)}: {err.message}")

    pool: dict[str, Vulnerability] = {}
    for raw in doc.get("vulnerability_pool", []):
        vuln = Vulnerability(
            id=raw["id"],
            access_complexity=AccessComplexity(raw["access_complexity"]),
            exploitability=float(raw["exploitability"]),
            locality=Locality(raw["locality"]),
            consequence=Consequence(raw["consequence"]),
        )
        if vuln.id in pool:
            raise ScenarioValidationError(f"duplicate vulnerability id {vuln.id!r}")
        pool[vuln.id] = vuln

    topo_doc = doc["topology"]
    if "generate" in topo_doc:
        params = GeneratorParams.from_dict(topo_doc["generate"])
        topology = generate_purdue_topology(params, sorted(pool.values(), key=lambda v: v.id))
    else:
        topology = _topology_from_doc(topo_doc, pool)
    topology.validate()

    defender_doc = doc["defender"]
    catalog = [
        CatalogEntry(
            kind=e["kind"],
            cost=float(e["cost"]),
            effect=float(e.get("effect", 0.0)),
            technique=e.get("technique", ""),
        )
        for e in defender_doc.get("catalog", [])
    ] or list(DEFAULT_CATALOG)
    defender = DefenderParams(
        capital=float(defender_doc["capital"]),
        income=float(defender_doc["income"]),
        sensor_count=int(defender_doc["sensor_count"]),
        catalog=catalog,
    )

    attacker_doc = doc.get("attacker", {})
    attacker = AttackerParams(
        skill_init=float(attacker_doc.get("skill_init", 0.5)),
        skill_increment=float(attacker_doc.get("skill_increment", 0.02)),
    )

    engine_doc = doc["engine"]
    ttc_doc = engine_doc.get("ttc", {})
    noise_doc = engine_doc.get("noise", {})
    engine = EngineParams(
        rounds=int(engine_doc["rounds"]),
        seed=int(engine_doc["seed"]),
        generation_method=engine_doc.get("generation_method", "with_defender"),
        ttc=TTCParams(
            t1=float(ttc_doc.get("t1", 1.0)),
            t2=float(ttc_doc.get("t2", 5.8)),
            p1_coeff=float(ttc_doc.get("p1_coeff", 1.0)),
        ),
        noise=NoiseParams(
            background_rate=float(noise_doc.get("background_rate", 0.15)),
            benign_pool_size=int(noise_doc.get("benign_pool_size", 32)),
            signature_overlap=float(noise_doc.get("signature_overlap", 0.5)),
        ),
        p_detect=float(engine_doc.get("p_detect", 0.8)),
        abandon_threshold=float(engine_doc.get("abandon_threshold", 0.2)),
        q_increment=float(engine_doc.get("q_increment", 0.5)),
        action_cap=int(engine_doc.get("action_cap", 200)),
        c_min=float(engine_doc.get("c_min", 1.0)),
    )

    return ScenarioConfig(
        topology=topology,
        vulnerability_pool=pool,
        defender=defender,
        attacker=attacker,
        engine=engine,
        document=copy.deepcopy(doc),
    )


def _topology_from_doc(topo_doc: dict, pool: dict[str, Vulnerability]) -> TopologyGraph:
    nodes: dict[str, NodeProfile] = {}
    dangling: list[str] = []
    for raw in topo_doc["nodes"]:
        vulns = []
        for vid in raw.get("vulnerabilities", []):
            if vid not in pool:
                dangling.append(vid)
                continue
            vulns.append(pool[vid])
        profile = NodeProfile(
            node_id=raw["node_id"],
            purdue_level=int(raw["purdue_level"]),
            peak_power_kw=float(raw.get("peak_power_kw", 0.0)),
            outage_cost=float(raw.get("outage_cost", 0.0)),
            vulnerabilities=vulns,
            services=[Service(s["protocol"], int(s["port"])) for s in raw.get("services", [])],
            accounts=list(raw.get("accounts", [])),
            credentials=list(raw.get("credentials", [])),
            routes=bool(raw.get("routes", False)),
            address=raw.get("address", ""),
        )
        if "outage_cost" not in raw:
            outage_cost(profile)
        if profile.node_id in nodes:
            raise ScenarioValidationError(f"duplicate node id {profile.node_id!r}")
        nodes[profile.node_id] = profile
    if dangling:
        raise ScenarioValidationError(
            "nodes reference unknown vulnerabilities: " + ", ".join(sorted(set(dangling)))
        )

    missing = []
    edges = []
    for raw in topo_doc["edges"]:
        for end in (raw["a"], raw["b"]):
            if end not in nodes:
                missing.append(end)
        edges.append(Edge(raw["a"], raw["b"], raw.get("medium", "lan")))
    if missing:
        raise ScenarioValidationError(
            "edges reference unknown nodes: " + ", ".join(sorted(set(missing)))
        )

    subnets = [list(s) for s in topo_doc["subnets"]]
    entry_points = list(topo_doc["entry_points"])

    for node_id, host_no in _address_plan(nodes).items():
        if not nodes[node_id].address:
            level = nodes[node_id].purdue_level
            nodes[node_id].address = f"10.{level}.{host_no >> 8}.{(host_no & 0xFF) + 1}"
    return TopologyGraph(nodes=nodes, edges=edges, subnets=subnets, entry_points=entry_points)


def _address_plan(nodes: dict[str, NodeProfile]) -> dict[str, int]:
    return {node_id: idx for idx, node_id in enumerate(sorted(nodes))}


def save_scenario(config: ScenarioConfig) -> str:
    """Serialize the original document; load(save(c)) reproduces c."""
    return json.dumps(config.document, indent=2, sort_keys=True)


def default_scenario_text() -> str:
    return resources.files("gridgame.data").joinpath("default_scenario.json").read_text()


def load_default_scenario() -> ScenarioConfig:
    return load_scenario(default_scenario_text())


def apply_overrides(doc: dict, *, seed: int | None = None, rounds: int | None = None,
                    method: str | None = None, sensor_count: int | None = None,
                    funds: str | None = None) -> dict:
    """Return a copy of a scenario document with run-level overrides applied."""
    out = copy.deepcopy(doc)
    if seed is not None:
        out["engine"]["seed"] = int(seed)
    if rounds is not None:
        out["engine"]["rounds"] = int(rounds)
    if method is not None:
        out["engine"]["generation_method"] = method
    if sensor_count is not None:
        out["defender"]["sensor_count"] = int(sensor_count)
    if funds is not None:
        if funds not in FUND_SCENARIOS:
            raise ScenarioValidationError(
                f"unknown fund scenario {funds!r}; expected one of {sorted(FUND_SCENARIOS)}"
            )
        capital, income = FUND_SCENARIOS[funds]
        out["defender"]["capital"] = capital
        out["defender"]["income"] = income
    return out
