"""Attack-graph derivation over network facts.

The reachability logic is a tiny Datalog engine: no negation, no function
symbols, every head variable bound in the body.  Facts extracted from the
topology (who can talk to whom, which vulnerabilities sit where, stored
credentials, routing gateways) are closed under a fixed rule set by
semi-naive forward chaining.  Every rule application is kept, so the result
doubles as a logical attack graph (AND/OR/LEAF) and as the source of the
attacker's action graph.

Everything here is deliberately order-deterministic: base facts are sorted,
derived facts live in insertion-ordered dicts, and no bare set is ever
iterated where order can leak into output.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field
from pathlib import Path

from .scenario import Consequence, Locality, TopologyGraph


@dataclass(frozen=True)
class Fact:
    predicate: str
    args: tuple

    def __str__(self):
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"

    def sort_key(self):
        return (self.predicate, tuple(str(a) for a in self.args))


@dataclass(frozen=True)
class Var:
    name: str


Atom = tuple  # (predicate, term, term, ...) with terms Var or constants


@dataclass(frozen=True)
class ActionSpec:
    """How a rule application translates into an attacker action edge."""

    src_var: str
    src_priv: str  # "user" | "root"
    dst_var: str
    dst_priv: str
    vuln_var: str | None = None
    net_var_pair: tuple[str, str] | None = None  # (src, dst) vars of the carrying netAccess


@dataclass(frozen=True)
class Rule:
    name: str
    head: Atom
    body: tuple
    technique: str = ""
    action: ActionSpec | None = None


def _rules() -> tuple[Rule, ...]:
    h, s, v, g, u = Var("H"), Var("S"), Var("V"), Var("G"), Var("U")
    h1, h2 = Var("H1"), Var("H2")
    prot, port = Var("Prot"), Var("Port")
    prot2, port2 = Var("Prot2"), Var("Port2")
    return (
        Rule(
            name="initial_access",
            head=("execCode", h),
            body=(("attackerLocated", h),),
            technique="TA0001",
        ),
        Rule(
            name="control_via_exec",
            head=("controlled", h),
            body=(("execCode", h),),
            technique="TA0002",
        ),
        Rule(
            name="remote_exploit",
            head=("execCode", h),
            body=(
                ("controlled", s),
                ("netAccess", s, h, prot, port),
                ("vulExists", h, v, "remote", "codeExec"),
            ),
            technique="T1190",
            action=ActionSpec("S", "user", "H", "user", vuln_var="V",
                              net_var_pair=("S", "H")),
        ),
        Rule(
            name="local_privilege_escalation",
            head=("fullControl", h),
            body=(
                ("execCode", h),
                ("vulExists", h, v, "local", "privEscalation"),
            ),
            technique="T1068",
            action=ActionSpec("H", "user", "H", "root", vuln_var="V"),
        ),
        Rule(
            name="credential_lateral_movement",
            head=("execCode", h2),
            body=(
                ("fullControl", h1),
                ("credStored", h1, u),
                ("hasAccount", u, h2),
                ("netAccess", h1, h2, prot, port),
            ),
            technique="T1078",
            action=ActionSpec("H1", "root", "H2", "user",
                              net_var_pair=("H1", "H2")),
        ),
        Rule(
            name="forwarded_access",
            head=("netAccess", s, h, prot, port),
            body=(
                ("routes", g),
                ("netAccess", s, g, prot2, port2),
                ("netAccess", g, h, prot, port),
            ),
            technique="T1599",
        ),
        Rule(
            name="disruption_on_control",
            head=("serviceDisrupted", h),
            body=(("fullControl", h),),
            technique="T0816",
        ),
        Rule(
            name="remote_data_exposure",
            head=("dataExfiltrated", h),
            body=(
                ("controlled", s),
                ("netAccess", s, h, prot, port),
                ("vulExists", h, v, "remote", "infoLeak"),
            ),
            technique="T1041",
        ),
    )


DEFAULT_RULES = _rules()
MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class Application:
    rule: str
    technique: str
    head: Fact
    body: tuple
    bindings: tuple  # sorted (var name, value) pairs


class RulesetError(Exception):
    pass


def _check_range_restricted(rules):
    for rule in rules:
        body_vars = {t.name for atom in rule.body for t in atom[1:] if isinstance(t, Var)}
        head_vars = {t.name for t in rule.head[1:] if isinstance(t, Var)}
        if not head_vars <= body_vars:
            raise RulesetError(
                f"rule {rule.name}: head variables {sorted(head_vars - body_vars)} unbound"
            )


_check_range_restricted(DEFAULT_RULES)


def _unify(terms, args, sub):
    if len(terms) != len(args):
        return None
    out = dict(sub)
    for term, arg in zip(terms, args):
        if isinstance(term, Var):
            bound = out.get(term.name, arg)
            if bound != arg:
                return None
            out[term.name] = arg
        elif term != arg:
            return None
    return out


class _FactIndex:
    """Facts indexed by predicate and by (predicate, position, value).

    Insertion order is preserved everywhere so match enumeration stays
    deterministic regardless of hash seeding.
    """

    __slots__ = ("by_pred", "by_arg")

    def __init__(self):
        self.by_pred: dict = {}
        self.by_arg: dict = {}

    def add(self, fact: Fact) -> None:
        self.by_pred.setdefault(fact.predicate, {})[fact] = None
        for pos, val in enumerate(fact.args):
            self.by_arg.setdefault((fact.predicate, pos, val), {})[fact] = None

    def candidates(self, atom, sub):
        """Smallest indexed pool consistent with the bound atom positions."""
        best = self.by_pred.get(atom[0])
        if not best:
            return ()
        for pos, term in enumerate(atom[1:]):
            if isinstance(term, Var):
                if term.name not in sub:
                    continue
                val = sub[term.name]
            else:
                val = term
            pool = self.by_arg.get((atom[0], pos, val))
            if not pool:
                return ()
            if len(pool) < len(best):
                best = pool
        return best


def _atom_order(body, d_pos):
    """Join order starting at the delta atom, then greedily picking the
    atom with the fewest still-unbound variables."""
    order = [d_pos]
    bound = {t.name for t in body[d_pos][1:] if isinstance(t, Var)}
    remaining = [i for i in range(len(body)) if i != d_pos]
    while remaining:
        nxt = min(remaining, key=lambda i: (
            sum(1 for t in body[i][1:]
                if isinstance(t, Var) and t.name not in bound),
            i,
        ))
        remaining.remove(nxt)
        order.append(nxt)
        bound |= {t.name for t in body[nxt][1:] if isinstance(t, Var)}
    return tuple(order)


class Derivation:
    """Closure of base facts under the rules, with provenance.

    With full_provenance every distinct rule application is retained,
    which is what graph export wants.  Without it, duplicate applications
    of rules that carry no action spec are dropped once their head is
    known; action applications and first supports are kept either way,
    so planning sees the same graph at a fraction of the cost.
    """

    def __init__(self, base: list, rules=DEFAULT_RULES, full_provenance=True):
        self.rules = rules
        self.full_provenance = full_provenance
        self.base = tuple(sorted(set(base), key=Fact.sort_key))
        self.facts: dict = {f: None for f in self.base}
        self.applications: list = []
        self.first_support: dict = {}
        self._orders = {
            (ri, d_pos): _atom_order(rule.body, d_pos)
            for ri, rule in enumerate(rules)
            for d_pos in range(len(rule.body))
        }
        self._run()

    def _run(self):
        index = _FactIndex()
        for fact in self.facts:
            index.add(fact)
        delta = dict(self.facts)
        seen_apps = set()
        head_templates = [
            (rule.head[0],
             tuple((t.name if isinstance(t, Var) else None, t)
                   for t in rule.head[1:]))
            for rule in self.rules
        ]
        for _ in range(MAX_ITERATIONS):
            if not delta:
                return
            delta_index = _FactIndex()
            for fact in delta:
                delta_index.add(fact)
            new_delta: dict = {}
            for ri, rule in enumerate(self.rules):
                retain = self.full_provenance or rule.action is not None
                head_pred, head_terms = head_templates[ri]
                for d_pos in range(len(rule.body)):
                    order = self._orders[ri, d_pos]
                    for sub in self._matches(rule.body, order, delta_index, index):
                        head = Fact(head_pred, tuple(
                            sub[name] if name is not None else t
                            for name, t in head_terms
                        ))
                        known = head in self.facts
                        if known and not retain:
                            continue
                        bindings = tuple(sorted(sub.items()))
                        if retain:
                            key = (ri, bindings)
                            if key in seen_apps:
                                continue
                            seen_apps.add(key)
                        app = Application(
                            rule=rule.name,
                            technique=rule.technique,
                            head=head,
                            body=tuple(
                                Fact(atom[0], tuple(
                                    sub[t.name] if isinstance(t, Var) else t
                                    for t in atom[1:]
                                ))
                                for atom in rule.body
                            ),
                            bindings=bindings,
                        )
                        self.applications.append(app)
                        if not known:
                            # Support is only recorded for genuinely new
                            # facts, so every chain bottoms out in strictly
                            # older facts and re-derived base facts stay base.
                            self.first_support[head] = app
                            self.facts[head] = None
                            new_delta[head] = None
                            index.add(head)
            delta = new_delta
        raise RulesetError("derivation did not settle; rules are not terminating")

    def _matches(self, body, order, delta_index, index):
        out = []
        last = len(order) - 1

        def walk(k, sub):
            atom = body[order[k]]
            source = delta_index if k == 0 else index
            for fact in source.candidates(atom, sub):
                nxt = _unify(atom[1:], fact.args, sub)
                if nxt is not None:
                    if k == last:
                        out.append(nxt)
                    else:
                        walk(k + 1, nxt)

        walk(0, {})
        return out

    def query(self, predicate: str) -> list:
        return [f for f in self.facts if f.predicate == predicate]

    def holds(self, fact: Fact) -> bool:
        return fact in self.facts

    def is_base(self, fact: Fact) -> bool:
        return fact in self.facts and fact not in self.first_support

    def physical_links(self, net_fact: Fact) -> tuple:
        """Canonical topology links traversed by a (possibly forwarded)
        netAccess fact, by walking its first derivation to base facts."""
        if net_fact.predicate != "netAccess":
            raise ValueError(f"not a netAccess fact: {net_fact}")
        if self.is_base(net_fact):
            a, b = net_fact.args[0], net_fact.args[1]
            return ((a, b) if a <= b else (b, a),)
        links: dict = {}
        support = self.first_support[net_fact]
        for premise in support.body:
            if premise.predicate == "netAccess":
                for link in self.physical_links(premise):
                    links[link] = None
        return tuple(links)


def facts_from_topology(
    topology: TopologyGraph,
    blocked_links: tuple = (),
) -> list:
    """Base facts for the derivation.

    A service on a host is reachable over every unblocked link touching
    that host, in both directions; hosts exposing no service are not
    remotely reachable at all.  Blocked links are canonical (min, max)
    node pairs severed by the defender.
    """
    blocked = {tuple(sorted(link)) for link in blocked_links}
    facts: list = []
    for entry in sorted(topology.entry_points):
        facts.append(Fact("attackerLocated", (entry,)))
    for edge in topology.edges:
        if edge.key() in blocked:
            continue
        for src, dst in ((edge.a, edge.b), (edge.b, edge.a)):
            for svc in topology.nodes[dst].services:
                facts.append(Fact("netAccess", (src, dst, svc.protocol, svc.port)))
    for node_id in topology.sorted_node_ids():
        profile = topology.nodes[node_id]
        for vuln in profile.vulnerabilities:
            facts.append(Fact("vulExists", (
                node_id, vuln.id, vuln.locality.value, vuln.consequence.value
            )))
        for user in sorted(profile.credentials):
            facts.append(Fact("credStored", (node_id, user)))
        for user in sorted(profile.accounts):
            facts.append(Fact("hasAccount", (user, node_id)))
        if profile.routes:
            facts.append(Fact("routes", (node_id,)))
    return facts


# --------------------------------------------------------------------------
# Attacker action graph
# --------------------------------------------------------------------------

ROOT_SUFFIX = "#root"


def action_node(host: str, priv: str) -> str:
    return host + ROOT_SUFFIX if priv == "root" else host


def node_host(action_id: str) -> str:
    return action_id[: -len(ROOT_SUFFIX)] if action_id.endswith(ROOT_SUFFIX) else action_id


@dataclass(frozen=True)
class ActionEdge:
    """One executable attacker step, prior to any weighting."""

    src: str  # action node id
    dst: str
    rule: str
    technique: str
    vuln_id: str | None
    links: tuple  # canonical topology links the traffic crosses; () if local
    protocol: str | None
    port: int | None

    @property
    def src_host(self) -> str:
        return node_host(self.src)

    @property
    def dst_host(self) -> str:
        return node_host(self.dst)

    @property
    def is_local(self) -> bool:
        return not self.links

    def identity(self):
        return (self.src, self.dst, self.rule, self.vuln_id or "", self.links)


def action_edges(derivation: Derivation, rules=DEFAULT_RULES) -> list:
    """Every action-bearing rule application as a graph edge, deduplicated
    on (src, dst, rule, vuln, links) so parallel service ports collapse."""
    specs = {rule.name: rule.action for rule in rules if rule.action is not None}
    out: list = []
    seen: set = set()
    for app in derivation.applications:
        spec = specs.get(app.rule)
        if spec is None:
            continue
        binding = dict(app.bindings)
        src = action_node(binding[spec.src_var], spec.src_priv)
        dst = action_node(binding[spec.dst_var], spec.dst_priv)
        links: tuple = ()
        protocol = port = None
        if spec.net_var_pair is not None:
            net_fact = next(
                premise for premise in app.body if premise.predicate == "netAccess"
            )
            links = derivation.physical_links(net_fact)
            protocol = net_fact.args[2]
            port = net_fact.args[3]
        edge = ActionEdge(
            src=src,
            dst=dst,
            rule=app.rule,
            technique=app.technique,
            vuln_id=binding[spec.vuln_var] if spec.vuln_var else None,
            links=links,
            protocol=protocol,
            port=port,
        )
        if edge.identity() in seen:
            continue
        seen.add(edge.identity())
        out.append(edge)
    return out


def cheapest_path(
    adjacency: dict,
    sources: list,
    targets: set,
) -> tuple | None:
    """Least-cost path from any source to any target.

    ``adjacency`` maps node -> list of (neighbor, weight).  Ties on cost
    resolve to the lexicographically smallest node sequence, which keeps
    plans reproducible across runs.  Returns (cost, [nodes]) or None.
    """
    heap = [(0.0, (src,)) for src in sorted(set(sources))]
    heapq.heapify(heap)
    settled = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node in targets:
            return cost, list(path)
        for neighbor, weight in adjacency.get(node, ()):
            if weight < 0:
                raise ValueError(f"negative weight on {node}->{neighbor}")
            if neighbor in settled:
                continue
            heapq.heappush(heap, (cost + weight, path + (neighbor,)))
    return None


# --------------------------------------------------------------------------
# Logical attack graph export/import (AND/OR/LEAF vertex tables)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LagVertex:
    id: int
    label: str
    kind: str  # "LEAF" | "OR" | "AND"
    metric: float


@dataclass
class LogicalAttackGraph:
    vertices: list
    arcs: list  # (src_id, dst_id, weight) directed premise -> conclusion

    def vertex_by_label(self) -> dict:
        return {v.label: v for v in self.vertices}


def logical_attack_graph(derivation: Derivation) -> LogicalAttackGraph:
    """AND/OR graph over the full derivation.

    Facts become LEAF (base) or OR (derived) vertices; every rule
    application becomes an AND vertex wired premise -> AND -> conclusion.
    """
    vertices: list = []
    arcs: list = []
    fact_ids: dict = {}

    def fact_vertex(fact: Fact) -> int:
        if fact not in fact_ids:
            kind = "LEAF" if derivation.is_base(fact) else "OR"
            vid = len(vertices) + 1
            vertices.append(LagVertex(vid, str(fact), kind, 0.0))
            fact_ids[fact] = vid
        return fact_ids[fact]

    for fact in derivation.base:
        fact_vertex(fact)
    for app in derivation.applications:
        and_id = len(vertices) + 1
        vertices.append(LagVertex(and_id, f"{app.rule}:{app.head}", "AND", 0.0))
        for premise in app.body:
            arcs.append((fact_vertex(premise), and_id, -1.0))
        arcs.append((and_id, fact_vertex(app.head), -1.0))
    return LogicalAttackGraph(vertices=vertices, arcs=arcs)


VERTICES_FILE = "VERTICES.CSV"
ARCS_FILE = "ARCS.CSV"


def write_graph_csv(lag: LogicalAttackGraph, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with io.StringIO() as buf:
        writer = csv.writer(buf, lineterminator="\n")
        for v in lag.vertices:
            writer.writerow([v.id, v.label, v.kind, v.metric])
        (out / VERTICES_FILE).write_text(buf.getvalue())
    with io.StringIO() as buf:
        writer = csv.writer(buf, lineterminator="\n")
        for src, dst, weight in lag.arcs:
            writer.writerow([src, dst, weight])
        (out / ARCS_FILE).write_text(buf.getvalue())


def read_graph_csv(in_dir) -> LogicalAttackGraph:
    base = Path(in_dir)
    vertices = []
    with open(base / VERTICES_FILE, newline="") as handle:
        for row in csv.reader(handle):
            vertices.append(LagVertex(int(row[0]), row[1], row[2], float(row[3])))
    arcs = []
    with open(base / ARCS_FILE, newline="") as handle:
        for row in csv.reader(handle):
            arcs.append((int(row[0]), int(row[1]), float(row[2])))
    return LogicalAttackGraph(vertices=vertices, arcs=arcs)
