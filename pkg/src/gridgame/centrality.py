"""Current-flow betweenness centrality and sensor placement.

The network is treated as a resistor mesh: every source/sink pair injects a
unit current and the throughput of a node is half the absolute current over
its incident edges, corrected so endpoints do not count their own injection.
Averaging over all pairs and normalizing by (n-1)(n-2) gives a score in
[0, 1].  On trees this coincides with shortest-path betweenness; on meshes
it also credits nodes on non-shortest detours, which is what makes it a
better sensor-placement guide than plain betweenness.
"""

from __future__ import annotations

import numpy as np

from .scenario import TopologyGraph


def _components(node_ids: list[str], edges: list[tuple[str, str]]) -> list[list[str]]:
    adjacency: dict[str, set[str]] = {n: set() for n in node_ids}
    for a, b in edges:
        if a == b:
            continue
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen: set[str] = set()
    out: list[list[str]] = []
    for start in node_ids:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            cur = stack.pop()
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    comp.append(nxt)
                    stack.append(nxt)
        out.append(sorted(comp))
    return out


def current_flow_betweenness(
    node_ids: list[str],
    edges: list[tuple[str, str]],
    resistance: dict[tuple[str, str], float] | None = None,
) -> dict[str, float]:
    """Normalized current-flow betweenness per node.

    ``resistance`` maps canonical (min, max) edge keys to a positive edge
    resistance; unlisted edges get 1.  Disconnected inputs are scored per
    component with component-local normalization; components smaller than
    three nodes score 0 since no pair can route through a third node.
    """
    resistance = resistance or {}
    scores = {n: 0.0 for n in node_ids}

    # Merge parallel undirected edges by summing conductance.
    conductance: dict[tuple[str, str], float] = {}
    for a, b in edges:
        if a == b:
            continue
        key = (a, b) if a <= b else (b, a)
        r = resistance.get(key, 1.0)
        if r <= 0:
            raise ValueError(f"edge {key} has non-positive resistance {r}")
        conductance[key] = conductance.get(key, 0.0) + 1.0 / r

    for comp in _components(node_ids, list(conductance)):
        n = len(comp)
        if n < 3:
            continue
        index = {node: i for i, node in enumerate(comp)}
        comp_edges = [
            (key, g) for key, g in sorted(conductance.items())
            if key[0] in index and key[1] in index
        ]

        laplacian = np.zeros((n, n))
        for (a, b), g in comp_edges:
            i, j = index[a], index[b]
            laplacian[i, i] += g
            laplacian[j, j] += g
            laplacian[i, j] -= g
            laplacian[j, i] -= g

        # Ground the first node: the reduced Laplacian is SPD and invertible
        # exactly when the component is connected, which _components ensures.
        inv = np.zeros((n, n))
        inv[1:, 1:] = np.linalg.inv(laplacian[1:, 1:])

        # For edge e=(a,b), the current induced by a unit s->t injection is
        # g * (inv[a,s] - inv[a,t] - inv[b,s] + inv[b,t]).  Summing absolute
        # currents over all unordered pairs reduces to a sorted partial-sum
        # pass over the potential-difference vector d = inv[a,:] - inv[b,:].
        positions = np.arange(n)
        pair_weights = 2.0 * positions - (n - 1)
        throughput = np.zeros(n)
        for (a, b), g in comp_edges:
            d = np.sort(inv[index[a], :] - inv[index[b], :])
            s_e = g * float(np.dot(pair_weights, d))
            throughput[index[a]] += s_e
            throughput[index[b]] += s_e

        norm = (n - 1.0) * (n - 2.0)
        for node, i in index.items():
            scores[node] = float((throughput[i] - (n - 1.0)) / norm)

    return scores


def edge_resistances(
    topology: TopologyGraph,
    quality: dict[str, float] | None = None,
    c_min: float = 1.0,
) -> dict[tuple[str, str], float]:
    """Resistance per link: the inverse of the larger endpoint outage cost.

    High-value endpoints make a link conductive, steering simulated current
    onto the corridors an attacker would traverse toward expensive targets.
    ``quality`` optionally scales each node's cost by the defender's learned
    importance factor.
    """
    quality = quality or {}
    out: dict[tuple[str, str], float] = {}
    for edge in topology.edges:
        cost_a = topology.nodes[edge.a].outage_cost * quality.get(edge.a, 1.0)
        cost_b = topology.nodes[edge.b].outage_cost * quality.get(edge.b, 1.0)
        out[edge.key()] = 1.0 / max(cost_a, cost_b, c_min)
    return out


def place_sensors(
    topology: TopologyGraph,
    count: int,
    quality: dict[str, float] | None = None,
    c_min: float = 1.0,
    exclude_links: frozenset = frozenset(),
) -> list[tuple[str, str]]:
    """Pick the ``count`` most load-bearing links to monitor.

    Links are ranked by the mean current-flow betweenness of their
    endpoints under cost-weighted resistances; ties break on the canonical
    edge key so placement is deterministic.  ``exclude_links`` removes
    blocked links from both candidacy and the flow computation.
    """
    edge_keys = sorted({e.key() for e in topology.edges} - set(exclude_links))
    if count > len(edge_keys):
        raise ValueError(
            f"cannot place {count} sensors on {len(edge_keys)} distinct links"
        )
    if count == 0:
        return []
    resist = edge_resistances(topology, quality, c_min)
    scores = current_flow_betweenness(
        topology.sorted_node_ids(), edge_keys, resist
    )
    # Round so that solver noise around exact ties cannot reorder links.
    ranked = sorted(
        edge_keys,
        key=lambda key: (-round((scores[key[0]] + scores[key[1]]) / 2.0, 12), key),
    )
    return ranked[:count]
