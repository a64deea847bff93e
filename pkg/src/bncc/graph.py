"""Weighted directed graphs over labels.

Provides the fully connected dependence digraph, deterministic cycle
detection, iterative cycle-breaking (drop the weakest edge of each cycle
found), topological sorting, and DOT/JSON serialization.

All tie-breaking rules are fixed so that every operation is a pure,
reproducible function of its input:

* cycle search is a depth-first search rooted at ascending node ids,
  expanding out-edges in ascending end-node order;
* the removed edge of a cycle is the minimum-weight one, ties resolved by
  smallest (start, end) pair;
* topological sorting always takes the smallest available node id.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, NamedTuple

if TYPE_CHECKING:  # pragma: no cover
    from .correlation import DependenceMatrix


class GraphCycleError(ValueError):
    """Raised when an operation that requires a DAG receives a cyclic graph."""


class Edge(NamedTuple):
    start: int
    end: int
    weight: float


@dataclass(frozen=True)
class WeightedDigraph:
    """Directed graph with at most one weighted edge per ordered node pair."""

    node_count: int
    edges: tuple[Edge, ...] = ()
    node_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        m = int(self.node_count)
        if m < 1:
            raise ValueError("graph needs at least one node")
        labels = self.node_labels
        if labels is None:
            labels = tuple(f"l{i}" for i in range(m))
        labels = tuple(str(x) for x in labels)
        if len(labels) != m:
            raise ValueError(f"expected {m} node labels, got {len(labels)}")
        seen: set[tuple[int, int]] = set()
        edges = []
        for raw in self.edges:
            e = Edge(int(raw[0]), int(raw[1]), float(raw[2]))
            if not (0 <= e.start < m and 0 <= e.end < m):
                raise ValueError(f"edge {e.start}->{e.end} out of range for {m} nodes")
            if e.start == e.end:
                raise ValueError(f"self-loop on node {e.start}")
            if (e.start, e.end) in seen:
                raise ValueError(f"duplicate edge {e.start}->{e.end}")
            if not 0.0 <= e.weight <= 1.0:
                raise ValueError(f"edge weight {e.weight!r} outside [0, 1]")
            seen.add((e.start, e.end))
            edges.append(e)
        edges.sort(key=lambda e: (e.start, e.end))
        object.__setattr__(self, "node_count", m)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "node_labels", labels)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.start, e.end) for e in self.edges}


def _adjacency(g: WeightedDigraph) -> dict[int, dict[int, float]]:
    adj: dict[int, dict[int, float]] = {v: {} for v in range(g.node_count)}
    for e in g.edges:
        adj[e.start][e.end] = e.weight
    return adj


def _find_cycle(adj: dict[int, dict[int, float]], m: int) -> tuple[Edge, ...] | None:
    # Colors: 0 unvisited, 1 on the current DFS stack, 2 finished.
    color = [0] * m
    for root in range(m):
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, iter(sorted(adj[root].items())))]
        path: list[Edge] = []
        while stack:
            node, it = stack[-1]
            step = next(it, None)
            if step is None:
                color[node] = 2
                stack.pop()
                if path:
                    path.pop()
                continue
            end, weight = step
            if color[end] == 1:
                closing = Edge(node, end, weight)
                for i, e in enumerate(path):
                    if e.start == end:
                        return tuple(path[i:]) + (closing,)
                # end is gray, so it must sit on the path unless it is the
                # current node, which a self-loop check already rules out.
                raise AssertionError("gray node missing from DFS path")
            if color[end] == 0:
                color[end] = 1
                path.append(Edge(node, end, weight))
                stack.append((end, iter(sorted(adj[end].items()))))
    return None


def find_cycle(g: WeightedDigraph) -> tuple[Edge, ...] | None:
    """Return one simple directed cycle as an edge list, or None for a DAG."""
    return _find_cycle(_adjacency(g), g.node_count)


def break_cycles(g: WeightedDigraph) -> WeightedDigraph:
    """Delete the weakest edge of each discovered cycle until acyclic.

    Acyclic inputs come back unchanged. The result depends on the fixed
    cycle-discovery order, not on any global feedback-edge optimization.
    """
    adj = _adjacency(g)
    while (cycle := _find_cycle(adj, g.node_count)) is not None:
        victim = min(cycle, key=lambda e: (e.weight, e.start, e.end))
        del adj[victim.start][victim.end]
    kept = tuple(
        Edge(s, t, w) for s, nbrs in adj.items() for t, w in nbrs.items()
    )
    return WeightedDigraph(g.node_count, kept, g.node_labels)


def topological_sort(g: WeightedDigraph) -> tuple[int, ...]:
    """Order nodes so every edge points forward; smallest id breaks ties."""
    m = g.node_count
    in_deg = [0] * m
    out = _adjacency(g)
    for e in g.edges:
        in_deg[e.end] += 1
    ready = [v for v in range(m) if in_deg[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for end in sorted(out[v]):
            in_deg[end] -= 1
            if in_deg[end] == 0:
                heapq.heappush(ready, end)
    if len(order) != m:
        raise GraphCycleError("graph contains a cycle; topological order undefined")
    return tuple(order)


def fully_connected_dcg(dep: "DependenceMatrix") -> WeightedDigraph:
    """Two-way complete digraph whose edge (k, j) carries dependence of j on k."""
    values = dep.values
    m = values.shape[0]
    edges = tuple(
        Edge(k, j, float(values[k, j]))
        for k in range(m)
        for j in range(m)
        if j != k
    )
    return WeightedDigraph(m, edges, dep.label_names)


def _quote(name: str) -> str:
    return '"%s"' % name.replace('"', '\\"')


def export_dot(g: WeightedDigraph, header_comment: str | None = None) -> str:
    """Render as a DOT digraph with 6-decimal weight attributes."""
    lines = []
    if header_comment:
        lines.append(f"// {header_comment}")
    lines.append("digraph labels {")
    for name in g.node_labels:
        lines.append(f"  {_quote(name)};")
    for e in g.edges:
        lines.append(
            "  %s -> %s [weight=%.6f];"
            % (_quote(g.node_labels[e.start]), _quote(g.node_labels[e.end]), e.weight)
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def adjacency_json(g: WeightedDigraph) -> dict:
    """JSON-ready adjacency listing used by the command line exports."""
    return {
        "node_count": g.node_count,
        "nodes": list(g.node_labels),
        "edges": [
            {"start": e.start, "end": e.end, "weight": e.weight} for e in g.edges
        ],
    }


def validate_order(order: Iterable[int], m: int) -> tuple[int, ...]:
    """Check that order is a permutation of range(m) and return it as a tuple."""
    perm = tuple(int(v) for v in order)
    if sorted(perm) != list(range(m)):
        raise ValueError(f"not a permutation of 0..{m - 1}: {perm!r}")
    return perm
