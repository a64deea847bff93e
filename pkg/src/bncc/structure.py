"""Label-network scoring and the greedy per-label parent search.

The score of a candidate network decomposes over labels. For one label with
a parent set of Q = 2^|parents| configurations the local score is

    sum over configurations q and values y of  N_qy * log2(N_qy / N_q)
    minus (Q / 2) * log2(N)

which is the data log-likelihood of the label given its parents minus a
complexity charge that doubles with every added parent. Unobserved
configurations contribute nothing to the likelihood but still count toward
Q. A whole network scores N plus the sum of local scores; the constant N
never affects a comparison but is kept in the reported breakdown.

The search processes labels in a given order. For each label it greedily
adds the candidate parent with the best extended local score, accepting
only strict improvements, stopping at the parent cap or when no candidate
improves. Labels that already parent `child_threshold` earlier-processed
labels are excluded from later candidate sets, which keeps any single label
from fanning out too widely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlation import DependenceMatrix, dependence_matrix
from .dataset import MultiLabelDataset
from .graph import (
    Edge,
    WeightedDigraph,
    break_cycles,
    fully_connected_dcg,
    topological_sort,
    validate_order,
)


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the parent search.

    parent_cap defaults to floor(log2 N) when left unset. With
    baseline_empty_set off, the first candidate parent is compared against
    negative infinity, so any label with candidates receives at least one
    parent; switching it on scores the empty parent set first, letting the
    complexity charge reject useless parents outright.
    """

    child_threshold: int = 3
    parent_cap: int | None = None
    baseline_empty_set: bool = False

    def __post_init__(self) -> None:
        if self.child_threshold < 1:
            raise ValueError("child_threshold must be at least 1")
        if self.parent_cap is not None and self.parent_cap < 0:
            raise ValueError("parent_cap must be non-negative")

    def resolve_parent_cap(self, n_instances: int) -> int:
        if self.parent_cap is not None:
            return self.parent_cap
        return int(math.floor(math.log2(n_instances))) if n_instances > 1 else 0


@dataclass(frozen=True, eq=False)
class CountTable:
    """Counts of one label's values under each parent configuration.

    Row q of `counts` holds (count with label 0, count with label 1) for the
    configuration whose bit i is parents[i]'s value. All 2^|parents| rows are
    present, observed or not.
    """

    label: int
    parents: tuple[int, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape != (1 << len(self.parents), 2) or (c < 0).any():
            raise ValueError("counts must be a non-negative (2^|parents|, 2) table")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))

    @property
    def q_count(self) -> int:
        return self.counts.shape[0]

    def config_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def config_bits(self, q: int) -> tuple[int, ...]:
        return tuple((q >> i) & 1 for i in range(len(self.parents)))


@dataclass(frozen=True)
class ParentSets:
    """Per-label parent assignments plus how many children each label has."""

    parents: tuple[tuple[int, ...], ...]
    child_counts: tuple[int, ...]

    @classmethod
    def from_parents(cls, parents, m: int) -> "ParentSets":
        norm = []
        counts = [0] * m
        for j, ps in enumerate(parents):
            ps = tuple(int(p) for p in ps)
            if j >= m or any(not 0 <= p < m for p in ps):
                raise ValueError("parent ids out of range")
            if j in ps:
                raise ValueError(f"label {j} cannot be its own parent")
            if len(set(ps)) != len(ps):
                raise ValueError(f"duplicate parent for label {j}")
            for p in ps:
                counts[p] += 1
            norm.append(ps)
        if len(norm) != m:
            raise ValueError(f"expected {m} parent lists, got {len(norm)}")
        return cls(parents=tuple(norm), child_counts=tuple(counts))


@dataclass(frozen=True)
class ScoreBreakdown:
    """Network score split into its constant, likelihood, and penalty parts."""

    constant: float
    loglik_term: float
    penalty: float
    total: float


def count_configs(ds: MultiLabelDataset, j: int, parents) -> CountTable:
    """Tally label j's values under every bit-configuration of its parents."""
    Y = ds.labels
    m = Y.shape[1]
    parents = tuple(int(p) for p in parents)
    if not 0 <= j < m:
        raise ValueError(f"label id {j} out of range")
    if j in parents:
        raise ValueError(f"label {j} cannot condition on itself")
    if any(not 0 <= p < m for p in parents):
        raise ValueError("parent ids out of range")
    if len(set(parents)) != len(parents):
        raise ValueError("duplicate parents")
    if len(parents) > 20:
        raise ValueError("too many parents to enumerate configurations")
    code = np.zeros(Y.shape[0], dtype=np.int64)
    for i, p in enumerate(parents):
        code += Y[:, p] << i
    q_count = 1 << len(parents)
    counts = np.zeros((q_count, 2), dtype=np.int64)
    np.add.at(counts, (code, Y[:, j]), 1)
    return CountTable(label=int(j), parents=parents, counts=counts)


def _loglik_term(table: CountTable) -> float:
    s = 0.0
    totals = table.config_totals()
    for q in range(table.q_count):
        n_q = int(totals[q])
        if n_q == 0:
            continue
        for c in (int(table.counts[q, 0]), int(table.counts[q, 1])):
            if c:
                s += c * math.log2(c / n_q)
    return s


def local_score(ds: MultiLabelDataset, j: int, parents) -> float:
    """Likelihood-minus-penalty score of one label under the given parents."""
    table = count_configs(ds, j, parents)
    penalty = (table.q_count / 2.0) * math.log2(ds.n_instances)
    return _loglik_term(table) - penalty


def total_score(ds: MultiLabelDataset, ps: ParentSets) -> ScoreBreakdown:
    """Score of a whole parent assignment: N + sum of local scores."""
    if len(ps.parents) != ds.n_labels:
        raise ValueError("parent sets do not match the dataset's label count")
    n = ds.n_instances
    loglik = 0.0
    penalty = 0.0
    for j, parents in enumerate(ps.parents):
        table = count_configs(ds, j, parents)
        loglik += _loglik_term(table)
        penalty += (table.q_count / 2.0) * math.log2(n)
    return ScoreBreakdown(
        constant=float(n),
        loglik_term=loglik,
        penalty=penalty,
        total=float(n) + loglik - penalty,
    )


def learn_parent_sets(
    ds: MultiLabelDataset,
    initial_order,
    cfg: SearchConfig,
    dep: DependenceMatrix,
) -> WeightedDigraph:
    """Greedy parent selection for each label, processed in the given order.

    Emits a digraph with one edge per chosen parent, weighted with the
    pairwise dependence degree. The result may contain cycles because every
    other label is a candidate parent regardless of its own position.
    """
    m = ds.n_labels
    order = validate_order(initial_order, m)
    cap = cfg.resolve_parent_cap(ds.n_instances)
    child_counts = [0] * m
    edges: list[Edge] = []
    for j in order:
        candidates = [
            l for l in range(m) if l != j and child_counts[l] < cfg.child_threshold
        ]
        chosen: list[int] = []
        s_opt = local_score(ds, j, ()) if cfg.baseline_empty_set else -math.inf
        while len(chosen) < cap and candidates:
            scored = [(local_score(ds, j, (*chosen, l)), l) for l in candidates]
            s_new, best = max(scored, key=lambda t: (t[0], -t[1]))
            if s_new > s_opt:
                chosen.append(best)
                candidates.remove(best)
                s_opt = s_new
            else:
                break
        for k in chosen:
            edges.append(Edge(k, j, float(dep.values[k, j])))
        for k in chosen:
            child_counts[k] += 1
    return WeightedDigraph(m, tuple(edges), ds.label_names)


def parent_sets_from_graph(g: WeightedDigraph) -> ParentSets:
    """Read each node's in-edges as its parent set."""
    parents: list[list[int]] = [[] for _ in range(g.node_count)]
    for e in g.edges:
        parents[e.end].append(e.start)
    return ParentSets.from_parents([sorted(p) for p in parents], g.node_count)


@dataclass(frozen=True)
class OrderDiagnostics:
    """Intermediate artifacts of the order-discovery pipeline."""

    alpha: tuple[int, ...]
    initial_dag: WeightedDigraph
    removed_initial: tuple[Edge, ...]
    learned_graph: WeightedDigraph
    removed_final: tuple[Edge, ...]
    score_learned: ScoreBreakdown
    score_final: ScoreBreakdown


@dataclass(frozen=True)
class OrderResult:
    tau: tuple[int, ...]
    final_dag: WeightedDigraph
    diagnostics: OrderDiagnostics


def build_order(ds: MultiLabelDataset, cfg: SearchConfig | None = None) -> OrderResult:
    """Full order-discovery pipeline.

    Dependence matrix -> complete two-way digraph -> cycle-breaking ->
    provisional order -> greedy parent search -> cycle-breaking again (the
    learned graph may be cyclic) -> final order.
    """
    if ds.n_labels < 2:
        raise ValueError("need at least two labels")
    cfg = cfg or SearchConfig()
    dep = dependence_matrix(ds)
    dcg = fully_connected_dcg(dep)
    initial_dag = break_cycles(dcg)
    alpha = topological_sort(initial_dag)
    learned = learn_parent_sets(ds, alpha, cfg, dep)
    final_dag = break_cycles(learned)
    tau = topological_sort(final_dag)
    removed_initial = tuple(
        e for e in dcg.edges if (e.start, e.end) not in initial_dag.edge_set()
    )
    removed_final = tuple(
        e for e in learned.edges if (e.start, e.end) not in final_dag.edge_set()
    )
    diag = OrderDiagnostics(
        alpha=alpha,
        initial_dag=initial_dag,
        removed_initial=removed_initial,
        learned_graph=learned,
        removed_final=removed_final,
        score_learned=total_score(ds, parent_sets_from_graph(learned)),
        score_final=total_score(ds, parent_sets_from_graph(final_dag)),
    )
    return OrderResult(tau=tau, final_dag=final_dag, diagnostics=diag)


def diagnostics_dict(res: OrderResult) -> dict:
    """JSON-ready view of an order-discovery run."""
    names = res.final_dag.node_labels

    def edge_list(edges):
        return [
            {"start": names[e.start], "end": names[e.end], "weight": e.weight}
            for e in edges
        ]

    def score_dict(s: ScoreBreakdown):
        return {
            "constant": s.constant,
            "loglik_term": s.loglik_term,
            "penalty": s.penalty,
            "total": s.total,
        }

    ps = parent_sets_from_graph(res.final_dag)
    return {
        "tau": [names[i] for i in res.tau],
        "alpha": [names[i] for i in res.diagnostics.alpha],
        "final_edges": edge_list(res.final_dag.edges),
        "removed_initial": edge_list(res.diagnostics.removed_initial),
        "removed_final": edge_list(res.diagnostics.removed_final),
        "parents": {
            names[j]: [names[p] for p in parents]
            for j, parents in enumerate(ps.parents)
        },
        "score_learned": score_dict(res.diagnostics.score_learned),
        "score_final": score_dict(res.diagnostics.score_final),
    }
