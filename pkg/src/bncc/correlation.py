"""Entropy-based dependence between binary labels.

All entropies use base-2 logarithms, so for binary labels every value lives
in [0, 1]. Probabilities are raw empirical frequencies (no smoothing), the
0 * log 0 term is 0, and conditioning configurations that never occur
contribute nothing.

The dependence degree of label j on label k is 1 minus the conditional
entropy of j given k: 1 means k fully determines j, 0 means k carries no
information about j. The measure is deliberately asymmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset


def _binary_vector(x, name: str = "column") -> np.ndarray:
    col = np.asarray(x)
    if col.ndim != 1 or col.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d vector")
    if not np.isin(col, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    return col.astype(np.int64)


@dataclass(frozen=True, eq=False)
class PairDistribution:
    """Empirical 2x2 joint counts for a (target, condition) label pair.

    counts[y_target, y_condition] holds the cell count; marginals follow by
    row and column sums.
    """

    counts: np.ndarray
    total: int

    def __post_init__(self) -> None:
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (2, 2) or (c < 0).any():
            raise ValueError("counts must be a non-negative 2x2 table")
        if int(c.sum()) != self.total or self.total <= 0:
            raise ValueError("total must equal the sum of counts and be positive")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def target_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def condition_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True, eq=False)
class SetDistribution:
    """Counts of a target label split by every configuration of a label set.

    config_counts maps each 0/1 configuration tuple of the conditioning
    labels to (count with target 0, count with target 1). All 2^k
    configurations are present, including unobserved ones.
    """

    config_counts: dict
    total: int

    def __post_init__(self) -> None:
        if self.total <= 0:
            raise ValueError("total must be positive")
        arities = {len(cfg) for cfg in self.config_counts}
        if len(arities) > 1:
            raise ValueError("configuration keys must share one arity")
        s = sum(a + b for a, b in self.config_counts.values())
        if s != self.total:
            raise ValueError("config counts must sum to total")


@dataclass(frozen=True, eq=False)
class DependenceMatrix:
    """M x M matrix whose (k, j) entry is the dependence degree of j on k."""

    values: np.ndarray
    label_names: tuple[str, ...]

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("values must be square")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("diagonal entries must be 0")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError("dependence degrees must lie in [0, 1]")
        names = tuple(str(s) for s in self.label_names)
        if len(names) != v.shape[0]:
            raise ValueError("label_names must match matrix size")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "label_names", names)


def pair_distribution(target, condition) -> PairDistribution:
    """Tally the 2x2 joint counts of (target, condition)."""
    t = _binary_vector(target, "target")
    c = _binary_vector(condition, "condition")
    if t.size != c.size:
        raise ValueError(f"length mismatch: {t.size} vs {c.size}")
    n11 = int(t @ c)
    t1 = int(t.sum())
    c1 = int(c.sum())
    counts = np.array(
        [[t.size - t1 - c1 + n11, c1 - n11], [t1 - n11, n11]], dtype=np.int64
    )
    return PairDistribution(counts=counts, total=t.size)


def set_distribution(target, conditions) -> SetDistribution:
    """Tally target counts under every configuration of the condition set."""
    raw_target = np.asarray(target)
    for c in conditions:
        if np.shares_memory(raw_target, np.asarray(c)):
            raise ValueError("target is aliased with a conditioning column")
    t = _binary_vector(target, "target")
    cols = [_binary_vector(c, "condition") for c in conditions]
    if not cols:
        raise ValueError("need at least one conditioning column")
    for c in cols:
        if c.size != t.size:
            raise ValueError("all columns must share the target's length")
    k = len(cols)
    if k > 20:
        raise ValueError("too many conditioning labels to enumerate")
    code = np.zeros(t.size, dtype=np.int64)
    for i, c in enumerate(cols):
        code += c << i
    q_count = 1 << k
    n0 = np.bincount(code[t == 0], minlength=q_count)
    n1 = np.bincount(code[t == 1], minlength=q_count)
    config_counts = {
        tuple((q >> i) & 1 for i in range(k)): (int(n0[q]), int(n1[q]))
        for q in range(q_count)
    }
    return SetDistribution(config_counts=config_counts, total=t.size)


def label_entropy(column) -> float:
    """Entropy in bits of a single binary label column."""
    col = _binary_vector(column)
    n = col.size
    ones = int(col.sum())
    h = 0.0
    for c in (n - ones, ones):
        if c:
            h -= (c / n) * math.log2(c / n)
    return h


def conditional_entropy_pair(target, condition) -> float:
    """Remaining uncertainty of target, in bits, once condition is known."""
    dist = pair_distribution(target, condition)
    n = dist.total
    cond_marg = dist.condition_marginal()
    h = 0.0
    for yt in (0, 1):
        for yc in (0, 1):
            c = int(dist.counts[yt, yc])
            if c:
                h += (c / n) * math.log2(int(cond_marg[yc]) / c)
    return h


def conditional_entropy_set(target, conditions) -> float:
    """Remaining uncertainty of target given a whole set of labels.

    Computed as the configuration-weighted conditional entropy with the
    configuration probability in the log denominator (the standard
    definition); an empty condition set reduces to the plain entropy.
    """
    cols = list(conditions)
    if not cols:
        return label_entropy(target)
    dist = set_distribution(target, cols)
    n = dist.total
    h = 0.0
    for counts in dist.config_counts.values():
        n_cfg = counts[0] + counts[1]
        if n_cfg == 0:
            continue
        for c in counts:
            if c:
                h += (c / n) * math.log2(n_cfg / c)
    return h


def dependence_degree(target, condition) -> float:
    """1 minus the pair conditional entropy; how well condition decides target."""
    return 1.0 - conditional_entropy_pair(target, condition)


def dependence_degree_set(target, conditions) -> float:
    """1 minus the set conditional entropy."""
    return 1.0 - conditional_entropy_set(target, conditions)


def dependence_matrix(ds: MultiLabelDataset) -> DependenceMatrix:
    """Pairwise dependence degrees of every label on every other label.

    Entry (k, j) answers: knowing label k, how determined is label j?
    """
    Y = ds.labels
    n, m = Y.shape
    ones = Y.sum(axis=0)
    both = Y.T @ Y
    values = np.zeros((m, m), dtype=float)
    for k in range(m):
        k1 = int(ones[k])
        k0 = n - k1
        for j in range(m):
            if j == k:
                continue
            n11 = int(both[k, j])
            cells = (
                (n - k1 - int(ones[j]) + n11, k0),
                (int(ones[j]) - n11, k0),
                (k1 - n11, k1),
                (n11, k1),
            )
            h = 0.0
            for c, marg in cells:
                if c:
                    h += (c / n) * math.log2(marg / c)
            values[k, j] = 1.0 - h
    return DependenceMatrix(values=values, label_names=ds.label_names)


def dependence_csv(dep: DependenceMatrix, comment: str | None = None) -> str:
    """Row/column labelled CSV rendering with 6-decimal entries.

    Row k, column j holds the dependence of label j on label k.
    """
    out = []
    if comment:
        out.append(f"# {comment}")
    out.append(",".join(("label",) + dep.label_names))
    for k, name in enumerate(dep.label_names):
        cells = ",".join("%.6f" % dep.values[k, j] for j in range(len(dep.label_names)))
        out.append(f"{name},{cells}")
    return "\n".join(out) + "\n"
