"""Multi-label dataset container, file loaders, splits, and a synthetic generator."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Edge, GraphCycleError, WeightedDigraph, topological_sort


class DataFormatError(ValueError):
    """Raised when an input file or dataset fails validation."""


def _locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """N x d real feature matrix paired with an N x M binary label matrix.

    Instances are immutable after construction: arrays are copied and write
    protected, so shared datasets are safe to use from concurrent code.
    """

    features: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        Y = np.asarray(self.labels)
        if X.ndim != 2 or Y.ndim != 2:
            raise DataFormatError("features and labels must be 2-dimensional")
        n, d = X.shape
        n2, m = Y.shape
        if n < 1 or d < 1:
            raise DataFormatError("need at least one instance and one feature")
        if m < 2:
            raise DataFormatError("need at least two labels")
        if n != n2:
            raise DataFormatError(f"feature rows ({n}) != label rows ({n2})")
        if not np.all(np.isfinite(X)):
            raise DataFormatError("features contain NaN or infinite values")
        if not np.isin(Y, (0, 1)).all():
            raise DataFormatError("labels must be exactly 0 or 1")
        label_names = tuple(str(s) for s in self.label_names)
        feature_names = tuple(str(s) for s in self.feature_names)
        if len(label_names) != m or len(set(label_names)) != m:
            raise DataFormatError("label names must be unique and match label count")
        if len(feature_names) != d or len(set(feature_names)) != d:
            raise DataFormatError("feature names must be unique and match feature count")
        object.__setattr__(self, "features", _locked(X))
        object.__setattr__(self, "labels", _locked(Y.astype(np.int64)))
        object.__setattr__(self, "label_names", label_names)
        object.__setattr__(self, "feature_names", feature_names)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class DatasetStats:
    """Label cardinality, density, imbalance, and per-label positive counts."""

    cardinality: float
    avg_ir: float
    label_density: float
    per_label_positive_counts: tuple[int, ...]
    degenerate_labels: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Deterministic assignment of every instance to one of k folds."""

    k: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        a = np.asarray(self.assignments, dtype=np.int64)
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if a.ndim != 1 or a.size < self.k:
            raise ValueError("assignments must cover at least k instances")
        if a.min() < 0 or a.max() >= self.k:
            raise ValueError("fold ids out of range")
        object.__setattr__(self, "assignments", _locked(a))


def subset(ds: MultiLabelDataset, rows) -> MultiLabelDataset:
    """Dataset restricted to the given row indices or boolean mask."""
    return MultiLabelDataset(
        ds.features[rows], ds.labels[rows], ds.label_names, ds.feature_names
    )


def stats(ds: MultiLabelDataset) -> DatasetStats:
    """Summary statistics of the label matrix.

    The imbalance ratio of a label is majority count over minority count.
    Labels where one class is absent get the sentinel ratio N and are listed
    as degenerate instead of being rejected.
    """
    Y = ds.labels
    n, m = Y.shape
    positives = Y.sum(axis=0)
    cardinality = float(Y.sum()) / n
    degenerate = []
    ratios = []
    for j in range(m):
        pos = int(positives[j])
        neg = n - pos
        if min(pos, neg) == 0:
            degenerate.append(j)
            ratios.append(float(n))
        else:
            ratios.append(max(pos, neg) / min(pos, neg))
    return DatasetStats(
        cardinality=cardinality,
        avg_ir=float(sum(ratios) / m),
        label_density=cardinality / m,
        per_label_positive_counts=tuple(int(p) for p in positives),
        degenerate_labels=tuple(degenerate),
    )


def kfold(ds: MultiLabelDataset, k: int, seed: int) -> FoldPlan:
    """Shuffled round-robin fold assignment; a pure function of (N, k, seed)."""
    n = ds.n_instances
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


# ---------------------------------------------------------------------------
# ARFF loading (dense and sparse rows, Mulan-style XML label lists)

_NUMERIC_TYPES = {"numeric", "real", "integer"}


def _parse_attribute(rest: str, path: str, line_no: int):
    rest = rest.strip()
    if rest.startswith(("'", '"')):
        quote = rest[0]
        close = rest.find(quote, 1)
        if close < 0:
            raise DataFormatError(f"{path} line {line_no}: unterminated attribute name")
        name = rest[1:close]
        type_str = rest[close + 1 :].strip()
    else:
        parts = rest.split(None, 1)
        if len(parts) != 2:
            raise DataFormatError(f"{path} line {line_no}: malformed @attribute")
        name, type_str = parts[0], parts[1].strip()
    if type_str.lower() in _NUMERIC_TYPES:
        return name, "numeric", None
    if type_str.startswith("{") and type_str.endswith("}"):
        values = tuple(v.strip().strip("'\"") for v in type_str[1:-1].split(","))
        if any(not v for v in values):
            raise DataFormatError(f"{path} line {line_no}: empty nominal value")
        return name, "nominal", values
    raise DataFormatError(
        f"{path} line {line_no}: unknown attribute type {type_str!r}"
    )


def _read_label_xml(xml_path) -> list[str]:
    try:
        tree = ET.parse(xml_path)
    except ET.ParseError as exc:
        raise DataFormatError(f"{xml_path}: bad label XML ({exc})") from exc
    names = [
        el.attrib["name"]
        for el in tree.getroot().iter()
        if el.tag.endswith("label") and "name" in el.attrib
    ]
    if not names:
        raise DataFormatError(f"{xml_path}: no <label name=...> entries found")
    return names


def load_arff(data_path, label_spec) -> MultiLabelDataset:
    """Load an ARFF file, keeping the last `label_spec` attributes as labels
    when an integer is given, or the attributes named in a Mulan-style XML
    file when a path is given.

    Sparse rows `{index value, ...}` are densified with absent entries set
    to 0. Binary nominal features map to {0, 1} by declaration order;
    numeric features pass through unchanged.
    """
    path = str(data_path)
    attrs: list[tuple[str, str, tuple[str, ...] | None, int]] = []
    data_rows: list[tuple[int, str]] = []
    in_data = False
    with open(data_path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if not in_data:
                if low.startswith("@relation"):
                    continue
                if low.startswith("@attribute"):
                    name, kind, values = _parse_attribute(line[len("@attribute") :], path, line_no)
                    attrs.append((name, kind, values, line_no))
                    continue
                if low.startswith("@data"):
                    in_data = True
                    continue
                raise DataFormatError(f"{path} line {line_no}: unexpected declaration {line!r}")
            data_rows.append((line_no, line))
    if not attrs:
        raise DataFormatError(f"{path}: no @attribute declarations found")
    if not in_data:
        raise DataFormatError(f"{path}: missing @data section")

    names = [a[0] for a in attrs]
    if isinstance(label_spec, bool) or not isinstance(label_spec, (int, str, Path)):
        raise DataFormatError("label_spec must be an integer count or an XML path")
    if isinstance(label_spec, int):
        if not 1 <= label_spec < len(attrs):
            raise DataFormatError(
                f"{path}: label count {label_spec} out of range for {len(attrs)} attributes"
            )
        label_idx = list(range(len(attrs) - label_spec, len(attrs)))
    else:
        wanted = _read_label_xml(label_spec)
        missing = [w for w in wanted if w not in names]
        if missing:
            raise DataFormatError(
                f"{path}: label {missing[0]!r} from {label_spec} is absent from the header"
            )
        wanted_set = set(wanted)
        label_idx = [i for i, name in enumerate(names) if name in wanted_set]
    label_set = set(label_idx)

    for i in label_idx:
        name, kind, values, ln = attrs[i]
        if kind == "nominal" and set(values) != {"0", "1"}:
            raise DataFormatError(
                f"{path} line {ln}: label attribute {name!r} has non-binary domain {values!r}"
            )
    nominal_maps: dict[int, dict[str, float]] = {}
    for i, (name, kind, values, ln) in enumerate(attrs):
        if i in label_set or kind != "nominal":
            continue
        if len(values) != 2:
            raise DataFormatError(
                f"{path} line {ln}: nominal feature {name!r} must be binary, got {values!r}"
            )
        nominal_maps[i] = {values[0]: 0.0, values[1]: 1.0}

    def parse_value(idx: int, token: str, line_no: int) -> float:
        token = token.strip().strip("'\"")
        if token == "?":
            raise DataFormatError(
                f"{path} line {line_no}: missing values are not supported"
            )
        kind = attrs[idx][1]
        if idx in label_set:
            if token not in ("0", "1"):
                raise DataFormatError(
                    f"{path} line {line_no}: label value {token!r} is not 0/1"
                )
            return float(token)
        if kind == "nominal":
            mapping = nominal_maps[idx]
            if token not in mapping:
                raise DataFormatError(
                    f"{path} line {line_no}: value {token!r} not in nominal domain"
                )
            return mapping[token]
        try:
            return float(token)
        except ValueError as exc:
            raise DataFormatError(
                f"{path} line {line_no}: cannot parse numeric value {token!r}"
            ) from exc

    n_attrs = len(attrs)
    rows = []
    for line_no, line in data_rows:
        values = [0.0] * n_attrs
        if line.startswith("{"):
            if not line.endswith("}"):
                raise DataFormatError(f"{path} line {line_no}: unterminated sparse row")
            body = line[1:-1].strip()
            entries = [] if not body else body.split(",")
            for entry in entries:
                parts = entry.strip().split(None, 1)
                if len(parts) != 2:
                    raise DataFormatError(
                        f"{path} line {line_no}: malformed sparse entry {entry!r}"
                    )
                try:
                    idx = int(parts[0])
                except ValueError as exc:
                    raise DataFormatError(
                        f"{path} line {line_no}: bad sparse index {parts[0]!r}"
                    ) from exc
                if not 0 <= idx < n_attrs:
                    raise DataFormatError(
                        f"{path} line {line_no}: sparse index {idx} out of range"
                    )
                values[idx] = parse_value(idx, parts[1], line_no)
        else:
            tokens = line.split(",")
            if len(tokens) != n_attrs:
                raise DataFormatError(
                    f"{path} line {line_no}: expected {n_attrs} values, got {len(tokens)}"
                )
            for idx, token in enumerate(tokens):
                values[idx] = parse_value(idx, token, line_no)
        rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    table = np.array(rows, dtype=float)
    feature_idx = [i for i in range(n_attrs) if i not in label_set]
    return MultiLabelDataset(
        features=table[:, feature_idx],
        labels=table[:, label_idx].astype(np.int64),
        label_names=tuple(names[i] for i in label_idx),
        feature_names=tuple(names[i] for i in feature_idx),
    )


# ---------------------------------------------------------------------------
# CSV round trip

def load_csv(path, label_count: int) -> MultiLabelDataset:
    """Load a header-bearing CSV whose trailing `label_count` columns are 0/1.

    Leading lines starting with '#' are treated as comments and skipped.
    """
    src = str(path)
    if not isinstance(label_count, int) or isinstance(label_count, bool):
        raise DataFormatError("label_count must be an integer")
    lines: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            lines.append((line_no, line))
    if not lines:
        raise DataFormatError(f"{src}: empty file")
    header_no, header_line = lines[0]
    header = [h.strip() for h in header_line.split(",")]
    n_cols = len(header)
    if label_count >= n_cols:
        raise DataFormatError(
            f"{src}: label_count {label_count} must be smaller than {n_cols} columns"
        )
    if label_count < 1:
        raise DataFormatError(f"{src}: label_count must be positive")
    d = n_cols - label_count
    feats, labels = [], []
    for line_no, line in lines[1:]:
        parts = line.split(",")
        if len(parts) != n_cols:
            raise DataFormatError(
                f"{src} line {line_no}: expected {n_cols} columns, got {len(parts)}"
            )
        try:
            row = [float(p) for p in parts]
        except ValueError as exc:
            raise DataFormatError(f"{src} line {line_no}: non-numeric cell") from exc
        for v in row[d:]:
            if v not in (0.0, 1.0):
                raise DataFormatError(
                    f"{src} line {line_no}: non-binary value {v!r} in a label column"
                )
        feats.append(row[:d])
        labels.append([int(v) for v in row[d:]])
    if not feats:
        raise DataFormatError(f"{src}: no data rows")
    return MultiLabelDataset(
        features=np.array(feats, dtype=float),
        labels=np.array(labels, dtype=np.int64),
        label_names=tuple(header[d:]),
        feature_names=tuple(header[:d]),
    )


def dataset_csv(ds: MultiLabelDataset, comment: str | None = None) -> str:
    """CSV text for the dataset; feature cells use full-precision repr."""
    out = []
    if comment:
        out.append(f"# {comment}")
    out.append(",".join(ds.feature_names + ds.label_names))
    for x, y in zip(ds.features, ds.labels):
        out.append(",".join([repr(float(v)) for v in x] + [str(int(v)) for v in y]))
    return "\n".join(out) + "\n"


def write_csv(ds: MultiLabelDataset, path, comment: str | None = None) -> None:
    Path(path).write_text(dataset_csv(ds, comment), encoding="utf-8")


# ---------------------------------------------------------------------------
# Synthetic data with a known generating DAG

def synth(
    m: int,
    n: int,
    d: int,
    edges,
    base_prob: float = 0.5,
    feature_noise: float = 1.0,
    seed: int = 0,
) -> tuple[MultiLabelDataset, WeightedDigraph]:
    """Sample labels ancestrally along a DAG, then features informed by them.

    Root labels are Bernoulli(base_prob). A child takes the OR of its parent
    values and negates it with the edge flip probability (the mean, if its
    in-edges disagree). Features are label-prototype mixtures plus Gaussian
    noise of scale feature_noise, so every label leaves a linear footprint.

    Returns the dataset together with the generating graph, whose edge
    weights are 1 - flip_prob.
    """
    if m < 2 or n < 1 or d < 1:
        raise ValueError("need m >= 2, n >= 1, d >= 1")
    if not 0.0 < base_prob < 1.0:
        raise ValueError("base_prob must lie strictly between 0 and 1")
    if feature_noise < 0:
        raise ValueError("feature_noise must be non-negative")
    edge_list = [(int(p), int(c), float(f)) for p, c, f in edges]
    for p, c, f in edge_list:
        if not (0 <= p < m and 0 <= c < m):
            raise ValueError(f"edge {p}->{c} out of range")
        if p == c:
            raise ValueError("self-loop in edge specification")
        if not 0.0 <= f < 1.0:
            raise ValueError(f"flip probability {f} outside [0, 1)")
    truth = WeightedDigraph(
        m,
        tuple(Edge(p, c, 1.0 - f) for p, c, f in edge_list),
        tuple(f"l{i}" for i in range(m)),
    )
    try:
        topo = topological_sort(truth)
    except GraphCycleError as exc:
        raise DataFormatError("edge specification contains a cycle") from exc

    parents: dict[int, list[tuple[int, float]]] = {v: [] for v in range(m)}
    for p, c, f in edge_list:
        parents[c].append((p, f))

    rng = np.random.default_rng(seed)
    Y = np.zeros((n, m), dtype=np.int64)
    for v in topo:
        if not parents[v]:
            Y[:, v] = rng.random(n) < base_prob
        else:
            combined = np.zeros(n, dtype=bool)
            for p, _ in parents[v]:
                combined |= Y[:, p].astype(bool)
            flip_prob = float(np.mean([f for _, f in parents[v]]))
            flips = rng.random(n) < flip_prob
            Y[:, v] = combined ^ flips
    prototypes = rng.standard_normal((m, d))
    X = Y.astype(float) @ prototypes
    if feature_noise > 0:
        X = X + feature_noise * rng.standard_normal((n, d))
    ds = MultiLabelDataset(
        features=X,
        labels=Y,
        label_names=tuple(f"l{i}" for i in range(m)),
        feature_names=tuple(f"f{i}" for i in range(d)),
    )
    return ds, truth
