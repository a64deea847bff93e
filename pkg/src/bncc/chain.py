"""Classifier chains and baselines.

A chain trains one binary classifier per label following an order: stage j
sees the raw features extended with the ground-truth values of the j-1
earlier labels (teacher forcing). At prediction time the same stages run in
order but consume the hard predictions of their predecessors; the train/test
mismatch is inherent to the approach and preserved here.

Also provides binary relevance (independent per-label models), ensembles of
randomly ordered chains with per-label vote averaging, and the variant whose
order comes from the learned label network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset
from .graph import validate_order
from .learner import (
    LearnerConfig,
    TrainedBinary,
    fit,
    model_from_dict,
    model_to_dict,
    predict_many,
)
from .structure import OrderResult, SearchConfig, build_order


@dataclass(frozen=True, eq=False)
class ChainModel:
    """An ordered cascade of binary classifiers with widening inputs."""

    order: tuple[int, ...]
    stages: tuple[TrainedBinary, ...]
    base_arity: int
    label_names: tuple[str, ...]

    def __post_init__(self) -> None:
        m = len(self.label_names)
        order = validate_order(self.order, m)
        if len(self.stages) != m:
            raise ValueError("need one stage per label")
        for j, stage in enumerate(self.stages):
            expected = self.base_arity + j
            if stage.arity != expected:
                raise ValueError(
                    f"stage {j} has arity {stage.arity}, expected {expected}"
                )
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @property
    def n_labels(self) -> int:
        return len(self.label_names)


@dataclass(frozen=True, eq=False)
class BRModel:
    """One independent classifier per label on the raw features only."""

    models: tuple[TrainedBinary, ...]
    base_arity: int
    label_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.models) != len(self.label_names):
            raise ValueError("need one model per label")
        for model in self.models:
            if model.arity != self.base_arity:
                raise ValueError("every model must consume the raw features")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "label_names", tuple(self.label_names))


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """Several chains over different orders, combined by per-label voting."""

    chains: tuple[ChainModel, ...]
    vote_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not self.chains:
            raise ValueError("need at least one chain")
        first = self.chains[0]
        for c in self.chains:
            if c.base_arity != first.base_arity or c.label_names != first.label_names:
                raise ValueError("all chains must share features and labels")
        object.__setattr__(self, "chains", tuple(self.chains))

    @property
    def label_names(self) -> tuple[str, ...]:
        return self.chains[0].label_names

    @property
    def base_arity(self) -> int:
        return self.chains[0].base_arity


def extend_features(x, predecessors) -> np.ndarray:
    """Concatenate a feature vector with its predecessor label values."""
    x = np.asarray(x, dtype=float).ravel()
    pre = np.asarray(predecessors, dtype=float).ravel()
    return np.concatenate([x, pre])


def stage_training_sets(ds: MultiLabelDataset, order):
    """Per-stage training matrices and targets under teacher forcing.

    Stage j's inputs are the raw features plus the ground-truth columns of
    the j-1 labels ordered before it; its target is the label at position j.
    """
    order = validate_order(order, ds.n_labels)
    X = ds.features
    Y = ds.labels
    for j, label in enumerate(order):
        X_j = np.hstack([X, Y[:, list(order[:j])].astype(float)])
        yield X_j, Y[:, label]


def train_chain(ds: MultiLabelDataset, order, cfg: LearnerConfig) -> ChainModel:
    """Fit the cascade in order; appended label columns skip standardization."""
    stages = tuple(
        fit(X_j, y_j, cfg, raw_arity=ds.n_features)
        for X_j, y_j in stage_training_sets(ds, order)
    )
    return ChainModel(
        order=validate_order(order, ds.n_labels),
        stages=stages,
        base_arity=ds.n_features,
        label_names=ds.label_names,
    )


def predict_chain_batch(model: ChainModel, X) -> np.ndarray:
    """Cascade predictions for many rows, re-permuted to original label order."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.base_arity:
        raise ValueError(f"expected {model.base_arity} features per row")
    n = X.shape[0]
    m = model.n_labels
    staged = np.zeros((n, m), dtype=np.int64)
    extended = X
    for j, stage in enumerate(model.stages):
        staged[:, j] = predict_many(stage, extended)
        extended = np.hstack([extended, staged[:, j : j + 1].astype(float)])
    out = np.zeros((n, m), dtype=np.int64)
    out[:, list(model.order)] = staged
    return out


def predict_chain(model: ChainModel, x) -> np.ndarray:
    """Predicted label vector (original label indexing) for one instance."""
    x = np.asarray(x, dtype=float).ravel()
    return predict_chain_batch(model, x.reshape(1, -1))[0]


def train_br(ds: MultiLabelDataset, cfg: LearnerConfig) -> BRModel:
    models = tuple(
        fit(ds.features, ds.labels[:, j], cfg) for j in range(ds.n_labels)
    )
    return BRModel(models=models, base_arity=ds.n_features, label_names=ds.label_names)


def predict_br_batch(model: BRModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.base_arity:
        raise ValueError(f"expected {model.base_arity} features per row")
    return np.column_stack([predict_many(m, X) for m in model.models])


def predict_br(model: BRModel, x) -> np.ndarray:
    return predict_br_batch(model, np.asarray(x, dtype=float).reshape(1, -1))[0]


def default_ecc_size(n_instances: int) -> int:
    """Ensemble size heuristic: 10 chains for small data, 5 for large."""
    return 10 if n_instances <= 5000 else 5


def train_ecc(
    ds: MultiLabelDataset,
    k: int | None = None,
    seed: int = 0,
    cfg: LearnerConfig | None = None,
    vote_threshold: float = 0.5,
) -> EnsembleModel:
    """Train k chains on independently drawn random label orders."""
    cfg = cfg or LearnerConfig()
    k = default_ecc_size(ds.n_instances) if k is None else int(k)
    if k < 1:
        raise ValueError("ensemble size must be at least 1")
    rng = np.random.default_rng(seed)
    chains = tuple(
        train_chain(ds, tuple(int(v) for v in rng.permutation(ds.n_labels)), cfg)
        for _ in range(k)
    )
    return EnsembleModel(chains=chains, vote_threshold=float(vote_threshold))


def predict_ecc_batch(model: EnsembleModel, X) -> np.ndarray:
    """Mean per-label vote across chains; ties go to the positive class."""
    votes = np.mean(
        [predict_chain_batch(c, X) for c in model.chains], axis=0
    )
    return (votes >= model.vote_threshold).astype(np.int64)


def predict_ecc(model: EnsembleModel, x) -> np.ndarray:
    return predict_ecc_batch(model, np.asarray(x, dtype=float).reshape(1, -1))[0]


def train_bncc(
    ds: MultiLabelDataset,
    search_cfg: SearchConfig | None = None,
    cfg: LearnerConfig | None = None,
) -> tuple[ChainModel, OrderResult]:
    """Discover the label order from the learned network, then train a chain."""
    cfg = cfg or LearnerConfig()
    result = build_order(ds, search_cfg)
    model = train_chain(ds, result.tau, cfg)
    return model, result


# ---------------------------------------------------------------------------
# JSON bundles

def chain_to_dict(model: ChainModel) -> dict:
    return {
        "kind": "chain",
        "base_arity": model.base_arity,
        "label_names": list(model.label_names),
        "order": list(model.order),
        "stages": [model_to_dict(s) for s in model.stages],
    }


def br_to_dict(model: BRModel) -> dict:
    return {
        "kind": "br",
        "base_arity": model.base_arity,
        "label_names": list(model.label_names),
        "models": [model_to_dict(m) for m in model.models],
    }


def ecc_to_dict(model: EnsembleModel) -> dict:
    return {
        "kind": "ecc",
        "vote_threshold": model.vote_threshold,
        "chains": [chain_to_dict(c) for c in model.chains],
    }


def model_bundle(model) -> dict:
    if isinstance(model, ChainModel):
        return chain_to_dict(model)
    if isinstance(model, BRModel):
        return br_to_dict(model)
    if isinstance(model, EnsembleModel):
        return ecc_to_dict(model)
    raise TypeError(f"unsupported model type {type(model)!r}")


def model_from_bundle(d: dict):
    kind = d.get("kind")
    if kind == "chain":
        return ChainModel(
            order=tuple(d["order"]),
            stages=tuple(model_from_dict(s) for s in d["stages"]),
            base_arity=int(d["base_arity"]),
            label_names=tuple(d["label_names"]),
        )
    if kind == "br":
        return BRModel(
            models=tuple(model_from_dict(m) for m in d["models"]),
            base_arity=int(d["base_arity"]),
            label_names=tuple(d["label_names"]),
        )
    if kind == "ecc":
        return EnsembleModel(
            chains=tuple(model_from_bundle(c) for c in d["chains"]),
            vote_threshold=float(d["vote_threshold"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")
