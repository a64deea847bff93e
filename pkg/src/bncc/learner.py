"""Binary base classifiers for chain stages.

Two trainable kinds (L2-regularized logistic regression and a hinge-loss
linear margin classifier, both full-batch gradient descent with a fixed
epoch count) plus a majority-class constant model. Training is fully
deterministic for fixed inputs: weights start at zero and the data is
visited in order.

Feature standardization uses training-set statistics only. Callers that
append already-bounded 0/1 columns (chain predecessors) pass raw_arity so
those columns keep identity scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

KINDS = ("logistic", "linear_margin", "constant")

_SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "logistic"
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-3
    standardize: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


@dataclass(frozen=True, eq=False)
class TrainedBinary:
    """A fitted binary classifier; `weights` holds the bias as its last entry."""

    kind: str
    arity: int
    weights: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    constant_class: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        if w.shape != (self.arity + 1,):
            raise ValueError("weights must have arity + 1 entries (bias last)")
        if mean.shape != (self.arity,) or scale.shape != (self.arity,):
            raise ValueError("standardization params must match the arity")
        for name, arr in (("weights", w), ("mean", mean), ("scale", scale)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _check_features(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("features must form an N x p matrix with p >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain NaN or infinite values")
    return X


def logistic_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean log loss plus the L2 charge on the non-bias weights."""
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))


def logistic_grad(w, b, X, y, l2) -> tuple[np.ndarray, float]:
    resid = expit(X @ w + b) - y
    return X.T @ resid / len(y) + l2 * w, float(resid.mean())


def _hinge_grad(w, b, X, s, l2) -> tuple[np.ndarray, float]:
    active = (s * (X @ w + b)) < 1.0
    pull = s * active
    return -(X.T @ pull) / len(s) + l2 * w, float(-pull.mean())


def fit(features, targets, cfg: LearnerConfig, raw_arity: int | None = None) -> TrainedBinary:
    """Train one binary classifier.

    Single-class targets short-circuit to a constant model. Only the first
    raw_arity columns are standardized (all of them when None).
    """
    X = _check_features(features)
    y = np.asarray(targets)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("targets must be one value per feature row")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("targets must be 0/1")
    y = y.astype(float)
    n, p = X.shape
    identity_mean = np.zeros(p)
    identity_scale = np.ones(p)

    classes = np.unique(y)
    if classes.size == 1:
        return TrainedBinary(
            kind=cfg.kind,
            arity=p,
            weights=np.zeros(p + 1),
            mean=identity_mean,
            scale=identity_scale,
            constant_class=int(classes[0]),
        )
    if cfg.kind == "constant":
        majority = 1 if 2 * int(y.sum()) >= n else 0
        return TrainedBinary(
            kind=cfg.kind,
            arity=p,
            weights=np.zeros(p + 1),
            mean=identity_mean,
            scale=identity_scale,
            constant_class=majority,
        )

    raw = p if raw_arity is None else int(raw_arity)
    if not 0 <= raw <= p:
        raise ValueError("raw_arity out of range")
    mean = identity_mean.copy()
    scale = identity_scale.copy()
    if cfg.standardize and raw > 0:
        mean[:raw] = X[:, :raw].mean(axis=0)
        scale[:raw] = np.maximum(X[:, :raw].std(axis=0), _SCALE_FLOOR)
    Z = (X - mean) / scale

    w = np.zeros(p)
    b = 0.0
    if cfg.kind == "logistic":
        for _ in range(cfg.epochs):
            gw, gb = logistic_grad(w, b, Z, y, cfg.l2)
            w = w - cfg.learning_rate * gw
            b = b - cfg.learning_rate * gb
    else:
        s = 2.0 * y - 1.0
        for _ in range(cfg.epochs):
            gw, gb = _hinge_grad(w, b, Z, s, cfg.l2)
            w = w - cfg.learning_rate * gw
            b = b - cfg.learning_rate * gb
    return TrainedBinary(
        kind=cfg.kind,
        arity=p,
        weights=np.concatenate([w, [b]]),
        mean=mean,
        scale=scale,
    )


def predict_scores(model: TrainedBinary, X) -> np.ndarray:
    """Scores for a batch of rows: probabilities for logistic-style models,
    raw margins for the margin kind."""
    X = _check_features(X)
    if X.shape[1] != model.arity:
        raise ValueError(f"expected {model.arity} features, got {X.shape[1]}")
    if model.constant_class is not None:
        if model.kind == "linear_margin":
            fill = 1.0 if model.constant_class == 1 else -1.0
        else:
            fill = float(model.constant_class)
        return np.full(X.shape[0], fill)
    Z = (X - model.mean) / model.scale
    z = Z @ model.weights[:-1] + model.weights[-1]
    if model.kind == "linear_margin":
        return z
    return expit(z)


def predict_score(model: TrainedBinary, x) -> float:
    """Score for a single feature vector."""
    return float(predict_scores(model, np.asarray(x, dtype=float).reshape(1, -1))[0])


def predict_many(model: TrainedBinary, X) -> np.ndarray:
    """Hard 0/1 decisions for a batch; score ties go to the positive class."""
    scores = predict_scores(model, X)
    threshold = 0.0 if model.kind == "linear_margin" else 0.5
    return (scores >= threshold).astype(np.int64)


def predict(model: TrainedBinary, x) -> int:
    return int(predict_many(model, np.asarray(x, dtype=float).reshape(1, -1))[0])


def model_to_dict(model: TrainedBinary) -> dict:
    return {
        "kind": model.kind,
        "arity": model.arity,
        "constant_class": model.constant_class,
        "weights": [float(v) for v in model.weights],
        "mean": [float(v) for v in model.mean],
        "scale": [float(v) for v in model.scale],
    }


def model_from_dict(d: dict) -> TrainedBinary:
    return TrainedBinary(
        kind=d["kind"],
        arity=int(d["arity"]),
        weights=np.array(d["weights"], dtype=float),
        mean=np.array(d["mean"], dtype=float),
        scale=np.array(d["scale"], dtype=float),
        constant_class=None if d["constant_class"] is None else int(d["constant_class"]),
    )
