"""Evaluation metrics and the cross-validation harness.

Four measures: hamming loss (fraction of wrong instance-label pairs),
instance F-score (per-row harmonic mean of precision and recall, averaged),
macro F (per-label F averaged over labels), and micro F (F over pooled
per-label counts).

Empty-set conventions are fixed because small folds of sparse data hit
them: an instance with no true and no predicted positives scores 1; a label
with no positives anywhere (true or predicted) contributes 1 to macro F;
an all-zero pooled table gives micro F 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    predict_br_batch,
    predict_chain_batch,
    predict_ecc_batch,
    train_br,
    train_bncc,
    train_chain,
    train_ecc,
)
from .dataset import MultiLabelDataset, kfold, subset
from .learner import LearnerConfig
from .structure import SearchConfig

METRIC_NAMES = ("hamming_loss", "fscore", "mac_f", "mic_f")
METHODS = ("br", "cc_random", "ecc", "bncc")

# Lower is better only for hamming loss.
LOWER_IS_BETTER = {"hamming_loss": True, "fscore": False, "mac_f": False, "mic_f": False}


@dataclass(frozen=True)
class EvaluationReport:
    hamming_loss: float
    fscore: float
    mac_f: float
    mic_f: float
    per_label: tuple[tuple[int, int, int], ...]  # (TP, FP, FN) per label
    n_instances: int

    def metric(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def _check_pair(Y, Yhat) -> tuple[np.ndarray, np.ndarray]:
    Y = np.asarray(Y)
    Yhat = np.asarray(Yhat)
    if Y.shape != Yhat.shape or Y.ndim != 2:
        raise ValueError(f"shape mismatch: {Y.shape} vs {Yhat.shape}")
    for name, arr in (("truth", Y), ("prediction", Yhat)):
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} matrix must be binary")
    return Y.astype(np.int64), Yhat.astype(np.int64)


def hamming_loss(Y, Yhat) -> float:
    Y, Yhat = _check_pair(Y, Yhat)
    return float(np.mean(Y != Yhat))


def instance_fscore(Y, Yhat) -> float:
    Y, Yhat = _check_pair(Y, Yhat)
    inter = (Y & Yhat).sum(axis=1)
    denom = Y.sum(axis=1) + Yhat.sum(axis=1)
    scores = np.ones(Y.shape[0], dtype=float)
    nz = denom > 0
    scores[nz] = 2.0 * inter[nz] / denom[nz]
    return float(scores.mean())


def per_label_counts(Y, Yhat) -> tuple[tuple[int, int, int], ...]:
    Y, Yhat = _check_pair(Y, Yhat)
    tp = (Y & Yhat).sum(axis=0)
    fp = ((1 - Y) & Yhat).sum(axis=0)
    fn = (Y & (1 - Yhat)).sum(axis=0)
    return tuple((int(a), int(b), int(c)) for a, b, c in zip(tp, fp, fn))


def _f_from_counts(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2.0 * tp / denom


def macro_f(Y, Yhat) -> float:
    counts = per_label_counts(Y, Yhat)
    return float(np.mean([_f_from_counts(*c) for c in counts]))


def micro_f(Y, Yhat) -> float:
    counts = per_label_counts(Y, Yhat)
    tp = sum(c[0] for c in counts)
    fp = sum(c[1] for c in counts)
    fn = sum(c[2] for c in counts)
    return _f_from_counts(tp, fp, fn)


def evaluate(Y, Yhat) -> EvaluationReport:
    Y, Yhat = _check_pair(Y, Yhat)
    counts = per_label_counts(Y, Yhat)
    tp = sum(c[0] for c in counts)
    fp = sum(c[1] for c in counts)
    fn = sum(c[2] for c in counts)
    return EvaluationReport(
        hamming_loss=hamming_loss(Y, Yhat),
        fscore=instance_fscore(Y, Yhat),
        mac_f=float(np.mean([_f_from_counts(*c) for c in counts])),
        mic_f=_f_from_counts(tp, fp, fn),
        per_label=counts,
        n_instances=Y.shape[0],
    )


def report_dict(report: EvaluationReport) -> dict:
    return {
        "hamming_loss": report.hamming_loss,
        "fscore": report.fscore,
        "mac_f": report.mac_f,
        "mic_f": report.mic_f,
        "per_label": [list(c) for c in report.per_label],
        "n_instances": report.n_instances,
    }


# ---------------------------------------------------------------------------
# Cross-validation

@dataclass(frozen=True)
class FoldRecord:
    repeat: int
    fold: int
    report: EvaluationReport


@dataclass(frozen=True)
class CvSummary:
    """Mean and standard deviation of each metric across fold evaluations."""

    method: str
    fold_count: int
    repeat_count: int
    base_seed: int
    records: tuple[FoldRecord, ...]
    means: dict
    stds: dict


def fold_seed(base_seed: int, repeat: int, fold: int) -> int:
    """Deterministic per-(repeat, fold) seed for order draws and ensembles."""
    return (base_seed * 1_000_003 + repeat * 10_007 + fold * 101 + 1) % (2**63)


def train_and_predict(
    method: str,
    train_ds: MultiLabelDataset,
    test_features,
    seed: int,
    learner_cfg: LearnerConfig,
    search_cfg: SearchConfig | None = None,
    ecc_k: int | None = None,
    vote_threshold: float = 0.5,
) -> np.ndarray:
    """Fit one method on the training split and predict the test features."""
    if method == "br":
        return predict_br_batch(train_br(train_ds, learner_cfg), test_features)
    if method == "cc_random":
        rng = np.random.default_rng(seed)
        order = tuple(int(v) for v in rng.permutation(train_ds.n_labels))
        return predict_chain_batch(
            train_chain(train_ds, order, learner_cfg), test_features
        )
    if method == "ecc":
        model = train_ecc(
            train_ds, k=ecc_k, seed=seed, cfg=learner_cfg, vote_threshold=vote_threshold
        )
        return predict_ecc_batch(model, test_features)
    if method == "bncc":
        model, _ = train_bncc(train_ds, search_cfg, learner_cfg)
        return predict_chain_batch(model, test_features)
    raise ValueError(f"unknown method {method!r}")


def cross_validate(
    ds: MultiLabelDataset,
    method: str,
    k: int = 10,
    repeats: int = 1,
    seed: int = 0,
    learner_cfg: LearnerConfig | None = None,
    search_cfg: SearchConfig | None = None,
    ecc_k: int | None = None,
    vote_threshold: float = 0.5,
) -> CvSummary:
    """Repeated k-fold cross-validation of one method.

    Repeat r gets a fresh fold plan seeded with seed + r; every fold is
    trained on the other k-1 folds and scored on the held-out one. Records
    are aggregated in (repeat, fold) order so summaries are bit-stable.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    learner_cfg = learner_cfg or LearnerConfig()
    records = []
    for r in range(repeats):
        plan = kfold(ds, k, seed + r)
        for f in range(k):
            mask = plan.assignments == f
            train_ds = subset(ds, ~mask)
            test_ds = subset(ds, mask)
            Yhat = train_and_predict(
                method,
                train_ds,
                test_ds.features,
                fold_seed(seed, r, f),
                learner_cfg,
                search_cfg,
                ecc_k,
                vote_threshold,
            )
            records.append(FoldRecord(repeat=r, fold=f, report=evaluate(test_ds.labels, Yhat)))
    means = {}
    stds = {}
    for name in METRIC_NAMES:
        values = np.array([rec.report.metric(name) for rec in records])
        means[name] = float(values.mean())
        stds[name] = float(values.std())
    return CvSummary(
        method=method,
        fold_count=k,
        repeat_count=repeats,
        base_seed=seed,
        records=tuple(records),
        means=means,
        stds=stds,
    )


def compare_methods(
    ds: MultiLabelDataset,
    k: int = 10,
    repeats: int = 1,
    seed: int = 0,
    learner_cfg: LearnerConfig | None = None,
    search_cfg: SearchConfig | None = None,
    ecc_k: int | None = None,
    vote_threshold: float = 0.5,
    methods: tuple[str, ...] = METHODS,
) -> dict[str, CvSummary]:
    """Run several methods under the same seeds so folds stay paired."""
    return {
        method: cross_validate(
            ds, method, k, repeats, seed, learner_cfg, search_cfg, ecc_k, vote_threshold
        )
        for method in methods
    }


def best_methods(results: dict[str, CvSummary]) -> dict[str, str]:
    """Best method per metric (min for hamming loss, max otherwise)."""
    best = {}
    for name in METRIC_NAMES:
        pick = min if LOWER_IS_BETTER[name] else max
        best[name] = pick(results, key=lambda m: results[m].means[name])
    return best


def cv_summary_dict(summary: CvSummary) -> dict:
    return {
        "method": summary.method,
        "fold_count": summary.fold_count,
        "repeat_count": summary.repeat_count,
        "seed": summary.base_seed,
        "summary": {
            name: {"mean": summary.means[name], "std": summary.stds[name]}
            for name in METRIC_NAMES
        },
        "folds": [
            {
                "repeat": rec.repeat,
                "fold": rec.fold,
                **{name: rec.report.metric(name) for name in METRIC_NAMES},
            }
            for rec in summary.records
        ],
    }


def _cell(mean: float, std: float) -> str:
    return f"{mean:.4f} ± {std:.4f}"


def cv_table(summary: CvSummary) -> str:
    """Aligned text table of one method's mean and std per metric."""
    lines = [f"method: {summary.method}  ({summary.repeat_count}x{summary.fold_count}-fold)"]
    for name in METRIC_NAMES:
        lines.append(f"  {name:<14} {_cell(summary.means[name], summary.stds[name])}")
    return "\n".join(lines) + "\n"


def compare_table(results: dict[str, CvSummary]) -> str:
    """Methods-by-metrics grid with a trailing column marking per-metric bests."""
    best = best_methods(results)
    header = ["method".ljust(12)] + [name.ljust(18) for name in METRIC_NAMES] + ["best_on"]
    lines = ["".join(header).rstrip()]
    for method, summary in results.items():
        cells = [method.ljust(12)]
        for name in METRIC_NAMES:
            cells.append(_cell(summary.means[name], summary.stds[name]).ljust(18))
        won = [name for name in METRIC_NAMES if best[name] == method]
        cells.append(",".join(won) if won else "-")
        lines.append("".join(cells).rstrip())
    return "\n".join(lines) + "\n"
