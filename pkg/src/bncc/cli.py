"""Command-line interface.

Subcommands: depmat, order, train, predict, eval, xval, synth, compare.
Every run is deterministic given its flags, and every output file embeds
the resolved configuration (JSON field, or a leading comment line for CSV
and DOT outputs). Errors are emitted as JSON on stderr with exit codes:
0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import (
    model_bundle,
    model_from_bundle,
    predict_br_batch,
    predict_chain_batch,
    predict_ecc_batch,
    train_br,
    train_bncc,
    train_chain,
    train_ecc,
    BRModel,
    ChainModel,
    EnsembleModel,
)
from .correlation import dependence_csv, dependence_matrix
from .dataset import (
    DataFormatError,
    MultiLabelDataset,
    dataset_csv,
    load_arff,
    load_csv,
    synth,
)
from .graph import GraphCycleError, export_dot, fully_connected_dcg
from .learner import LearnerConfig
from .metrics import (
    best_methods,
    compare_methods,
    compare_table,
    cross_validate,
    cv_summary_dict,
    cv_table,
    evaluate,
    report_dict,
)
from .structure import SearchConfig, build_order, diagnostics_dict


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); route to exit code 1
        raise UsageError(message)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"kind": kind, "error": message}, sort_keys=True) + "\n")


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _config_comment(config: dict) -> str:
    return "config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# Shared flag groups

def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset file (ARFF or CSV)")
    p.add_argument(
        "--format",
        choices=("auto", "arff", "csv"),
        default="auto",
        help="input format; auto infers from the extension",
    )
    p.add_argument(
        "--labels",
        required=True,
        help="label spec: trailing label count, or an XML label list for ARFF",
    )


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learner", choices=("logistic", "linear_margin", "constant"), default="logistic")
    p.add_argument("--lr", type=float, default=0.1, help="learning rate")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--no-standardize", action="store_true", help="skip feature standardization")
    p.add_argument("--seed", type=int, default=0)


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--child-threshold", type=int, default=3)
    p.add_argument("--parent-cap", type=int, default=None)
    p.add_argument(
        "--baseline-empty-set",
        action="store_true",
        help="score the empty parent set first so useless parents are rejected",
    )


def _add_ecc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ecc-k", type=int, default=None, help="ensemble size (default by data size)")
    p.add_argument("--vote-threshold", type=float, default=0.5)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default=".", help="directory for output files")
    p.add_argument("--threads", type=int, default=1, help="worker cap (recorded; execution is single-threaded)")


def build_parser() -> _Parser:
    parser = _Parser(prog="bncc", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("depmat", help="export the pairwise dependence matrix")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_depmat)

    p = sub.add_parser("order", help="discover the label order from the data")
    _add_dataset_flags(p)
    _add_search_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("train", help="train a model and save it as JSON")
    _add_dataset_flags(p)
    p.add_argument("--method", choices=("br", "cc_random", "ecc", "bncc"), default="bncc")
    _add_learner_flags(p)
    _add_search_flags(p)
    _add_ecc_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels for a dataset with a saved model")
    _add_dataset_flags(p)
    p.add_argument("--model", required=True, help="model JSON file")
    _add_common_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    _add_dataset_flags(p)
    p.add_argument("--model", required=True, help="model JSON file")
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("xval", help="cross-validate one method")
    _add_dataset_flags(p)
    p.add_argument("--method", choices=("br", "cc_random", "ecc", "bncc"), default="bncc")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    _add_learner_flags(p)
    _add_search_flags(p)
    _add_ecc_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_xval)

    p = sub.add_parser("compare", help="cross-validate all methods under shared seeds")
    _add_dataset_flags(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    _add_learner_flags(p)
    _add_search_flags(p)
    _add_ecc_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic dataset with a known DAG")
    p.add_argument("--m", type=int, required=True, help="number of labels")
    p.add_argument("--n", type=int, required=True, help="number of instances")
    p.add_argument("--d", type=int, default=8, help="number of features")
    p.add_argument(
        "--edge",
        action="append",
        default=[],
        metavar="P:C:FLIP",
        help="dependency edge parent:child:flip_prob (repeatable)",
    )
    p.add_argument("--base-prob", type=float, default=0.5)
    p.add_argument("--feature-noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common_flags(p)
    p.set_defaults(func=cmd_synth)

    return parser


# ---------------------------------------------------------------------------
# Flag resolution helpers

def _parse_labels_flag(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


def _load_dataset(args) -> MultiLabelDataset:
    path = Path(args.data)
    fmt = args.format
    if fmt == "auto":
        fmt = "arff" if path.suffix.lower() == ".arff" else "csv"
    labels = _parse_labels_flag(args.labels)
    if fmt == "csv":
        if not isinstance(labels, int):
            raise UsageError("--labels must be an integer count for CSV input")
        return load_csv(path, labels)
    return load_arff(path, labels)


def _learner_config(args) -> LearnerConfig:
    return LearnerConfig(
        kind=args.learner,
        learning_rate=args.lr,
        epochs=args.epochs,
        l2=args.l2,
        standardize=not args.no_standardize,
        seed=args.seed,
    )


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        child_threshold=args.child_threshold,
        parent_cap=args.parent_cap,
        baseline_empty_set=args.baseline_empty_set,
    )


def _resolved_config(args, keys: tuple[str, ...]) -> dict:
    cfg = {"command": args.command, "version": __version__}
    for key in keys:
        cfg[key] = getattr(args, key.replace("-", "_"))
    return cfg


_DATASET_KEYS = ("data", "format", "labels")
_LEARNER_KEYS = ("learner", "lr", "epochs", "l2", "no_standardize", "seed")
_SEARCH_KEYS = ("child_threshold", "parent_cap", "baseline_empty_set")
_ECC_KEYS = ("ecc_k", "vote_threshold")
_COMMON_KEYS = ("out_dir", "threads")


# ---------------------------------------------------------------------------
# Commands

def cmd_depmat(args) -> int:
    ds = _load_dataset(args)
    config = _resolved_config(args, _DATASET_KEYS + _COMMON_KEYS)
    dep = dependence_matrix(ds)
    out = Path(args.out_dir)
    _write(out / "dependence.csv", dependence_csv(dep, _config_comment(config)))
    _write(out / "dcg.dot", export_dot(fully_connected_dcg(dep), _config_comment(config)))
    return 0


def cmd_order(args) -> int:
    ds = _load_dataset(args)
    config = _resolved_config(args, _DATASET_KEYS + _SEARCH_KEYS + _COMMON_KEYS)
    result = build_order(ds, _search_config(args))
    payload = {"config": config, **diagnostics_dict(result)}
    out = Path(args.out_dir)
    _write(out / "order.json", _json_text(payload))
    _write(out / "final_dag.dot", export_dot(result.final_dag, _config_comment(config)))
    return 0


def cmd_train(args) -> int:
    ds = _load_dataset(args)
    config = _resolved_config(
        args,
        _DATASET_KEYS + ("method",) + _LEARNER_KEYS + _SEARCH_KEYS + _ECC_KEYS + _COMMON_KEYS,
    )
    learner_cfg = _learner_config(args)
    diagnostics = None
    if args.method == "br":
        model = train_br(ds, learner_cfg)
    elif args.method == "cc_random":
        order = tuple(int(v) for v in np.random.default_rng(args.seed).permutation(ds.n_labels))
        model = train_chain(ds, order, learner_cfg)
    elif args.method == "ecc":
        model = train_ecc(
            ds, k=args.ecc_k, seed=args.seed, cfg=learner_cfg, vote_threshold=args.vote_threshold
        )
    else:
        model, order_result = train_bncc(ds, _search_config(args), learner_cfg)
        diagnostics = diagnostics_dict(order_result)
    bundle = {"config": config, "model": model_bundle(model)}
    if diagnostics is not None:
        bundle["diagnostics"] = diagnostics
    _write(Path(args.out_dir) / "model.json", _json_text(bundle))
    return 0


def _load_model(path: str):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataFormatError(f"model file not found: {path}")
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: bad model JSON ({exc})")
    if "model" not in raw:
        raise DataFormatError(f"{path}: missing 'model' entry")
    return model_from_bundle(raw["model"])


def _model_predict(model, X) -> np.ndarray:
    if isinstance(model, ChainModel):
        return predict_chain_batch(model, X)
    if isinstance(model, BRModel):
        return predict_br_batch(model, X)
    if isinstance(model, EnsembleModel):
        return predict_ecc_batch(model, X)
    raise DataFormatError(f"unsupported model type {type(model)!r}")


def _check_arity(model, ds: MultiLabelDataset) -> None:
    if model.base_arity != ds.n_features:
        raise DataFormatError(
            f"model expects {model.base_arity} features, dataset has {ds.n_features}"
        )


def cmd_predict(args) -> int:
    ds = _load_dataset(args)
    model = _load_model(args.model)
    _check_arity(model, ds)
    config = _resolved_config(args, _DATASET_KEYS + ("model",) + _COMMON_KEYS)
    Yhat = _model_predict(model, ds.features)
    lines = ["# " + _config_comment(config), ",".join(model.label_names)]
    for row in Yhat:
        lines.append(",".join(str(int(v)) for v in row))
    _write(Path(args.out_dir) / "predictions.csv", "\n".join(lines) + "\n")
    return 0


def cmd_eval(args) -> int:
    ds = _load_dataset(args)
    model = _load_model(args.model)
    _check_arity(model, ds)
    config = _resolved_config(args, _DATASET_KEYS + ("model",) + _COMMON_KEYS)
    report = evaluate(ds.labels, _model_predict(model, ds.features))
    payload = {"config": config, "report": report_dict(report)}
    _write(Path(args.out_dir) / "report.json", _json_text(payload))
    return 0


def cmd_xval(args) -> int:
    ds = _load_dataset(args)
    config = _resolved_config(
        args,
        _DATASET_KEYS
        + ("method", "k", "repeats")
        + _LEARNER_KEYS
        + _SEARCH_KEYS
        + _ECC_KEYS
        + _COMMON_KEYS,
    )
    summary = cross_validate(
        ds,
        args.method,
        k=args.k,
        repeats=args.repeats,
        seed=args.seed,
        learner_cfg=_learner_config(args),
        search_cfg=_search_config(args),
        ecc_k=args.ecc_k,
        vote_threshold=args.vote_threshold,
    )
    payload = {"config": config, **cv_summary_dict(summary)}
    out = Path(args.out_dir)
    _write(out / "xval.json", _json_text(payload))
    _write(out / "xval.txt", "# " + _config_comment(config) + "\n" + cv_table(summary))
    return 0


def cmd_compare(args) -> int:
    ds = _load_dataset(args)
    config = _resolved_config(
        args,
        _DATASET_KEYS + ("k", "repeats") + _LEARNER_KEYS + _SEARCH_KEYS + _ECC_KEYS + _COMMON_KEYS,
    )
    results = compare_methods(
        ds,
        k=args.k,
        repeats=args.repeats,
        seed=args.seed,
        learner_cfg=_learner_config(args),
        search_cfg=_search_config(args),
        ecc_k=args.ecc_k,
        vote_threshold=args.vote_threshold,
    )
    payload = {
        "config": config,
        "methods": {name: cv_summary_dict(s) for name, s in results.items()},
        "best": best_methods(results),
    }
    out = Path(args.out_dir)
    _write(out / "compare.json", _json_text(payload))
    _write(out / "compare.txt", "# " + _config_comment(config) + "\n" + compare_table(results))
    return 0


def _parse_edges(specs: list[str]) -> list[tuple[int, int, float]]:
    edges = []
    for spec in specs:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad --edge {spec!r}, expected P:C:FLIP")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise UsageError(f"bad --edge {spec!r}, expected P:C:FLIP")
    return edges


def cmd_synth(args) -> int:
    config = _resolved_config(
        args, ("m", "n", "d", "edge", "base_prob", "feature_noise", "seed") + _COMMON_KEYS
    )
    ds, truth = synth(
        args.m,
        args.n,
        args.d,
        _parse_edges(args.edge),
        base_prob=args.base_prob,
        feature_noise=args.feature_noise,
        seed=args.seed,
    )
    out = Path(args.out_dir)
    _write(out / "synth.csv", dataset_csv(ds, _config_comment(config)))
    _write(out / "synth_truth.dot", export_dot(truth, _config_comment(config)))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _emit_error("usage", str(exc))
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error("usage", str(exc))
        return 1
    except (DataFormatError, GraphCycleError, FileNotFoundError, OSError) as exc:
        _emit_error("data", str(exc))
        return 2
    except ValueError as exc:
        _emit_error("data", str(exc))
        return 2
    except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        _emit_error("numeric", str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
