"""varisk command line: the full pipeline plus each stage standalone."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._json import dump_json, format_float
from .classifiers import fit_model, load_model, predict_proba, save_model
from .cohort_sim import SimConfig, generate
from .core_data import (
    Dataset,
    load_csv,
    load_schema,
    project,
    save_schema,
    schema_hash,
    write_csv,
)
from .evaluation import CvConfig, compare_feature_sets, run_cv
from .feature_selection import SelectionConfig, screen_features
from .imputation import ImputeConfig, knn_impute_audited
from .resampling import ResamplingConfig, rebalance

log = logging.getLogger(__name__)


@contextmanager
def _stage(name: str):
    """Re-raise stage failures with the stage name in the message."""
    try:
        yield
    except (ValueError, RuntimeError) as e:
        raise type(e)(f"{name}: {e}") from e


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1)[0])


def _write_roc_csvs(report, out: Path) -> None:
    for fold in report.folds:
        with open(out / f"roc_fold{fold.fold + 1}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            for fpr, tpr in fold.roc.points:
                writer.writerow([format_float(fpr), format_float(tpr)])


def _write_impute_audit(audit, out: Path) -> None:
    with open(out / "impute_audit.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "feature", "imputed_value", "donor_rows"])
        for rec in audit:
            writer.writerow([rec.row, rec.feature, format_float(rec.value),
                             ";".join(str(r) for r in rec.donor_rows)])


def _load_inputs(args) -> tuple:
    with _stage("load schema"):
        schema = load_schema(args.schema)
    with _stage("load cohort"):
        d = load_csv(args.cohort, schema)
    return schema, d


def _impute_if_needed(d: Dataset, k: int, out: Path | None):
    if not np.isnan(d.X).any():
        return d
    with _stage("impute"):
        d, audit = knn_impute_audited(d, ImputeConfig(k=k))
        if out is not None:
            _write_impute_audit(audit, out)
    return d


def _selection_config(args) -> SelectionConfig:
    return SelectionConfig(p_threshold=args.p_threshold,
                           gain_threshold=args.gain_threshold)


def _resampling_config(args) -> ResamplingConfig | None:
    if args.no_rebalance:
        return None
    return ResamplingConfig(seed=args.seed, under_ratio=args.under_ratio,
                            smote_multiplier=args.smote_mult,
                            smote_k=args.smote_k,
                            balance_exact=args.balanced)


def _cv_config(args, selection: SelectionConfig | None) -> CvConfig:
    return CvConfig(seed=args.seed, k=args.k_folds, model=args.model,
                    selection=selection, selection_scope=args.select_on,
                    resampling=_resampling_config(args),
                    impute=ImputeConfig(k=args.k_impute))


def _train_final_model(d: Dataset, args, out: Path):
    """Select on the full cohort, rebalance, fit, and persist the model."""
    sel_cfg = _selection_config(args)
    with _stage("select"):
        report = screen_features(d, sel_cfg)
        keep = report.selected_names()
        if not keep:
            raise ValueError("selection kept no features")
    dump_json(report.to_json_dict(), out / "selection.json")
    (out / "selection.txt").write_text(report.render_table() + "\n",
                                       encoding="utf-8")
    d_sel = project(d, keep)

    stream = np.random.SeedSequence(args.seed).spawn(args.k_folds + 2)[-1]
    s_rebal, s_model = (_seed_int(c) for c in stream.spawn(2))
    res_cfg = _resampling_config(args)
    with _stage("train"):
        fit_d = d_sel
        if res_cfg is not None:
            fit_d, _ = rebalance(d_sel, replace(res_cfg, seed=s_rebal))
        model = fit_model(args.model, fit_d, seed=s_model)
    meta = {"source_schema_hash": schema_hash(d.schema),
            "features": keep,
            "seed": args.seed,
            "train_config": {"model": args.model,
                             "rebalance": res_cfg is not None,
                             "under_ratio": args.under_ratio,
                             "smote_mult": args.smote_mult,
                             "smote_k": args.smote_k,
                             "balanced": args.balanced,
                             "p_threshold": args.p_threshold,
                             "gain_threshold": args.gain_threshold}}
    save_model(model, out / "model.json", meta=meta)
    return model


def cmd_run(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, d = _load_inputs(args)
    d = _impute_if_needed(d, args.k_impute, out)
    cv_cfg = _cv_config(args, _selection_config(args))
    with _stage("evaluate"):
        report = run_cv(d, cv_cfg)
    dump_json(report.to_json_dict(), out / "cv_report.json")
    _write_roc_csvs(report, out)
    _train_final_model(d, args, out)
    print(f"run complete: artifacts in {out}")
    for name in ("sensitivity", "specificity", "fnr", "auc"):
        print(f"  {name}: {report.mean(name):.3f} ({report.std(name):.3f})")
    return 0


def cmd_impute(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, d = _load_inputs(args)
    with _stage("impute"):
        imputed, audit = knn_impute_audited(d, ImputeConfig(k=args.k_impute))
    write_csv(imputed, out / "imputed.csv")
    _write_impute_audit(audit, out)
    print(f"imputed {len(audit)} cells; artifacts in {out}")
    return 0


def cmd_select(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, d = _load_inputs(args)
    with _stage("select"):
        report = screen_features(d, _selection_config(args))
    dump_json(report.to_json_dict(), out / "selection.json")
    (out / "selection.txt").write_text(report.render_table() + "\n",
                                       encoding="utf-8")
    print(report.render_table())
    return 0


def cmd_train(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, d = _load_inputs(args)
    d = _impute_if_needed(d, args.k_impute, out)
    _train_final_model(d, args, out)
    print(f"model written to {out / 'model.json'}")
    return 0


def cmd_predict(args) -> int:
    with _stage("load schema"):
        schema = load_schema(args.schema)
    with _stage("load model"):
        model, meta = load_model(args.model_file)
    user_hash = schema_hash(schema)
    accepted = {model.schema_hash, meta.get("source_schema_hash")}
    if user_hash not in accepted:
        raise ValueError("load model: schema hash mismatch; this model was "
                         "trained against a different schema")
    with _stage("load cohort"):
        d = load_csv(args.cohort, schema)
    features = meta.get("features") or list(model.schema.names)
    with _stage("predict"):
        if list(d.schema.names) != list(features):
            d = project(d, features)
        probs = predict_proba(model, d)
    print("row,probability")
    for i, p in enumerate(probs):
        print(f"{i},{format_float(p)}")
    return 0


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, d = _load_inputs(args)
    d = _impute_if_needed(d, args.k_impute, out)
    with _stage("evaluate"):
        report = run_cv(d, _cv_config(args, _selection_config(args)))
    dump_json(report.to_json_dict(), out / "cv_report.json")
    _write_roc_csvs(report, out)
    for name in ("sensitivity", "specificity", "fnr", "auc"):
        print(f"{name}: {report.mean(name):.3f} ({report.std(name):.3f})")
    return 0


def cmd_compare(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with _stage("load feature sets"):
        with open(args.sets, encoding="utf-8") as fh:
            sets = json.load(fh)
        if not isinstance(sets, dict):
            raise ValueError(f"{args.sets}: expected an object mapping set "
                             "names to feature lists")
    _, d = _load_inputs(args)
    d = _impute_if_needed(d, args.k_impute, out)
    # Feature sets are evaluated as given; no further screening inside.
    with _stage("compare"):
        report = compare_feature_sets(d, sets, _cv_config(args, None))
    dump_json(report.to_json_dict(), out / "comparison.json")
    (out / "comparison.txt").write_text(report.render_text() + "\n",
                                        encoding="utf-8")
    print(report.render_text())
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with _stage("synth"):
        cfg = SimConfig(seed=args.seed, n=args.n,
                        minority_rate=args.minority_rate,
                        n_features=args.n_features,
                        n_informative=args.n_informative,
                        missing_rate=args.missing_rate)
        d, truth = generate(cfg)
    write_csv(d, out / "cohort.csv")
    save_schema(d.schema, out / "schema.json")
    dump_json(truth, out / "truth.json")
    n1 = int((d.y == 1).sum())
    print(f"wrote cohort.csv ({d.n} rows, {n1} minority), schema.json, "
          f"truth.json to {out}")
    return 0


def _add_io_flags(p, need_out=True):
    p.add_argument("--cohort", required=True, help="cohort CSV path")
    p.add_argument("--schema", required=True, help="schema JSON path")
    if need_out:
        p.add_argument("--out", required=True, help="output directory")


def _add_seed_flag(p):
    p.add_argument("--seed", required=True, type=int,
                   help="rng seed (required; never defaulted from the clock)")


def _add_selection_flags(p):
    p.add_argument("--p-threshold", type=float, default=0.05)
    p.add_argument("--gain-threshold", type=float, default=0.002)


def _add_pipeline_flags(p):
    p.add_argument("--model", default="ensemble",
                   choices=["baseline-lr", "baseline-nb", "baseline-tree",
                            "baseline-forest", "ensemble"])
    p.add_argument("--k-folds", type=int, default=5)
    p.add_argument("--under-ratio", type=float, default=3.0)
    p.add_argument("--smote-mult", type=float, default=2.0)
    p.add_argument("--smote-k", type=int, default=5)
    p.add_argument("--balanced", action="store_true",
                   help="override the undersample ratio so classes end equal")
    p.add_argument("--no-rebalance", action="store_true")
    p.add_argument("--k-impute", type=int, default=5)
    p.add_argument("--select-on", choices=["fold", "full"], default="fold",
                   dest="select_on")
    _add_selection_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varisk",
        description="Imbalance-aware risk classification over mixed-type "
                    "cohort CSVs: imputation, univariate selection, "
                    "undersample+SMOTE rebalancing, and cross-validated "
                    "evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline: impute, select, evaluate, "
                                   "train final model")
    _add_io_flags(p)
    _add_seed_flag(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("impute", help="fill missing cells, emit audit")
    _add_io_flags(p)
    _add_seed_flag(p)
    p.add_argument("--k-impute", "--k", type=int, default=5, dest="k_impute")
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("select", help="univariate screening report")
    _add_io_flags(p)
    _add_selection_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="train and persist the final model")
    _add_io_flags(p)
    _add_seed_flag(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score new rows with a saved model")
    p.add_argument("--model", required=True, dest="model_file",
                   help="model JSON written by train/run")
    p.add_argument("--cohort", required=True)
    p.add_argument("--schema", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="cross-validated evaluation only")
    _add_io_flags(p)
    _add_seed_flag(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="paired comparison of feature sets")
    p.add_argument("--sets", required=True,
                   help="JSON file: {set name: [feature, ...]}")
    _add_io_flags(p)
    _add_seed_flag(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--out", required=True)
    _add_seed_flag(p)
    p.add_argument("--n", type=int, default=711)
    p.add_argument("--minority-rate", type=float, default=61 / 711)
    p.add_argument("--n-features", type=int, default=93)
    p.add_argument("--n-informative", type=int, default=22)
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("VARISK_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RuntimeError as e:
        print(f"varisk {args.command}: runtime error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"varisk {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
