"""Stratified cross-validation with training-fold-only rebalancing,
confusion metrics, and exact ROC/AUC."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import MODEL_NAMES, fit_model, predict_proba
from .core_data import Dataset, class_counts, project
from .feature_selection import SelectionConfig, SelectionReport, screen_features
from .imputation import ImputeConfig, impute_with_donors, knn_impute
from .resampling import RebalanceAudit, ResamplingConfig, rebalance

log = logging.getLogger(__name__)

SCOPE_FOLD = "fold"
SCOPE_FULL = "full"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_scores(cls, scores, labels, threshold: float = 0.5
                    ) -> "ConfusionMatrix":
        s = np.asarray(scores, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        pred = s >= threshold
        return cls(tp=int((pred & (y == 1)).sum()),
                   fp=int((pred & (y == 0)).sum()),
                   tn=int((~pred & (y == 0)).sum()),
                   fn=int((~pred & (y == 1)).sum()))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_json_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    sensitivity: float
    specificity: float
    fnr: float
    auc: float | None = None

    def to_json_dict(self) -> dict:
        return {"sensitivity": self.sensitivity,
                "specificity": self.specificity,
                "fnr": self.fnr, "auc": self.auc}


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), fpr ascending
    auc: float


def confusion_metrics(cm: ConfusionMatrix) -> MetricSet:
    """Sensitivity TP/(TP+FN), specificity TN/(TN+FP), miss rate as their
    complement. fnr is computed as 1 - sensitivity so the identity holds
    to the last bit."""
    if cm.tp + cm.fn == 0:
        raise ValueError("no positive (VAr) rows in the test population")
    if cm.tn + cm.fp == 0:
        raise ValueError("no negative (non-VAr) rows in the test population")
    sens = cm.tp / (cm.tp + cm.fn)
    spec = cm.tn / (cm.tn + cm.fp)
    return MetricSet(sensitivity=sens, specificity=spec, fnr=1.0 - sens)


def roc_auc(scored) -> RocCurve:
    """ROC curve over all distinct score thresholds plus the exact AUC.

    The AUC is the Mann-Whitney statistic P(s_pos > s_neg) + 0.5 P(tie),
    accumulated in integer arithmetic so it matches a brute-force count
    over all positive x negative pairs exactly.
    """
    arr = np.asarray(list(scored) if not isinstance(scored, np.ndarray)
                     else scored, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError("expected a non-empty sequence of (score, label) pairs")
    scores, labels = arr[:, 0], arr[:, 1].astype(np.int64)
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    m = int((labels == 1).sum())
    n0 = int((labels == 0).sum())
    if m == 0 or n0 == 0:
        raise ValueError("ROC needs both labels present")

    vals, inv = np.unique(scores, return_inverse=True)
    pos_at = np.bincount(inv[labels == 1], minlength=vals.size)
    neg_at = np.bincount(inv[labels == 0], minlength=vals.size)
    neg_below = np.concatenate(([0], np.cumsum(neg_at)[:-1]))
    total_twice = int((pos_at * (2 * neg_below + neg_at)).sum())
    auc = total_twice / (2 * m * n0)

    tp_ge = np.cumsum(pos_at[::-1])
    fp_ge = np.cumsum(neg_at[::-1])
    points = [(0.0, 0.0)]
    points += [(float(fp) / n0, float(tp) / m) for fp, tp in zip(fp_ge, tp_ge)]
    return RocCurve(points=tuple(points), auc=auc)


def stratified_folds(d: Dataset, k: int, seed) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint covering folds whose per-class test counts differ by at
    most one row from an even split."""
    n_min, _, _ = class_counts(d)
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n_min:
        raise ValueError(f"k={k} exceeds the minority class count {n_min}; "
                         "every fold needs a minority row")
    rng = np.random.default_rng(seed)
    test_parts: list[list[np.ndarray]] = [[] for _ in range(k)]
    for label in (0, 1):
        idx = rng.permutation(np.where(d.y == label)[0])
        for i, part in enumerate(np.array_split(idx, k)):
            test_parts[i].append(part)
    everything = np.arange(d.n)
    folds = []
    for parts in test_parts:
        test = np.sort(np.concatenate(parts))
        train = np.setdiff1d(everything, test)
        folds.append((train, test))
    return folds


@dataclass(frozen=True)
class CvConfig:
    seed: int
    k: int = 5
    model: str = "ensemble"
    selection: SelectionConfig | None = None
    selection_scope: str = SCOPE_FOLD
    resampling: ResamplingConfig | None = None
    impute: ImputeConfig = field(default_factory=ImputeConfig)

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.model!r}")
        if self.selection_scope not in (SCOPE_FOLD, SCOPE_FULL):
            raise ValueError(f"selection scope must be '{SCOPE_FOLD}' or "
                             f"'{SCOPE_FULL}'")

    def echo(self) -> dict:
        out = {"seed": self.seed, "k": self.k, "model": self.model,
               "selection_scope": self.selection_scope,
               "impute_k": self.impute.k}
        out["selection"] = (None if self.selection is None else
                            {"p_threshold": self.selection.p_threshold,
                             "gain_threshold": self.selection.gain_threshold,
                             "mode": self.selection.mode})
        out["resampling"] = (None if self.resampling is None else
                             {"under_ratio": self.resampling.under_ratio,
                              "smote_multiplier": self.resampling.smote_multiplier,
                              "smote_k": self.resampling.smote_k,
                              "balance_exact": self.resampling.balance_exact})
        return out


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    metrics: MetricSet
    roc: RocCurve
    rebalance_audit: RebalanceAudit | None = None
    selection: SelectionReport | None = None

    def to_json_dict(self) -> dict:
        return {"fold": self.fold, "n_train": self.n_train,
                "n_test": self.n_test,
                "confusion": self.confusion.to_json_dict(),
                "metrics": self.metrics.to_json_dict(),
                "roc_auc": self.roc.auc,
                "roc_points": [list(p) for p in self.roc.points],
                "rebalance_audit": (None if self.rebalance_audit is None
                                    else self.rebalance_audit.to_json_dict()),
                "selection": (None if self.selection is None
                              else self.selection.to_json_dict())}


METRIC_NAMES = ("sensitivity", "specificity", "fnr", "auc")


@dataclass(frozen=True)
class CvReport:
    folds: tuple[FoldResult, ...]
    aggregate: dict
    config: dict
    selection_full: SelectionReport | None = None

    def mean(self, metric: str) -> float:
        return self.aggregate[metric]["mean"]

    def std(self, metric: str) -> float:
        return self.aggregate[metric]["std"]

    def to_json_dict(self) -> dict:
        return {"config": self.config,
                "aggregate": self.aggregate,
                "folds": [f.to_json_dict() for f in self.folds],
                "selection_full": (None if self.selection_full is None
                                   else self.selection_full.to_json_dict())}


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1)[0])


def _check_no_leakage(fold: int, fit_d: Dataset, test_d: Dataset,
                      seen_test_origins: set) -> None:
    test_origins = test_d.origins
    if (test_origins < 0).any():
        raise RuntimeError(f"fold {fold}: synthetic row in the test fold")
    uniq = set(int(o) for o in test_origins)
    if len(uniq) != len(test_origins):
        raise RuntimeError(f"fold {fold}: duplicated row in the test fold")
    if uniq & seen_test_origins:
        raise RuntimeError(f"fold {fold}: test row reused across folds")
    train_real = set(int(o) for o in fit_d.origins if o >= 0)
    overlap = train_real & uniq
    if overlap:
        raise RuntimeError(f"fold {fold}: training rows leaked into the test "
                           f"fold (origins {sorted(overlap)[:5]})")
    seen_test_origins |= uniq


def run_cv(d: Dataset, cfg: CvConfig) -> CvReport:
    """Cross-validated evaluation of the configured pipeline.

    Per fold: optional univariate selection (on the training fold by
    default), nearest-neighbor imputation fitted on training rows,
    rebalancing of the training fold only, model fitting, and scoring of
    the untouched test fold. A hard leakage check rejects any synthetic or
    duplicated row in a test fold. Aggregates are the mean and sample
    standard deviation across folds.
    """
    if not d.has_labels:
        raise ValueError("cross-validation needs a fully labeled dataset")
    ss = np.random.SeedSequence(cfg.seed)
    children = ss.spawn(cfg.k + 1)
    folds = stratified_folds(d, cfg.k, children[0])

    selection_full = None
    keep_full = None
    if cfg.selection is not None and cfg.selection_scope == SCOPE_FULL:
        selection_full = screen_features(d, cfg.selection)
        keep_full = selection_full.selected_names()
        if not keep_full:
            raise ValueError("selection kept no features on the full dataset")

    results: list[FoldResult] = []
    seen_test_origins: set = set()
    for f, (train_idx, test_idx) in enumerate(folds):
        s_rebal, s_model = (_seed_int(c) for c in children[f + 1].spawn(2))
        train_d, test_d = d.take(train_idx), d.take(test_idx)

        fold_selection = None
        if cfg.selection is not None:
            if cfg.selection_scope == SCOPE_FOLD:
                fold_selection = screen_features(train_d, cfg.selection)
                keep = fold_selection.selected_names()
                if not keep:
                    raise ValueError(f"fold {f}: selection kept no features")
            else:
                keep = keep_full
            train_d = project(train_d, keep)
            test_d = project(test_d, keep)

        if np.isnan(train_d.X).any():
            train_d = knn_impute(train_d, cfg.impute)
        if np.isnan(test_d.X).any():
            test_d = impute_with_donors(test_d, train_d, cfg.impute)

        audit = None
        fit_d = train_d
        if cfg.resampling is not None:
            fit_d, audit = rebalance(train_d, replace(cfg.resampling,
                                                      seed=s_rebal))
        _check_no_leakage(f, fit_d, test_d, seen_test_origins)

        model = fit_model(cfg.model, fit_d, seed=s_model)
        scores = predict_proba(model, test_d)
        cm = ConfusionMatrix.from_scores(scores, test_d.y, threshold=0.5)
        roc = roc_auc(np.column_stack([scores, test_d.y]))
        metrics = replace(confusion_metrics(cm), auc=roc.auc)
        results.append(FoldResult(fold=f, n_train=fit_d.n, n_test=test_d.n,
                                  confusion=cm, metrics=metrics, roc=roc,
                                  rebalance_audit=audit,
                                  selection=fold_selection))

    aggregate = {}
    for name in METRIC_NAMES:
        vals = np.array([getattr(r.metrics, name) for r in results])
        aggregate[name] = {"mean": float(vals.mean()),
                           "std": float(vals.std(ddof=1))}
    return CvReport(folds=tuple(results), aggregate=aggregate,
                    config=cfg.echo(), selection_full=selection_full)


@dataclass(frozen=True)
class ComparisonReport:
    reports: dict  # set name -> CvReport, in input order

    def to_json_dict(self) -> dict:
        return {name: rep.to_json_dict() for name, rep in self.reports.items()}

    def render_text(self) -> str:
        names = list(self.reports)
        widths = [max(len(n), 14) for n in names]
        head = "metric".ljust(14) + "  " + "  ".join(
            n.ljust(w) for n, w in zip(names, widths))
        lines = [head, "-" * len(head)]
        for metric in METRIC_NAMES:
            cells = []
            for n, w in zip(names, widths):
                rep = self.reports[n]
                cells.append(f"{rep.mean(metric):.3f} "
                             f"({rep.std(metric):.3f})".ljust(w))
            lines.append(metric.ljust(14) + "  " + "  ".join(cells))
        return "\n".join(lines)


def compare_feature_sets(d: Dataset, sets: dict[str, list[str]],
                         cfg: CvConfig) -> ComparisonReport:
    """Run the same cross-validation over several named feature subsets.

    Folds depend only on the labels, fold count, and seed, so every set is
    evaluated on an identical partition (a paired comparison).
    """
    if not sets:
        raise ValueError("no feature sets given")
    for name, feats in sets.items():
        for feat in feats:
            d.schema.index(feat)  # raises on unknown names
        if not feats:
            raise ValueError(f"feature set {name!r} is empty")
    reports = {name: run_cv(project(d, feats), cfg)
               for name, feats in sets.items()}
    return ComparisonReport(reports=reports)
