"""Univariate screening of features against the outcome, with reporting."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core_data import Dataset, Schema
from .stats_tests import (
    AssociationResult,
    ContingencyTable,
    info_gain,
    polychoric,
    polyserial,
    welch_t,
)

log = logging.getLogger(__name__)

FIXED_THRESHOLD = "fixed_threshold"
BACKWARD_ELIMINATION = "backward_elimination"


@dataclass(frozen=True)
class SelectionConfig:
    p_threshold: float = 0.05
    gain_threshold: float = 0.002
    mode: str = FIXED_THRESHOLD
    elimination_tolerance: float = 0.005

    def __post_init__(self):
        if self.p_threshold <= 0:
            raise ValueError("p_threshold must be > 0")
        if self.gain_threshold <= 0:
            raise ValueError("gain_threshold must be > 0")
        if self.mode not in (FIXED_THRESHOLD, BACKWARD_ELIMINATION):
            raise ValueError(f"unknown selection mode {self.mode!r}")


@dataclass(frozen=True)
class FeatureStat:
    """Screening outcome for one feature.

    Continuous features carry a t statistic and p-value, nominal features
    an information gain. `association` is the latent correlation with the
    outcome (polyserial or polychoric), when computable.
    """

    name: str
    kind: str
    statistic: float | None
    p_value: float | None
    gain: float | None
    association: AssociationResult | None
    selected: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        assoc = None
        if self.association is not None:
            assoc = {"rho": self.association.rho,
                     "kind": self.association.kind,
                     "converged": self.association.converged,
                     "loglik": self.association.loglik}
        return {"name": self.name, "kind": self.kind,
                "statistic": self.statistic, "p_value": self.p_value,
                "gain": self.gain, "association": assoc,
                "selected": self.selected, "note": self.note}


@dataclass(frozen=True)
class SelectionReport:
    stats: tuple[FeatureStat, ...]
    elimination_path: tuple[tuple[str, float], ...] = field(default=())

    def selected_names(self) -> list[str]:
        return [s.name for s in self.stats if s.selected]

    def stat(self, name: str) -> FeatureStat:
        for s in self.stats:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        out = {"features": [s.to_json_dict() for s in self.stats],
               "selected": self.selected_names()}
        if self.elimination_path:
            out["elimination_path"] = [
                {"dropped": name, "score": score}
                for name, score in self.elimination_path]
        return out

    def render_table(self) -> str:
        """Plain-text table: name, kind, p-value, gain, association, selected."""
        headers = ("variable", "kind", "p-value", "gain", "association", "selected")
        rows = []
        for s in self.stats:
            rho = "" if s.association is None else f"{s.association.rho:+.3f}"
            rows.append((
                s.name, s.kind,
                "" if s.p_value is None else f"{s.p_value:.4g}",
                "" if s.gain is None else f"{s.gain:.4g}",
                rho,
                "yes" if s.selected else "no",
            ))
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        return "\n".join(lines)


def _screen_continuous(x: np.ndarray, lab: np.ndarray,
                       cfg: SelectionConfig) -> tuple:
    x1, x0 = x[lab == 1], x[lab == 0]
    if x1.size < 2 or x0.size < 2:
        return None, None, None, False, (
            f"unevaluable: needs 2 observed values per class, "
            f"got {x1.size} VAr / {x0.size} non-VAr")
    try:
        res = welch_t(x1, x0)
    except ValueError as e:
        return None, None, None, False, f"unevaluable: {e}"
    try:
        assoc = polyserial(x, lab)
    except ValueError:
        assoc = None
    return res.t, res.p_two_sided, assoc, res.p_two_sided <= cfg.p_threshold, ""


def _screen_nominal(x: np.ndarray, lab: np.ndarray,
                    cfg: SelectionConfig, name: str) -> tuple:
    try:
        res = info_gain(x, lab)
    except ValueError as e:
        return None, None, False, f"unevaluable: {e}"
    note = ""
    levels = np.unique(x)
    counts = np.array([[int(((x == lv) & (lab == c)).sum()) for c in (0, 1)]
                       for lv in levels], dtype=np.int64)
    single = [int(lv) for lv, row in zip(levels, counts)
              if row.sum() > 0 and (row == 0).any()]
    if single:
        note = f"single-class support at level(s) {single}"
        log.warning("feature %r: %s", name, note)
    assoc = None
    if len(levels) >= 2 and (counts.sum(axis=0) > 0).all():
        try:
            assoc = polychoric(ContingencyTable(counts))
        except ValueError:
            assoc = None
    return res.gain, assoc, res.gain >= cfg.gain_threshold, note


def screen_features(d: Dataset, cfg: SelectionConfig | None = None
                    ) -> SelectionReport:
    """Test every feature against the class, one at a time.

    Continuous features get Welch's t between the class-conditional
    samples; nominal features get information gain. Missing cells are
    dropped pairwise. Features that cannot be evaluated stay in the
    report, unselected, with a note. Output is ordered by ascending
    p-value, then descending gain.
    """
    cfg = cfg or SelectionConfig()
    if not d.has_labels:
        raise ValueError("screening needs a fully labeled dataset")
    if (d.y == 1).sum() < 2 or (d.y == 0).sum() < 2:
        raise ValueError("screening needs at least 2 rows per class")

    stats: list[FeatureStat] = []
    for j, name in enumerate(d.schema.names):
        col = d.X[:, j]
        keep = ~np.isnan(col)
        x, lab = col[keep], d.y[keep].astype(np.int64)
        if d.schema.is_nominal(j):
            if x.size == 0:
                stats.append(FeatureStat(name, "nominal", None, None, None,
                                         None, False,
                                         "unevaluable: no observed values"))
                continue
            gain, assoc, selected, note = _screen_nominal(x, lab, cfg, name)
            stats.append(FeatureStat(name, "nominal", gain, None, gain,
                                     assoc, selected, note))
        else:
            if x.size == 0:
                stats.append(FeatureStat(name, "continuous", None, None, None,
                                         None, False,
                                         "unevaluable: no observed values"))
                continue
            t, p, assoc, selected, note = _screen_continuous(x, lab, cfg)
            stats.append(FeatureStat(name, "continuous", t, p, None,
                                     assoc, selected, note))

    order = {name: i for i, name in enumerate(d.schema.names)}
    stats.sort(key=lambda s: (
        s.p_value if s.p_value is not None else math.inf,
        -s.gain if s.gain is not None else math.inf,
        order[s.name],
    ))
    return SelectionReport(stats=tuple(stats))


def backward_eliminate(d: Dataset, evaluate: Callable[[list[str]], float],
                       cfg: SelectionConfig | None = None) -> SelectionReport:
    """Drop the lowest-gain nominal feature until the score deteriorates.

    `evaluate` maps a feature-name list to a scalar score (higher is
    better, a C-index in the pipeline). Elimination stops at the first
    evaluation falling more than `elimination_tolerance` below the running
    best; the returned report marks the inclusion set that attained the
    best score, with exact ties resolved toward fewer features.
    """
    cfg = cfg or SelectionConfig()
    screened = screen_features(d, cfg)
    gain_of = {s.name: (s.gain if s.gain is not None else 0.0)
               for s in screened.stats if s.kind == "nominal"}

    included = list(d.schema.names)
    path: list[tuple[str, float]] = []
    best = evaluate(list(included))
    best_set = list(included)
    path.append(("", best))

    while len(included) > 1:
        droppable = sorted((g, name) for name, g in gain_of.items()
                           if name in included)
        if not droppable:
            break
        _, victim = droppable[0]
        included.remove(victim)
        score = evaluate(list(included))
        path.append((victim, score))
        if score > best:
            best, best_set = score, list(included)
        elif score == best:
            best_set = list(included)
        elif score < best - cfg.elimination_tolerance:
            break

    keep = set(best_set)
    stats = tuple(replace(s, selected=s.name in keep) for s in screened.stats)
    return SelectionReport(stats=stats, elimination_path=tuple(path))


def exclude_outcome_variables(schema: Schema, exclude: list[str],
                              strict: bool = False) -> Schema:
    """Drop outcome descriptors and adverse-outcome columns from a schema."""
    if schema.label_name in exclude:
        raise ValueError(f"cannot exclude the label column "
                         f"{schema.label_name!r}")
    unknown = [n for n in exclude if n not in schema.names]
    if unknown:
        if strict:
            raise ValueError(f"unknown features in exclusion list: {unknown}")
        log.warning("exclusion list names absent from schema: %s", unknown)
    kept = tuple(f for f in schema.features if f[0] not in set(exclude))
    if not kept:
        raise ValueError("exclusion list removes every feature")
    return replace(schema, features=kept)
