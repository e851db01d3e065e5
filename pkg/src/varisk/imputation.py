"""Nearest-neighbor filling of missing cells over mixed-type records."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core_data import Dataset, FeatureVector, Schema

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixedDistance:
    """Gower-style distance config: per-feature weights and continuous ranges.

    Continuous contributions are |a - b| / range; nominal contributions are
    0/1 mismatch. A continuous feature whose observed range is zero (or
    that was never observed) is excluded from the distance. Averaging runs
    over features observed in both vectors only.
    """

    schema: Schema
    weights: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        r = np.array(self.ranges, dtype=np.float64)
        p = self.schema.n_features
        if w.shape != (p,) or r.shape != (p,):
            raise ValueError("weights and ranges must have one entry per feature")
        if (w < 0).any():
            raise ValueError("distance weights must be >= 0")
        if (r < 0).any():
            raise ValueError("continuous ranges must be >= 0")
        w.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ranges", r)

    @classmethod
    def from_dataset(cls, d: Dataset, weights=None) -> "MixedDistance":
        p = d.schema.n_features
        w = np.ones(p) if weights is None else np.asarray(weights, float)
        ranges = np.zeros(p)
        for j in range(p):
            if d.schema.is_nominal(j):
                continue
            col = d.X[:, j]
            obs = col[~np.isnan(col)]
            if obs.size:
                ranges[j] = float(obs.max() - obs.min())
        return cls(schema=d.schema, weights=w, ranges=ranges)

    def active_mask(self) -> np.ndarray:
        """Features that can contribute to the distance at all."""
        nominal = self.schema.nominal_mask()
        return (self.weights > 0) & (nominal | (self.ranges > 0))


@dataclass(frozen=True)
class ImputeConfig:
    k: int = 5
    distance: MixedDistance | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ImputeRecord:
    """Audit entry: one filled cell and the donor rows behind it."""

    row: int
    feature: str
    value: float
    donor_rows: tuple[int, ...]


def _row_distances(xi: np.ndarray, X: np.ndarray, cfg: MixedDistance) -> np.ndarray:
    """Distances from one record to every row of X; +inf when nothing is
    co-observed."""
    active = cfg.active_mask()
    nominal = cfg.schema.nominal_mask()
    co = (~np.isnan(xi))[None, :] & ~np.isnan(X) & active[None, :]
    diff = np.zeros_like(X)
    cont = active & ~nominal
    if cont.any():
        diff[:, cont] = np.abs(X[:, cont] - xi[None, cont]) / cfg.ranges[cont]
    nom = active & nominal
    if nom.any():
        diff[:, nom] = (X[:, nom] != xi[None, nom]).astype(np.float64)
    wsum = (co * cfg.weights[None, :]).sum(axis=1)
    num = np.where(co, diff * cfg.weights[None, :], 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(wsum > 0, num / wsum, np.inf)
    return out


def mixed_distance(a: FeatureVector, b: FeatureVector, cfg: MixedDistance) -> float:
    """Gower mean over co-observed features of two records."""
    p = cfg.schema.n_features
    if len(a.values) != p or len(b.values) != p:
        raise ValueError("vectors do not match the distance schema")
    xa = np.array([np.nan if v is None else float(v) for v in a.values])
    xb = np.array([np.nan if v is None else float(v) for v in b.values])
    return float(_row_distances(xa, xb[None, :], cfg)[0])


def _aggregate(values: np.ndarray, nominal: bool) -> float:
    if not nominal:
        return float(values.mean())
    # Mode; ties resolve to the lowest category index, so donor order
    # (and hence any seed-driven shuffle) cannot change the result.
    counts = np.bincount(values.astype(np.int64))
    return float(np.argmax(counts))


def _fill(target: Dataset, donors: Dataset,
          cfg: ImputeConfig) -> tuple[np.ndarray, list[ImputeRecord]]:
    if target.schema.names != donors.schema.names:
        raise ValueError("target and donor datasets use different schemas")
    dist_cfg = cfg.distance or MixedDistance.from_dataset(donors)
    X = np.array(target.X)
    missing_rows = np.where(np.isnan(X).any(axis=1))[0]
    needed = np.unique(np.where(np.isnan(X))[1])
    observed_at = {}
    for j in needed:
        pool = np.where(~np.isnan(donors.X[:, j]))[0]
        if pool.size == 0:
            raise ValueError(
                f"feature {target.schema.names[j]!r} is missing in all donor rows")
        observed_at[j] = pool

    audit: list[ImputeRecord] = []
    for i in missing_rows:
        dists = _row_distances(target.X[i], donors.X, dist_cfg)
        for j in np.where(np.isnan(X[i]))[0]:
            pool = observed_at[j]
            dpool = dists[pool]
            finite = np.isfinite(dpool)
            if finite.any():
                cand, cd = pool[finite], dpool[finite]
                k = min(cfg.k, cand.size)
                kth = np.partition(cd, k - 1)[k - 1]
                chosen = cand[cd <= kth]  # ties at rank k are all kept
            else:
                chosen = pool  # nothing co-observed anywhere: all donors tie
            value = _aggregate(donors.X[chosen, j],
                               target.schema.is_nominal(j))
            X[i, j] = value
            audit.append(ImputeRecord(row=int(i),
                                      feature=target.schema.names[j],
                                      value=value,
                                      donor_rows=tuple(int(c) for c in
                                                       np.sort(chosen))))
    return X, audit


def knn_impute(d: Dataset, cfg: ImputeConfig | None = None,
               seed: int | None = None) -> Dataset:
    """Replace every missing cell using the k nearest donor rows.

    Donors for a cell are the rows observed at that feature, ranked by
    mixed distance to the incomplete row; ties at rank k are all included.
    Continuous cells take the donor mean, nominal cells the donor mode
    with lowest-index tiebreak. Observed cells pass through bit-identical.
    The seed is accepted for interface stability; the tie rules make the
    result independent of it.
    """
    ds, _ = knn_impute_audited(d, cfg, seed)
    return ds


def knn_impute_audited(d: Dataset, cfg: ImputeConfig | None = None,
                       seed: int | None = None
                       ) -> tuple[Dataset, list[ImputeRecord]]:
    del seed
    cfg = cfg or ImputeConfig()
    X, audit = _fill(d, d, cfg)
    out = Dataset(schema=d.schema, X=X, y=d.y, origins=d.origins,
                  provenance=d.provenance)
    return out, audit


def impute_with_donors(target: Dataset, donors: Dataset,
                       cfg: ImputeConfig | None = None,
                       seed: int | None = None) -> Dataset:
    """Fill target's missing cells using donor rows from another dataset.

    Used to complete held-out rows with training-fold donors only, keeping
    evaluation leakage-free.
    """
    del seed
    cfg = cfg or ImputeConfig()
    X, _ = _fill(target, donors, cfg)
    return Dataset(schema=target.schema, X=X, y=target.y,
                   origins=target.origins, provenance=target.provenance)
