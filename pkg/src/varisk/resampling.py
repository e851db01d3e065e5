"""Training-fold rebalancing: majority undersampling followed by SMOTE."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core_data import Dataset, class_counts
from .imputation import MixedDistance, _row_distances

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResamplingConfig:
    """Knobs for the two-stage rebalancing scheme.

    under_ratio is the majority:minority ratio after undersampling;
    smote_multiplier is the factor by which the minority class grows.
    With balance_exact the undersample ratio is overridden to the SMOTE
    multiplier so the final classes come out equal in count.
    """

    seed: int
    under_ratio: float = 3.0
    smote_multiplier: float = 2.0
    smote_k: int = 5
    balance_exact: bool = False

    def __post_init__(self):
        if self.under_ratio < 1:
            raise ValueError(f"under_ratio must be >= 1, got {self.under_ratio}")
        if self.smote_multiplier < 1:
            raise ValueError(
                f"smote_multiplier must be >= 1, got {self.smote_multiplier}")
        if self.smote_k < 1:
            raise ValueError(f"smote_k must be >= 1, got {self.smote_k}")


@dataclass(frozen=True)
class RebalanceAudit:
    n_majority_before: int
    n_minority_before: int
    n_majority_kept: int
    n_synthetic: int
    n_majority_final: int
    n_minority_final: int
    under_ratio_used: float
    smote_multiplier: float
    smote_k_used: int
    balance_exact: bool
    seed: int

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


def undersample_majority(d: Dataset, ratio: float, seed) -> Dataset:
    """Keep all minority rows and a uniform random majority subset.

    The majority class shrinks to floor(ratio * n_minority) rows, or stays
    whole if already at or below that. Kept rows preserve their original
    order.
    """
    if ratio < 1:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    n_min, n_maj, minority_label = class_counts(d)
    if n_min == 0:
        raise ValueError("cannot undersample: no minority rows")
    min_idx = np.where(d.y == minority_label)[0]
    maj_idx = np.where(d.y != minority_label)[0]
    target = int(math.floor(ratio * n_min))
    if n_maj > target:
        rng = np.random.default_rng(seed)
        maj_idx = rng.choice(maj_idx, size=target, replace=False)
    keep = np.sort(np.concatenate([min_idx, maj_idx]))
    return d.take(keep)


def smote_oversample(minority: Dataset, multiplier: float, k: int,
                     seed) -> Dataset:
    """Generate synthetic minority rows by neighbor interpolation.

    Emits floor((multiplier - 1) * n) rows. Each synthetic row starts from
    a minority record (records are cycled in order), picks one of its k
    nearest minority neighbors under the mixed distance, and interpolates
    continuous cells with a single lambda ~ U[0,1] drawn per row. Nominal
    cells take the majority vote over the k neighbors; vote ties fall back
    to the originating record's own category when it is among the tied
    ones, else the lowest category index. Synthetic rows are labeled with
    the minority label and carry origin -1.
    """
    n = minority.n
    if n < 2:
        raise ValueError(f"SMOTE needs >= 2 minority rows, got {n}")
    if not minority.has_labels or len(np.unique(minority.y)) != 1:
        raise ValueError("SMOTE input must be a single-class labeled dataset")
    if np.isnan(minority.X).any():
        raise ValueError("SMOTE input has missing cells; impute first")
    if k >= n:
        log.warning("smote_k=%d >= n_minority=%d; clamping to %d", k, n, n - 1)
        k = n - 1
    n_syn = int(math.floor((multiplier - 1.0) * n))
    label = int(minority.y[0])
    nominal = minority.schema.nominal_mask()
    schema = minority.schema
    if n_syn == 0:
        return Dataset(schema=schema, X=np.empty((0, schema.n_features)),
                       y=np.empty(0, dtype=np.int8),
                       origins=np.empty(0, dtype=np.int64),
                       provenance="smote")

    dist_cfg = MixedDistance.from_dataset(minority)
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        dists = _row_distances(minority.X[i], minority.X, dist_cfg)
        dists[i] = np.inf
        neighbors[i] = np.argsort(dists, kind="stable")[:k]

    rng = np.random.default_rng(seed)
    X_syn = np.empty((n_syn, schema.n_features))
    for t in range(n_syn):
        s = t % n
        nbrs = neighbors[s]
        chosen = int(nbrs[rng.integers(k)])
        lam = rng.random()
        base = minority.X[s]
        other = minority.X[chosen]
        row = base + lam * (other - base)
        for j in np.where(nominal)[0]:
            codes = minority.X[nbrs, j].astype(np.int64)
            counts = np.bincount(codes)
            tied = np.flatnonzero(counts == counts.max())
            own = int(base[j])
            row[j] = own if own in tied else int(tied.min())
        X_syn[t] = row

    return Dataset(schema=schema, X=X_syn,
                   y=np.full(n_syn, label, dtype=np.int8),
                   origins=np.full(n_syn, -1, dtype=np.int64),
                   provenance="smote")


def rebalance(train: Dataset, cfg: ResamplingConfig
              ) -> tuple[Dataset, RebalanceAudit]:
    """Undersample the majority class, SMOTE the minority, shuffle, audit."""
    n_min, n_maj, minority_label = class_counts(train)
    ratio = cfg.smote_multiplier if cfg.balance_exact else cfg.under_ratio
    ss = np.random.SeedSequence(cfg.seed)
    s_under, s_smote, s_shuffle = ss.spawn(3)

    under = undersample_majority(train, ratio, s_under)
    kept_maj = int((under.y != minority_label).sum())

    minority_ds = under.take(np.where(under.y == minority_label)[0])
    n_syn_target = int(math.floor((cfg.smote_multiplier - 1.0) * n_min))
    smote_k_used = min(cfg.smote_k, max(n_min - 1, 1))
    if n_syn_target > 0:
        synthetic = smote_oversample(minority_ds, cfg.smote_multiplier,
                                     cfg.smote_k, s_smote)
    else:
        synthetic = None

    X = under.X if synthetic is None else np.vstack([under.X, synthetic.X])
    y = under.y if synthetic is None else np.concatenate([under.y, synthetic.y])
    origins = (under.origins if synthetic is None
               else np.concatenate([under.origins, synthetic.origins]))
    order = np.random.default_rng(s_shuffle).permutation(len(y))
    out = Dataset(schema=train.schema, X=X[order], y=y[order],
                  origins=origins[order],
                  provenance=f"{train.provenance}+rebalanced")

    n_syn = 0 if synthetic is None else synthetic.n
    audit = RebalanceAudit(
        n_majority_before=n_maj,
        n_minority_before=n_min,
        n_majority_kept=kept_maj,
        n_synthetic=n_syn,
        n_majority_final=kept_maj,
        n_minority_final=n_min + n_syn,
        under_ratio_used=float(ratio),
        smote_multiplier=float(cfg.smote_multiplier),
        smote_k_used=int(smote_k_used),
        balance_exact=cfg.balance_exact,
        seed=cfg.seed,
    )
    return out, audit
