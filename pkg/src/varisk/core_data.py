"""Cohort data model: schema, mixed-type feature vectors, and CSV ingestion."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MISSING_TOKENS = frozenset({"", "NA", "NaN"})
DEFAULT_LABEL_ALIASES = {
    "0": 0, "1": 1, "no": 0, "yes": 1, "non-var": 0, "var": 1,
}


@dataclass(frozen=True)
class Continuous:
    """Real-valued feature."""


@dataclass(frozen=True)
class Nominal:
    """Categorical feature with a fixed, pre-declared category list."""

    categories: tuple[str, ...]

    def __post_init__(self):
        if len(self.categories) < 2:
            raise ValueError("nominal feature needs at least 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("nominal categories must be unique")


FeatureKind = Continuous | Nominal


@dataclass(frozen=True)
class Schema:
    """Ordered feature declarations plus the binary outcome column.

    Feature order is canonical: every vector and matrix in the package
    follows it. Nominal categories are fixed here so that train and test
    data share the same encoding.
    """

    features: tuple[tuple[str, FeatureKind], ...]
    label_name: str = "var"
    label_aliases: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_LABEL_ALIASES))
    missing_tokens: frozenset[str] = DEFAULT_MISSING_TOKENS

    def __post_init__(self):
        names = [n for n, _ in self.features]
        if not names:
            raise ValueError("schema declares no features")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate feature names in schema: {dupes}")
        if self.label_name in names:
            raise ValueError(f"label {self.label_name!r} also declared as a feature")
        for v in self.label_aliases.values():
            if v not in (0, 1):
                raise ValueError(f"label alias must map to 0 or 1, got {v!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.features)

    @property
    def n_features(self) -> int:
        return len(self.features)

    def kind(self, name: str) -> FeatureKind:
        return self.features[self.index(name)][1]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown feature {name!r}") from None

    def is_nominal(self, i: int) -> bool:
        return isinstance(self.features[i][1], Nominal)

    def categories(self, i: int) -> tuple[str, ...]:
        kind = self.features[i][1]
        if not isinstance(kind, Nominal):
            raise ValueError(f"feature {self.features[i][0]!r} is not nominal")
        return kind.categories

    def nominal_mask(self) -> np.ndarray:
        return np.array([self.is_nominal(i) for i in range(self.n_features)])

    def parse_label(self, token: str) -> int | None:
        """Map a raw label token to 0/1, or None for a missing token."""
        if token in self.missing_tokens:
            return None
        mapped = self.label_aliases.get(token.strip().lower())
        if mapped is None:
            raise ValueError(
                f"label value {token!r} not in declared aliases "
                f"{sorted(self.label_aliases)}"
            )
        return mapped

    def to_json_dict(self) -> dict:
        feats = []
        for name, kind in self.features:
            if isinstance(kind, Nominal):
                feats.append({"name": name, "kind": "nominal",
                              "categories": list(kind.categories)})
            else:
                feats.append({"name": name, "kind": "continuous"})
        return {
            "features": feats,
            "label": self.label_name,
            "label_aliases": dict(self.label_aliases),
            "missing_tokens": sorted(self.missing_tokens),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Schema":
        if "features" not in obj or "label" not in obj:
            raise ValueError("schema JSON must declare 'features' and 'label'")
        feats = []
        for f in obj["features"]:
            name, kind = f.get("name"), f.get("kind")
            if not name or kind not in ("continuous", "nominal"):
                raise ValueError(f"bad feature entry in schema JSON: {f!r}")
            if kind == "nominal":
                feats.append((name, Nominal(tuple(f.get("categories", ())))))
            else:
                feats.append((name, Continuous()))
        kwargs = {}
        if "label_aliases" in obj:
            kwargs["label_aliases"] = {str(k).lower(): int(v)
                                       for k, v in obj["label_aliases"].items()}
        if "missing_tokens" in obj:
            kwargs["missing_tokens"] = frozenset(obj["missing_tokens"])
        return cls(features=tuple(feats), label_name=obj["label"], **kwargs)


def load_schema(path: str | Path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return Schema.from_json_dict(json.load(fh))


def save_schema(schema: Schema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def schema_hash(schema: Schema) -> str:
    """Stable digest of the feature layout and label name.

    Aliases and missing tokens are ingestion details and deliberately
    excluded: two schemas that parse differently but describe the same
    vectors are model-compatible.
    """
    payload = json.dumps(
        [[n, "nominal" if isinstance(k, Nominal) else "continuous",
          list(k.categories) if isinstance(k, Nominal) else None]
         for n, k in schema.features] + [schema.label_name],
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class FeatureVector:
    """One patient record: per-feature cells plus an optional binary label.

    Cell values: None for missing, float for continuous, int (category
    index) for nominal.
    """

    values: tuple
    label: int | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable cohort: a schema, a cell matrix, labels, and row lineage.

    X is (n, p) float64 with NaN marking missing cells; nominal cells hold
    category indices. y is int8 with -1 marking an unlabeled row. origins
    tracks each row back to its source index in the originally loaded
    dataset; synthetic rows carry origin -1. Arrays are frozen read-only,
    so a Dataset is safe to share across threads.
    """

    schema: Schema
    X: np.ndarray
    y: np.ndarray
    origins: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.schema.n_features:
            raise ValueError(
                f"X must be (n, {self.schema.n_features}), got {X.shape}")
        y = np.array(self.y, dtype=np.int8)
        if y.shape != (X.shape[0],):
            raise ValueError("y length must match row count")
        if not np.isin(y, (-1, 0, 1)).all():
            raise ValueError("labels must be 0, 1, or -1 (unlabeled)")
        origins = np.array(self.origins, dtype=np.int64)
        if origins.shape != (X.shape[0],):
            raise ValueError("origins length must match row count")
        self._validate_cells(X)
        for arr in (X, y, origins):
            arr.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "origins", origins)

    def _validate_cells(self, X: np.ndarray) -> None:
        for j in range(self.schema.n_features):
            if not self.schema.is_nominal(j):
                continue
            col = X[:, j]
            obs = col[~np.isnan(col)]
            k = len(self.schema.categories(j))
            if obs.size and ((obs != np.floor(obs)).any() or obs.min() < 0
                             or obs.max() >= k):
                name = self.schema.names[j]
                raise ValueError(
                    f"column {name!r}: nominal codes must be integers in [0, {k})")

    # -- construction ----------------------------------------------------

    @classmethod
    def from_arrays(cls, schema: Schema, X, y, origins=None,
                    provenance: str = "") -> "Dataset":
        X = np.asarray(X, dtype=np.float64)
        if origins is None:
            origins = np.arange(X.shape[0], dtype=np.int64)
        return cls(schema=schema, X=X, y=np.asarray(y), origins=origins,
                   provenance=provenance)

    @classmethod
    def from_rows(cls, schema: Schema, rows: list[FeatureVector],
                  provenance: str = "") -> "Dataset":
        X = np.full((len(rows), schema.n_features), np.nan)
        y = np.full(len(rows), -1, dtype=np.int8)
        for i, row in enumerate(rows):
            if len(row.values) != schema.n_features:
                raise ValueError(f"row {i}: expected {schema.n_features} cells, "
                                 f"got {len(row.values)}")
            for j, v in enumerate(row.values):
                if v is not None:
                    X[i, j] = float(v)
            if row.label is not None:
                y[i] = row.label
        return cls.from_arrays(schema, X, y, provenance=provenance)

    # -- views -------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def has_labels(self) -> bool:
        return self.n > 0 and bool((self.y >= 0).all())

    @property
    def synthetic_mask(self) -> np.ndarray:
        return self.origins < 0

    def row(self, i: int) -> FeatureVector:
        vals = []
        for j, x in enumerate(self.X[i]):
            if math.isnan(x):
                vals.append(None)
            elif self.schema.is_nominal(j):
                vals.append(int(x))
            else:
                vals.append(float(x))
        label = int(self.y[i]) if self.y[i] >= 0 else None
        return FeatureVector(values=tuple(vals), label=label)

    def rows(self):
        return [self.row(i) for i in range(self.n)]

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(schema=self.schema, X=self.X[idx], y=self.y[idx],
                       origins=self.origins[idx], provenance=self.provenance)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.schema.index(name)]


def load_csv(path: str | Path, schema: Schema,
             missing_tokens: frozenset[str] | None = None) -> Dataset:
    """Parse a cohort CSV against a schema.

    The header must name every schema column; extra columns are ignored
    with a warning. The label column is optional (prediction inputs) but
    when present each non-missing value must match a declared alias.
    Cells equal to a missing token become missing. Raises ValueError with
    the offending row and column on any parse failure.
    """
    tokens = schema.missing_tokens if missing_tokens is None else missing_tokens
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        col_of = {name: i for i, name in enumerate(header)}
        missing_cols = [n for n in schema.names if n not in col_of]
        if missing_cols:
            raise ValueError(f"{path}: schema columns absent from header: "
                             f"{missing_cols}")
        extra = [h for h in header
                 if h not in schema.names and h != schema.label_name]
        if extra:
            log.warning("%s: ignoring columns not in schema: %s", path, extra)
        label_col = col_of.get(schema.label_name)

        cat_index = {}
        for j, (name, kind) in enumerate(schema.features):
            if isinstance(kind, Nominal):
                cat_index[j] = {c: i for i, c in enumerate(kind.categories)}

        rows_X, rows_y = [], []
        for rownum, rec in enumerate(reader, start=1):
            if len(rec) < len(header):
                raise ValueError(f"{path}: row {rownum}: expected "
                                 f"{len(header)} fields, got {len(rec)}")
            cells = np.full(schema.n_features, np.nan)
            for j, name in enumerate(schema.names):
                raw = rec[col_of[name]].strip()
                if raw in tokens:
                    continue
                if j in cat_index:
                    code = cat_index[j].get(raw)
                    if code is None:
                        raise ValueError(
                            f"{path}: row {rownum}, column {name!r}: unknown "
                            f"category {raw!r} (declared: "
                            f"{list(cat_index[j])})")
                    cells[j] = code
                else:
                    try:
                        cells[j] = float(raw)
                    except ValueError:
                        raise ValueError(
                            f"{path}: row {rownum}, column {name!r}: "
                            f"non-numeric value {raw!r}") from None
            label = -1
            if label_col is not None:
                try:
                    parsed = schema.parse_label(rec[label_col].strip())
                except ValueError as e:
                    raise ValueError(f"{path}: row {rownum}: {e}") from None
                label = -1 if parsed is None else parsed
            rows_X.append(cells)
            rows_y.append(label)

    X = np.array(rows_X) if rows_X else np.empty((0, schema.n_features))
    return Dataset.from_arrays(schema, X, np.array(rows_y, dtype=np.int8),
                               provenance=str(path))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV with round-trippable number formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.schema.names) + [d.schema.label_name])
        for i in range(d.n):
            rec = []
            for j, x in enumerate(d.X[i]):
                if math.isnan(x):
                    rec.append("")
                elif d.schema.is_nominal(j):
                    rec.append(d.schema.categories(j)[int(x)])
                else:
                    rec.append(repr(float(x)))
            rec.append("" if d.y[i] < 0 else str(int(d.y[i])))
            writer.writerow(rec)


def class_counts(d: Dataset) -> tuple[int, int, int]:
    """Return (n_minority, n_majority, minority_label); ties make 1 minority."""
    if d.n == 0:
        raise ValueError("empty dataset has no class counts")
    if not d.has_labels:
        unlabeled = int((d.y < 0).sum())
        raise ValueError(f"{unlabeled} unlabeled rows; class counts need labels")
    n1 = int((d.y == 1).sum())
    n0 = int((d.y == 0).sum())
    if n1 <= n0:
        return n1, n0, 1
    return n0, n1, 0


def project(d: Dataset, keep: list[str]) -> Dataset:
    """Restrict dataset and schema to the named features, in `keep` order."""
    if not keep:
        raise ValueError("projection onto an empty feature set")
    if len(set(keep)) != len(keep):
        raise ValueError("duplicate names in projection")
    idx = [d.schema.index(name) for name in keep]
    schema = replace(d.schema,
                     features=tuple(d.schema.features[i] for i in idx))
    return Dataset(schema=schema, X=d.X[:, idx], y=d.y, origins=d.origins,
                   provenance=d.provenance)
