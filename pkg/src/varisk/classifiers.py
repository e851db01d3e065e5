"""From-scratch probabilistic classifiers over mixed-type records:
logistic regression, naive Bayes, CART trees, random forest, and the
mean-probability ensemble. All models emit Pr(class 1 | record)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .core_data import Dataset, FeatureVector, Nominal, Schema, schema_hash

MODEL_NAMES = ("baseline-lr", "baseline-nb", "baseline-tree",
               "baseline-forest", "ensemble")
MEAN_PROBABILITY = "mean_probability"


@dataclass(frozen=True, eq=False)
class Encoding:
    """Maps raw records to the numeric design matrix.

    Continuous features pass through; nominal features expand to one-hot
    blocks over all declared categories (no dropped column; the L2 penalty
    absorbs the collinearity).
    """

    schema: Schema
    columns: tuple[str, ...]
    feature_of: tuple[int, ...]

    @classmethod
    def from_schema(cls, schema: Schema) -> "Encoding":
        cols, owner = [], []
        for j, (name, kind) in enumerate(schema.features):
            if isinstance(kind, Nominal):
                for cat in kind.categories:
                    cols.append(f"{name}={cat}")
                    owner.append(j)
            else:
                cols.append(name)
                owner.append(j)
        return cls(schema=schema, columns=tuple(cols), feature_of=tuple(owner))

    @property
    def dim(self) -> int:
        return len(self.columns)

    def encode_matrix(self, X: np.ndarray) -> np.ndarray:
        if np.isnan(X).any():
            raise ValueError("record has missing cells; impute before encoding")
        blocks = []
        for j, (name, kind) in enumerate(self.schema.features):
            if isinstance(kind, Nominal):
                codes = X[:, j].astype(np.int64)
                onehot = np.zeros((X.shape[0], len(kind.categories)))
                onehot[np.arange(X.shape[0]), codes] = 1.0
                blocks.append(onehot)
            else:
                blocks.append(X[:, j:j + 1])
        return np.hstack(blocks)


def _check_fit_input(train: Dataset, allow_single_class: bool = False) -> None:
    if not train.has_labels:
        raise ValueError("training data must be fully labeled")
    if np.isnan(train.X).any():
        raise ValueError("training data has missing cells; impute first")
    classes = np.unique(train.y)
    if len(classes) < 2 and not allow_single_class:
        raise ValueError(f"single-class training set (only label {classes[0]})")


def _vector_to_matrix(schema: Schema, v: FeatureVector) -> np.ndarray:
    if len(v.values) != schema.n_features:
        raise ValueError(f"vector has {len(v.values)} cells, model expects "
                         f"{schema.n_features}")
    row = np.empty((1, schema.n_features))
    for j, val in enumerate(v.values):
        if val is None:
            raise ValueError(f"missing cell at feature "
                             f"{schema.names[j]!r}; impute first")
        row[0, j] = float(val)
    return row


# -- logistic regression -------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogisticModel:
    schema_hash: str
    encoding: Encoding
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    sd: np.ndarray
    l2: float
    converged: bool
    n_iter: int

    @property
    def schema(self) -> Schema:
        return self.encoding.schema

    def proba_matrix(self, X: np.ndarray) -> np.ndarray:
        Z = (self.encoding.encode_matrix(X) - self.mean) / self.sd
        return expit(Z @ self.weights + self.bias)


def logistic_objective(weights: np.ndarray, bias: float, X: np.ndarray,
                       y: np.ndarray, l2: float
                       ) -> tuple[float, np.ndarray, float]:
    """L2-penalized negative log-likelihood with its analytic gradient.

    X is the standardized design matrix; the bias is unpenalized. Exposed
    so the optimum can be checked against finite differences.
    """
    z = X @ weights + bias
    nll = float(np.logaddexp(0.0, z).sum() - y @ z
                + 0.5 * l2 * weights @ weights)
    p = expit(z)
    grad_w = X.T @ (p - y) + l2 * weights
    grad_b = float((p - y).sum())
    return nll, grad_w, grad_b


def fit_logistic(train: Dataset, l2: float = 1.0, tol: float = 1e-8,
                 max_iter: int = 500) -> LogisticModel:
    """Newton's method on the convex penalized objective.

    Features are standardized at fit time (constant columns get an sd
    sentinel of 1 and end up with weight 0). Steps are halved when they
    fail to decrease the objective. Convergence means the gradient
    infinity-norm fell below tol; hitting max_iter leaves the flag off.
    """
    if l2 < 0:
        raise ValueError("l2 must be >= 0")
    _check_fit_input(train)
    enc = Encoding.from_schema(train.schema)
    Xe = enc.encode_matrix(train.X)
    mean = Xe.mean(axis=0)
    sd = Xe.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    X = (Xe - mean) / sd
    y = train.y.astype(np.float64)
    n, D = X.shape

    Xa = np.hstack([X, np.ones((n, 1))])
    reg = np.append(np.full(D, l2), 0.0)
    theta = np.zeros(D + 1)
    converged = False
    it = 0
    nll, gw, gb = logistic_objective(theta[:D], theta[D], X, y, l2)
    for it in range(1, max_iter + 1):
        g = np.append(gw, gb)
        if np.abs(g).max() <= tol:
            converged = True
            break
        p = expit(Xa @ theta)
        s = p * (1.0 - p)
        H = (Xa * s[:, None]).T @ Xa + np.diag(reg)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        alpha = 1.0
        while alpha > 1e-12:
            cand = theta - alpha * step
            new_nll, new_gw, new_gb = logistic_objective(cand[:D], cand[D],
                                                         X, y, l2)
            if new_nll <= nll:
                theta, nll, gw, gb = cand, new_nll, new_gw, new_gb
                break
            alpha /= 2.0
        else:
            break  # no descent direction left; report unconverged
    else:
        it = max_iter
    if not converged and np.abs(np.append(gw, gb)).max() <= tol:
        converged = True

    return LogisticModel(schema_hash=schema_hash(train.schema), encoding=enc,
                         weights=theta[:D].copy(), bias=float(theta[D]),
                         mean=mean, sd=sd, l2=float(l2),
                         converged=converged, n_iter=it)


# -- naive Bayes ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    schema_hash: str
    schema: Schema
    priors: np.ndarray                 # (2,)
    cont_mean: np.ndarray              # (2, p); NaN on nominal slots
    cont_var: np.ndarray               # (2, p)
    cat_prob: dict[int, np.ndarray]    # feature index -> (2, n_categories)
    alpha: float
    var_floor: float

    def proba_matrix(self, X: np.ndarray) -> np.ndarray:
        if np.isnan(X).any():
            raise ValueError("record has missing cells; impute before scoring")
        n = X.shape[0]
        ll = np.log(self.priors)[None, :].repeat(n, axis=0)
        for j in range(self.schema.n_features):
            col = X[:, j]
            if j in self.cat_prob:
                table = self.cat_prob[j]
                codes = col.astype(np.int64)
                ll += np.log(table[:, codes]).T
            else:
                m, v = self.cont_mean[:, j], self.cont_var[:, j]
                ll += (-0.5 * np.log(2.0 * math.pi * v)[None, :]
                       - (col[:, None] - m[None, :]) ** 2 / (2.0 * v)[None, :])
        shift = ll.max(axis=1, keepdims=True)
        w = np.exp(ll - shift)
        return w[:, 1] / w.sum(axis=1)


def fit_naive_bayes(train: Dataset, alpha: float = 1.0,
                    var_floor: float = 1e-9) -> NaiveBayesModel:
    """Gaussian class-conditionals for continuous features, Laplace-smoothed
    category tables for nominal ones; priors are the class frequencies."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    _check_fit_input(train)
    p = train.schema.n_features
    priors = np.array([(train.y == 0).sum(), (train.y == 1).sum()],
                      dtype=np.float64) / train.n
    cont_mean = np.full((2, p), np.nan)
    cont_var = np.full((2, p), np.nan)
    cat_prob: dict[int, np.ndarray] = {}
    for j in range(p):
        col = train.X[:, j]
        if train.schema.is_nominal(j):
            k = len(train.schema.categories(j))
            table = np.empty((2, k))
            for c in (0, 1):
                counts = np.bincount(col[train.y == c].astype(np.int64),
                                     minlength=k).astype(np.float64)
                table[c] = (counts + alpha) / (counts.sum() + alpha * k)
            cat_prob[j] = table
        else:
            for c in (0, 1):
                sub = col[train.y == c]
                cont_mean[c, j] = sub.mean()
                cont_var[c, j] = max(float(sub.var()), var_floor)
    return NaiveBayesModel(schema_hash=schema_hash(train.schema),
                           schema=train.schema, priors=priors,
                           cont_mean=cont_mean, cont_var=cont_var,
                           cat_prob=cat_prob, alpha=float(alpha),
                           var_floor=float(var_floor))


# -- CART tree and random forest -------------------------------------------

@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2


@dataclass(frozen=True)
class ForestParams:
    seed: int
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    mtry: int | None = None  # per-split feature subset; default ceil(sqrt(p))
    bootstrap: bool = True


@dataclass(frozen=True, eq=False)
class TreeNode:
    counts: tuple[int, int] | None = None
    feature: int | None = None
    threshold: float | None = None
    left_categories: frozenset[int] | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None


def _gini_prefix_cost(n_left, pos_left, n_total, pos_total):
    """Weighted Gini impurity of a left/right split, vectorized over the
    candidate prefix sizes."""
    n_right = n_total - n_left
    pos_right = pos_total - pos_left
    with np.errstate(invalid="ignore", divide="ignore"):
        gl = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
        gr = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
    return (n_left * gl + n_right * gr) / n_total


def _best_split_feature(x: np.ndarray, y: np.ndarray, nominal: bool,
                        min_leaf: int):
    n = x.size
    pos_total = y.sum()
    if nominal:
        cats, inv = np.unique(x, return_inverse=True)
        if cats.size < 2:
            return None
        n_c = np.bincount(inv).astype(np.float64)
        pos_c = np.bincount(inv, weights=y)
        order = np.argsort(pos_c / n_c, kind="stable")
        n_cum = np.cumsum(n_c[order])[:-1]
        pos_cum = np.cumsum(pos_c[order])[:-1]
        cost = _gini_prefix_cost(n_cum, pos_cum, n, pos_total)
        ok = (n_cum >= min_leaf) & (n - n_cum >= min_leaf)
        if not ok.any():
            return None
        cost = np.where(ok, cost, np.inf)
        i = int(np.argmin(cost))
        left = frozenset(int(cats[c]) for c in order[:i + 1])
        return float(cost[i]), None, left
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    boundary = np.where(np.diff(xs) > 0)[0]  # split between i and i+1
    if boundary.size == 0:
        return None
    n_left = (boundary + 1).astype(np.float64)
    pos_left = np.cumsum(ys)[boundary]
    cost = _gini_prefix_cost(n_left, pos_left, n, pos_total)
    ok = (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not ok.any():
        return None
    cost = np.where(ok, cost, np.inf)
    i = int(np.argmin(cost))
    b = boundary[i]
    return float(cost[i]), float((xs[b] + xs[b + 1]) / 2.0), None


def _grow(X: np.ndarray, y: np.ndarray, schema: Schema, params,
          depth: int, rng, mtry: int | None) -> TreeNode:
    counts = (int((y == 0).sum()), int((y == 1).sum()))
    n = y.size
    if (counts[0] == 0 or counts[1] == 0 or n < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)):
        return TreeNode(counts=counts)
    p = schema.n_features
    if mtry is not None and mtry < p:
        candidates = np.sort(rng.choice(p, size=mtry, replace=False))
    else:
        candidates = np.arange(p)
    best = None
    for j in candidates:
        found = _best_split_feature(X[:, j], y.astype(np.float64),
                                    schema.is_nominal(int(j)),
                                    params.min_samples_leaf)
        if found is None:
            continue
        cost, threshold, left_cats = found
        if best is None or cost < best[0]:
            best = (cost, int(j), threshold, left_cats)
    if best is None:
        return TreeNode(counts=counts)
    _, j, threshold, left_cats = best
    if left_cats is not None:
        mask = np.isin(X[:, j].astype(np.int64), sorted(left_cats))
    else:
        mask = X[:, j] <= threshold
    return TreeNode(feature=j, threshold=threshold, left_categories=left_cats,
                    left=_grow(X[mask], y[mask], schema, params, depth + 1,
                               rng, mtry),
                    right=_grow(X[~mask], y[~mask], schema, params, depth + 1,
                                rng, mtry))


def _tree_proba_one(node: TreeNode, row: np.ndarray) -> float:
    while not node.is_leaf:
        if node.left_categories is not None:
            go_left = int(row[node.feature]) in node.left_categories
        else:
            go_left = row[node.feature] <= node.threshold
        node = node.left if go_left else node.right
    n0, n1 = node.counts
    return n1 / (n0 + n1)


@dataclass(frozen=True, eq=False)
class TreeModel:
    schema_hash: str
    schema: Schema
    root: TreeNode
    params: TreeParams

    def proba_matrix(self, X: np.ndarray) -> np.ndarray:
        if np.isnan(X).any():
            raise ValueError("record has missing cells; impute before scoring")
        return np.array([_tree_proba_one(self.root, X[i])
                         for i in range(X.shape[0])])


@dataclass(frozen=True, eq=False)
class ForestModel:
    schema_hash: str
    schema: Schema
    trees: tuple[TreeModel, ...]
    params: ForestParams

    def proba_matrix(self, X: np.ndarray) -> np.ndarray:
        per_tree = [t.proba_matrix(X) for t in self.trees]
        # fsum keeps the mean invariant to tree ordering
        return np.array([math.fsum(pt[i] for pt in per_tree) / len(per_tree)
                         for i in range(X.shape[0])])


def fit_tree(train: Dataset, params: TreeParams | None = None) -> TreeModel:
    """Grow a binary CART tree with Gini impurity until leaves are pure or
    no valid split remains. A single-class input yields one leaf."""
    params = params or TreeParams()
    _check_fit_input(train, allow_single_class=True)
    root = _grow(train.X, train.y.astype(np.int64), train.schema, params,
                 depth=0, rng=None, mtry=None)
    return TreeModel(schema_hash=schema_hash(train.schema),
                     schema=train.schema, root=root, params=params)


def fit_forest(train: Dataset, params: ForestParams) -> ForestModel:
    """Bagged CART trees with per-split random feature subsets.

    Each tree draws a bootstrap sample and its own rng stream from the
    forest seed, so results are reproducible and independent of tree
    construction order.
    """
    _check_fit_input(train, allow_single_class=True)
    p = train.schema.n_features
    mtry = params.mtry if params.mtry is not None else math.ceil(math.sqrt(p))
    mtry = min(mtry, p)
    tree_params = TreeParams(max_depth=params.max_depth,
                             min_samples_leaf=params.min_samples_leaf,
                             min_samples_split=params.min_samples_split)
    trees = []
    for child in np.random.SeedSequence(params.seed).spawn(params.n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, train.n, size=train.n)
        root = _grow(train.X[boot], train.y[boot].astype(np.int64),
                     train.schema, tree_params, depth=0, rng=rng, mtry=mtry)
        trees.append(TreeModel(schema_hash=schema_hash(train.schema),
                               schema=train.schema, root=root,
                               params=tree_params))
    return ForestModel(schema_hash=schema_hash(train.schema),
                       schema=train.schema, trees=tuple(trees), params=params)


# -- ensemble ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EnsembleModel:
    schema_hash: str
    schema: Schema
    members: tuple
    rule: str = MEAN_PROBABILITY
    threshold: float = 0.5

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if self.rule != MEAN_PROBABILITY:
            raise ValueError(f"unsupported combination rule {self.rule!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")

    def proba_matrix(self, X: np.ndarray) -> np.ndarray:
        per_member = [m.proba_matrix(X) for m in self.members]
        return np.array([math.fsum(pm[i] for pm in per_member)
                         / len(per_member) for i in range(X.shape[0])])


def fit_ensemble(train: Dataset, l2: float = 1.0, alpha: float = 1.0,
                 threshold: float = 0.5) -> EnsembleModel:
    """The pipeline's classifier: mean of logistic and naive Bayes posteriors."""
    members = (fit_logistic(train, l2=l2), fit_naive_bayes(train, alpha=alpha))
    return EnsembleModel(schema_hash=schema_hash(train.schema),
                         schema=train.schema, members=members,
                         threshold=threshold)


def fit_model(name: str, train: Dataset, seed: int | None = None):
    """Dispatch by pipeline model name."""
    if name == "baseline-lr":
        return fit_logistic(train)
    if name == "baseline-nb":
        return fit_naive_bayes(train)
    if name == "baseline-tree":
        return fit_tree(train)
    if name == "baseline-forest":
        if seed is None:
            raise ValueError("forest model needs a seed")
        return fit_forest(train, ForestParams(seed=seed))
    if name == "ensemble":
        return fit_ensemble(train)
    raise ValueError(f"unknown model {name!r}; choose from {MODEL_NAMES}")


# -- scoring ------------------------------------------------------------------

def predict_proba(model, v: FeatureVector | Dataset):
    """Pr(class 1 | record) for one vector or a whole dataset."""
    if isinstance(v, Dataset):
        if schema_hash(v.schema) != model.schema_hash:
            raise ValueError("dataset schema does not match the model's "
                             "training schema")
        return model.proba_matrix(v.X)
    if isinstance(v, FeatureVector):
        return float(model.proba_matrix(_vector_to_matrix(model.schema, v))[0])
    raise TypeError(f"cannot score {type(v).__name__}")


def classify(model, v: FeatureVector | Dataset, threshold: float = 0.5):
    """Label 1 iff the predicted probability reaches the threshold."""
    p = predict_proba(model, v)
    if isinstance(p, float):
        return int(p >= threshold)
    return (p >= threshold).astype(np.int8)


# -- persistence ---------------------------------------------------------------

def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": list(node.counts)}
    return {"feature": node.feature,
            "threshold": node.threshold,
            "left_categories": (sorted(node.left_categories)
                                if node.left_categories is not None else None),
            "left": _node_to_dict(node.left),
            "right": _node_to_dict(node.right)}


def _node_from_dict(doc: dict) -> TreeNode:
    if "counts" in doc:
        return TreeNode(counts=tuple(doc["counts"]))
    cats = doc.get("left_categories")
    return TreeNode(feature=doc["feature"], threshold=doc["threshold"],
                    left_categories=frozenset(cats) if cats is not None else None,
                    left=_node_from_dict(doc["left"]),
                    right=_node_from_dict(doc["right"]))


def model_to_dict(model) -> dict:
    base = {"schema_hash": model.schema_hash,
            "schema": model.schema.to_json_dict()}
    if isinstance(model, LogisticModel):
        return {**base, "kind": "logistic",
                "weights": model.weights.tolist(), "bias": model.bias,
                "mean": model.mean.tolist(), "sd": model.sd.tolist(),
                "l2": model.l2, "converged": model.converged,
                "n_iter": model.n_iter}
    if isinstance(model, NaiveBayesModel):
        return {**base, "kind": "naive_bayes",
                "priors": model.priors.tolist(),
                "cont_mean": [[None if math.isnan(v) else v for v in row]
                              for row in model.cont_mean],
                "cont_var": [[None if math.isnan(v) else v for v in row]
                             for row in model.cont_var],
                "cat_prob": {str(j): t.tolist()
                             for j, t in sorted(model.cat_prob.items())},
                "alpha": model.alpha, "var_floor": model.var_floor}
    if isinstance(model, TreeModel):
        return {**base, "kind": "tree", "root": _node_to_dict(model.root),
                "params": {"max_depth": model.params.max_depth,
                           "min_samples_leaf": model.params.min_samples_leaf,
                           "min_samples_split": model.params.min_samples_split}}
    if isinstance(model, ForestModel):
        return {**base, "kind": "forest",
                "trees": [_node_to_dict(t.root) for t in model.trees],
                "params": {"seed": model.params.seed,
                           "n_trees": model.params.n_trees,
                           "max_depth": model.params.max_depth,
                           "min_samples_leaf": model.params.min_samples_leaf,
                           "min_samples_split": model.params.min_samples_split,
                           "mtry": model.params.mtry}}
    if isinstance(model, EnsembleModel):
        return {**base, "kind": "ensemble", "rule": model.rule,
                "threshold": model.threshold,
                "members": [model_to_dict(m) for m in model.members]}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    schema = Schema.from_json_dict(doc["schema"])
    sh = doc["schema_hash"]
    if sh != schema_hash(schema):
        raise ValueError("model file is corrupt: schema hash mismatch")
    kind = doc["kind"]
    if kind == "logistic":
        return LogisticModel(schema_hash=sh,
                             encoding=Encoding.from_schema(schema),
                             weights=np.array(doc["weights"]),
                             bias=float(doc["bias"]),
                             mean=np.array(doc["mean"]),
                             sd=np.array(doc["sd"]), l2=float(doc["l2"]),
                             converged=bool(doc["converged"]),
                             n_iter=int(doc["n_iter"]))
    if kind == "naive_bayes":
        to_arr = lambda rows: np.array([[np.nan if v is None else v
                                         for v in row] for row in rows])
        return NaiveBayesModel(schema_hash=sh, schema=schema,
                               priors=np.array(doc["priors"]),
                               cont_mean=to_arr(doc["cont_mean"]),
                               cont_var=to_arr(doc["cont_var"]),
                               cat_prob={int(j): np.array(t) for j, t in
                                         doc["cat_prob"].items()},
                               alpha=float(doc["alpha"]),
                               var_floor=float(doc["var_floor"]))
    if kind == "tree":
        p = doc["params"]
        return TreeModel(schema_hash=sh, schema=schema,
                         root=_node_from_dict(doc["root"]),
                         params=TreeParams(**p))
    if kind == "forest":
        p = doc["params"]
        params = ForestParams(**p)
        tp = TreeParams(max_depth=p["max_depth"],
                        min_samples_leaf=p["min_samples_leaf"],
                        min_samples_split=p["min_samples_split"])
        trees = tuple(TreeModel(schema_hash=sh, schema=schema,
                                root=_node_from_dict(t), params=tp)
                      for t in doc["trees"])
        return ForestModel(schema_hash=sh, schema=schema, trees=trees,
                           params=params)
    if kind == "ensemble":
        return EnsembleModel(schema_hash=sh, schema=schema,
                             members=tuple(model_from_dict(m)
                                           for m in doc["members"]),
                             rule=doc["rule"], threshold=float(doc["threshold"]))
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: str | Path, meta: dict | None = None) -> None:
    doc = {"format": "varisk-model", "version": 1,
           "model": model_to_dict(model), "meta": meta or {}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path: str | Path) -> tuple[object, dict]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "varisk-model":
        raise ValueError(f"{path}: not a varisk model file")
    if doc.get("version") != 1:
        raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
    return model_from_dict(doc["model"]), doc.get("meta", {})
