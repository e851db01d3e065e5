import numpy as np
import pytest

from varisk.core_data import Continuous, Dataset, Nominal, Schema


def make_schema(n_cont=2, n_nom=1, categories=("no", "yes")):
    feats = [(f"c{i}", Continuous()) for i in range(n_cont)]
    feats += [(f"m{i}", Nominal(categories)) for i in range(n_nom)]
    return Schema(features=tuple(feats))


def make_dataset(X, y, schema=None):
    X = np.asarray(X, dtype=np.float64)
    if schema is None:
        schema = Schema(features=tuple((f"c{i}", Continuous())
                                       for i in range(X.shape[1])))
    return Dataset.from_arrays(schema, X, np.asarray(y))


def random_labeled_dataset(rng, n=40, n_cont=3, n_nom=2, missing_rate=0.0):
    """Mixed-type dataset with both classes present."""
    schema = make_schema(n_cont, n_nom)
    p = schema.n_features
    X = np.empty((n, p))
    X[:, :n_cont] = rng.standard_normal((n, n_cont))
    X[:, n_cont:] = rng.integers(0, 2, size=(n, n_nom))
    if missing_rate > 0:
        mask = rng.random((n, p)) < missing_rate
        X = np.where(mask, np.nan, X)
    y = rng.integers(0, 2, size=n).astype(np.int8)
    y[0], y[1] = 0, 1  # both classes guaranteed
    return Dataset.from_arrays(schema, X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
