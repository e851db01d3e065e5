import math

import numpy as np
import pytest

from varisk.classifiers import (
    Encoding,
    EnsembleModel,
    ForestParams,
    LogisticModel,
    TreeParams,
    classify,
    fit_ensemble,
    fit_forest,
    fit_logistic,
    fit_model,
    fit_naive_bayes,
    fit_tree,
    load_model,
    logistic_objective,
    model_from_dict,
    model_to_dict,
    predict_proba,
    save_model,
)
from varisk.core_data import Dataset, FeatureVector, Nominal, Schema, schema_hash

from conftest import make_dataset, make_schema, random_labeled_dataset


def continuous_1d(values, labels):
    return make_dataset(np.asarray(values, float).reshape(-1, 1), labels)


class TestLogistic:
    def test_separable_data_finite_weights_perfect_accuracy(self):
        d = continuous_1d([-3, -2, -1, 1, 2, 3], [0, 0, 0, 1, 1, 1])
        model = fit_logistic(d, l2=1.0)
        assert np.isfinite(model.weights).all()
        preds = classify(model, d)
        assert (preds == d.y).all()

    def test_gradient_matches_finite_differences(self, rng):
        for _ in range(5):
            d = random_labeled_dataset(rng, n=25, n_cont=2, n_nom=1)
            model = fit_logistic(d, l2=0.7)
            X = (model.encoding.encode_matrix(d.X) - model.mean) / model.sd
            y = d.y.astype(float)
            w, b = model.weights, model.bias
            _, gw, gb = logistic_objective(w, b, X, y, 0.7)
            eps = 1e-5
            fd = np.empty(len(w) + 1)
            for j in range(len(w)):
                e = np.zeros_like(w)
                e[j] = eps
                up, _, _ = logistic_objective(w + e, b, X, y, 0.7)
                dn, _, _ = logistic_objective(w - e, b, X, y, 0.7)
                fd[j] = (up - dn) / (2 * eps)
            up, _, _ = logistic_objective(w, b + eps, X, y, 0.7)
            dn, _, _ = logistic_objective(w, b - eps, X, y, 0.7)
            fd[-1] = (up - dn) / (2 * eps)
            assert np.abs(np.append(gw, gb) - fd).max() <= 1e-4

    def test_noise_features_give_near_half_probabilities(self, rng):
        means = []
        for _ in range(5):
            d = random_labeled_dataset(rng, n=200, n_cont=3, n_nom=0)
            model = fit_logistic(d)
            means.append(float(predict_proba(model, d).mean()))
        assert abs(np.mean(means) - 0.5) < 0.05

    def test_affine_rescaling_leaves_predictions_unchanged(self, rng):
        d = random_labeled_dataset(rng, n=60, n_cont=2, n_nom=1)
        base = fit_logistic(d)
        X2 = d.X.copy()
        X2[:, 0] = 100.0 * X2[:, 0] + 5.0
        X2[:, 1] = 0.01 * X2[:, 1] - 9.0
        d2 = Dataset.from_arrays(d.schema, X2, d.y)
        moved = fit_logistic(d2)
        assert np.allclose(predict_proba(base, d), predict_proba(moved, d2),
                           atol=1e-6)

    def test_convergence_flag_set(self, rng):
        d = random_labeled_dataset(rng, n=50)
        assert fit_logistic(d).converged

    def test_single_class_rejected(self):
        d = continuous_1d([1, 2, 3], [1, 1, 1])
        with pytest.raises(ValueError, match="single-class"):
            fit_logistic(d)

    def test_zero_model_gives_half(self):
        schema = make_schema(1, 0)
        enc = Encoding.from_schema(schema)
        model = LogisticModel(schema_hash=schema_hash(schema), encoding=enc,
                              weights=np.zeros(1), bias=0.0,
                              mean=np.zeros(1), sd=np.ones(1), l2=1.0,
                              converged=True, n_iter=0)
        assert predict_proba(model, FeatureVector(values=(123.4,))) == 0.5

    def test_unit_weight_log_three(self):
        schema = make_schema(1, 0)
        enc = Encoding.from_schema(schema)
        model = LogisticModel(schema_hash=schema_hash(schema), encoding=enc,
                              weights=np.ones(1), bias=0.0,
                              mean=np.zeros(1), sd=np.ones(1), l2=1.0,
                              converged=True, n_iter=0)
        p = predict_proba(model, FeatureVector(values=(math.log(3.0),)))
        assert p == pytest.approx(0.75, abs=1e-12)


class TestNaiveBayes:
    def test_symmetric_classes_give_half(self):
        d = continuous_1d([1.0, 2.0, 1.0, 2.0], [0, 0, 1, 1])
        model = fit_naive_bayes(d)
        assert np.allclose(predict_proba(model, d), 0.5, atol=1e-12)

    def test_hand_computed_smoothed_posterior(self):
        schema = make_schema(n_cont=0, n_nom=1)
        codes = [1] * 8 + [0] * 2 + [1] * 2 + [0] * 8
        labels = [1] * 10 + [0] * 10
        d = Dataset.from_arrays(schema, np.array(codes, float).reshape(-1, 1),
                                labels)
        model = fit_naive_bayes(d, alpha=1.0)
        p = predict_proba(model, FeatureVector(values=(1,)))
        assert p == pytest.approx(0.75, abs=1e-12)

    def test_prior_recovery(self, rng):
        d = random_labeled_dataset(rng, n=711)
        y = np.zeros(711, dtype=np.int8)
        y[:61] = 1
        d = Dataset.from_arrays(d.schema, d.X, y)
        model = fit_naive_bayes(d)
        assert model.priors[1] == 61 / 711
        assert model.priors[0] == 650 / 711

    def test_duplication_invariance(self, rng):
        d = random_labeled_dataset(rng, n=40)
        doubled = Dataset.from_arrays(d.schema, np.vstack([d.X, d.X]),
                                      np.concatenate([d.y, d.y]))
        a = fit_naive_bayes(d)
        b = fit_naive_bayes(doubled)
        assert np.allclose(predict_proba(a, d), predict_proba(b, d),
                           atol=1e-9)

    def test_variance_floor_protects_constant_feature(self):
        d = make_dataset([[1.0, 0.0], [1.0, 1.0], [1.0, 0.5], [1.0, 0.2]],
                         [0, 1, 0, 1])
        model = fit_naive_bayes(d)
        p = predict_proba(model, d)
        assert np.isfinite(p).all()


class TestTrees:
    def test_pure_input_single_leaf(self):
        d = continuous_1d([1, 2, 3], [1, 1, 1])
        model = fit_tree(d)
        assert model.root.is_leaf
        assert predict_proba(model, d).tolist() == [1.0, 1.0, 1.0]

    def test_xor_needs_depth_two(self):
        schema = make_schema(n_cont=0, n_nom=2)
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 4, dtype=float)
        y = (X[:, 0].astype(int) ^ X[:, 1].astype(int)).astype(np.int8)
        d = Dataset.from_arrays(schema, X, y)

        # brute force: no single split separates XOR
        for j in (0, 1):
            for left in ({0}, {1}):
                mask = np.isin(X[:, j].astype(int), sorted(left))
                assert len(np.unique(y[mask])) > 1

        model = fit_tree(d)
        assert not model.root.is_leaf
        assert not (model.root.left.is_leaf and model.root.right.is_leaf)
        assert (classify(model, d) == y).all()

    def test_continuous_threshold_split(self):
        d = continuous_1d([1, 2, 3, 10, 11, 12], [0, 0, 0, 1, 1, 1])
        model = fit_tree(d)
        assert model.root.threshold == pytest.approx(6.5)
        assert (classify(model, d) == d.y).all()

    def test_max_depth_respected(self, rng):
        d = random_labeled_dataset(rng, n=60)
        model = fit_tree(d, TreeParams(max_depth=1))
        for child in (model.root.left, model.root.right):
            assert child is None or child.is_leaf


class TestForest:
    def test_single_tree_full_subset_no_bootstrap_equals_plain_tree(self, rng):
        d = random_labeled_dataset(rng, n=50)
        plain = fit_tree(d)
        forest = fit_forest(d, ForestParams(seed=0, n_trees=1,
                                            mtry=d.schema.n_features,
                                            bootstrap=False))
        assert np.array_equal(predict_proba(plain, d),
                              predict_proba(forest, d))

    def test_deterministic_under_seed(self, rng):
        d = random_labeled_dataset(rng, n=60)
        a = fit_forest(d, ForestParams(seed=5, n_trees=15))
        b = fit_forest(d, ForestParams(seed=5, n_trees=15))
        c = fit_forest(d, ForestParams(seed=6, n_trees=15))
        assert np.array_equal(predict_proba(a, d), predict_proba(b, d))
        assert not np.array_equal(predict_proba(a, d), predict_proba(c, d))

    def test_prediction_invariant_to_tree_order(self, rng):
        d = random_labeled_dataset(rng, n=40)
        forest = fit_forest(d, ForestParams(seed=2, n_trees=9))
        shuffled = type(forest)(schema_hash=forest.schema_hash,
                                schema=forest.schema,
                                trees=tuple(reversed(forest.trees)),
                                params=forest.params)
        assert np.array_equal(predict_proba(forest, d),
                              predict_proba(shuffled, d))


class TestEnsemble:
    def _fixed_member(self, schema, proba):
        enc = Encoding.from_schema(schema)
        return LogisticModel(schema_hash=schema_hash(schema), encoding=enc,
                             weights=np.zeros(enc.dim),
                             bias=float(math.log(proba / (1 - proba))),
                             mean=np.zeros(enc.dim), sd=np.ones(enc.dim),
                             l2=1.0, converged=True, n_iter=0)

    def test_mean_probability_rule(self):
        schema = make_schema(1, 0)
        m1 = self._fixed_member(schema, 0.6)
        m2 = self._fixed_member(schema, 0.8)
        ens = EnsembleModel(schema_hash=schema_hash(schema), schema=schema,
                            members=(m1, m2))
        v = FeatureVector(values=(0.0,))
        p1, p2 = predict_proba(m1, v), predict_proba(m2, v)
        p = predict_proba(ens, v)
        assert p == (p1 + p2) / 2
        assert p == pytest.approx(0.7, abs=1e-12)

    def test_fit_ensemble_members(self, rng):
        d = random_labeled_dataset(rng, n=60)
        ens = fit_ensemble(d)
        assert len(ens.members) == 2
        probs = predict_proba(ens, d)
        member_mean = (predict_proba(ens.members[0], d)
                       + predict_proba(ens.members[1], d)) / 2
        assert np.array_equal(probs, member_mean)

    def test_empty_members_rejected(self):
        schema = make_schema(1, 0)
        with pytest.raises(ValueError):
            EnsembleModel(schema_hash=schema_hash(schema), schema=schema,
                          members=())


class TestClassify:
    def test_threshold_convention(self):
        schema = make_schema(1, 0)
        enc = Encoding.from_schema(schema)

        def fixed(p):
            return LogisticModel(schema_hash=schema_hash(schema),
                                 encoding=enc, weights=np.zeros(1),
                                 bias=math.log(p / (1 - p)),
                                 mean=np.zeros(1), sd=np.ones(1), l2=1.0,
                                 converged=True, n_iter=0)

        v = FeatureVector(values=(0.0,))
        assert classify(fixed(0.95), v) == 1
        assert classify(fixed(0.45), v) == 0
        assert classify(fixed(0.5), v) == 1  # >= rule at the boundary

    def test_probability_bounds_property(self, rng):
        d = random_labeled_dataset(rng, n=50)
        for name in ("baseline-lr", "baseline-nb", "baseline-tree",
                     "baseline-forest", "ensemble"):
            model = fit_model(name, d, seed=3)
            p = predict_proba(model, d)
            assert ((p >= 0.0) & (p <= 1.0)).all()

    def test_missing_cell_rejected(self, rng):
        d = random_labeled_dataset(rng, n=30)
        model = fit_logistic(d)
        bad = FeatureVector(values=(None,) * d.schema.n_features)
        with pytest.raises(ValueError, match="missing"):
            predict_proba(model, bad)

    def test_schema_mismatch_rejected(self, rng):
        d = random_labeled_dataset(rng, n=30)
        other = random_labeled_dataset(rng, n=10, n_cont=1, n_nom=0)
        model = fit_logistic(d)
        with pytest.raises(ValueError, match="schema"):
            predict_proba(model, other)


class TestPersistence:
    @pytest.mark.parametrize("name", ["baseline-lr", "baseline-nb",
                                      "baseline-tree", "baseline-forest",
                                      "ensemble"])
    def test_round_trip_preserves_predictions(self, rng, tmp_path, name):
        d = random_labeled_dataset(rng, n=45)
        model = fit_model(name, d, seed=11)
        save_model(model, tmp_path / "m.json", meta={"seed": 11})
        loaded, meta = load_model(tmp_path / "m.json")
        assert meta["seed"] == 11
        assert np.allclose(predict_proba(model, d), predict_proba(loaded, d),
                           atol=0, rtol=0)

    def test_corrupt_hash_rejected(self, rng, tmp_path):
        d = random_labeled_dataset(rng, n=20)
        doc = model_to_dict(fit_logistic(d))
        doc["schema_hash"] = "0" * 64
        with pytest.raises(ValueError, match="hash"):
            model_from_dict(doc)

    def test_non_model_file_rejected(self, tmp_path):
        (tmp_path / "x.json").write_text("{}", encoding="utf-8")
        with pytest.raises(ValueError, match="not a varisk model"):
            load_model(tmp_path / "x.json")
