"""Classifier correctness against independent oracles."""

import math

import numpy as np
import pytest

from eldiff.consensus import Label
from eldiff.errors import CorruptModelError, UnsupportedVersionError
from eldiff.learn.dataset import Dataset
from eldiff.learn.models import (
    RandomForestModel,
    _Node,
    load_model,
    predict,
    save_model,
    softmax_loss_and_grads,
    train,
)


def make_dataset(x, y, categories=None, columns=None):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    columns = tuple(columns) if columns else tuple(f"f{i}" for i in range(x.shape[1]))
    return Dataset(columns, x, y, categories or {})


# --- independent oracles -----------------------------------------------------


def oracle_entropy(labels) -> float:
    labels = np.asarray(labels)
    n = labels.shape[0]
    acc = 0.0
    for c in range(3):
        count = int(np.sum(labels == c))
        if count:
            p = count / n
            acc += p * math.log2(p)
    return -acc


def oracle_best_split(x, y):
    """Exhaustive enumeration of every (feature, midpoint) split."""
    n, n_features = x.shape
    parent = oracle_entropy(y)
    best = None
    for f in range(n_features):
        values = sorted(set(x[:, f]))
        for lo, hi in zip(values, values[1:]):
            threshold = (lo + hi) / 2
            left = y[x[:, f] <= threshold]
            right = y[x[:, f] > threshold]
            gain = parent - (len(left) / n) * oracle_entropy(left) - (len(right) / n) * oracle_entropy(right)
            if best is None or gain > best[0]:
                best = (gain, f, threshold)
    return best


# --- Gaussian naive Bayes ----------------------------------------------------


class TestGaussianNB:
    def test_posterior_matches_closed_form(self):
        # 4 rows, 1 feature, classes HARD and EASY; hand-computable Gaussians
        x = [[1.0], [2.0], [5.0], [7.0]]
        y = [0, 0, 2, 2]
        model = train(make_dataset(x, y), "gaussian_nb")
        query = 2.5

        # hand computation: priors 1/2; HARD mean 1.5 var 0.25; EASY mean 6 var 1
        def pdf(v, mean, var):
            return math.exp(-((v - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)

        hard = 0.5 * pdf(query, 1.5, 0.25)
        easy = 0.5 * pdf(query, 6.0, 1.0)
        expected = np.array([hard / (hard + easy), 0.0, easy / (hard + easy)])
        probs = model.predict_proba(np.array([[query]]))[0]
        np.testing.assert_allclose(probs, expected, atol=1e-9)

    def test_categorical_smoothing_by_hand(self):
        # one categorical feature with 2 categories; add-one smoothing
        x = [[0.0], [1.0], [0.0]]
        y = [0, 0, 2]
        ds = make_dataset(x, y, categories={"f0": ("A", "B")})
        model = train(ds, "gaussian_nb")
        # P(H)=2/3, P(E)=1/3; P(A|H)=(1+1)/(2+2)=1/2; P(A|E)=(1+1)/(1+2)=2/3
        hard = (2 / 3) * (1 / 2)
        easy = (1 / 3) * (2 / 3)
        expected = np.array([hard, 0.0, easy]) / (hard + easy)
        probs = model.predict_proba(np.array([[0.0]]))[0]
        np.testing.assert_allclose(probs, expected, atol=1e-12)

    def test_unseen_category_gets_smoothed_mass(self):
        ds = make_dataset([[0.0], [1.0], [0.0]], [0, 0, 2], categories={"f0": ("A", "B")})
        model = train(ds, "gaussian_nb")
        probs = model.predict_proba(np.array([[-1.0]]))[0]
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(probs >= 0)

    def test_zero_variance_floored(self):
        ds = make_dataset([[3.0], [3.0], [4.0], [4.0]], [0, 0, 2, 2])
        model = train(ds, "gaussian_nb")
        assert np.all(model.variances > 0)


# --- logistic regression -----------------------------------------------------


class TestLogisticRegression:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        h = 1e-6
        for _ in range(20):
            n, d = int(rng.integers(4, 10)), int(rng.integers(2, 5))
            x = rng.normal(size=(n, d))
            y = rng.integers(0, 3, size=n)
            y_onehot = np.zeros((n, 3))
            y_onehot[np.arange(n), y] = 1.0
            weights = rng.normal(size=(3, d))
            bias = rng.normal(size=3)
            _, grad_w, grad_b = softmax_loss_and_grads(weights, bias, x, y_onehot, 1e-8)
            for index in np.ndindex(weights.shape):
                bump = np.zeros_like(weights)
                bump[index] = h
                hi = softmax_loss_and_grads(weights + bump, bias, x, y_onehot, 1e-8)[0]
                lo = softmax_loss_and_grads(weights - bump, bias, x, y_onehot, 1e-8)[0]
                numeric = (hi - lo) / (2 * h)
                assert abs(numeric - grad_w[index]) <= 1e-5 * max(1.0, abs(numeric))
            for i in range(3):
                bump = np.zeros(3)
                bump[i] = h
                hi = softmax_loss_and_grads(weights, bias + bump, x, y_onehot, 1e-8)[0]
                lo = softmax_loss_and_grads(weights, bias - bump, x, y_onehot, 1e-8)[0]
                numeric = (hi - lo) / (2 * h)
                assert abs(numeric - grad_b[i]) <= 1e-5 * max(1.0, abs(numeric))

    def test_separable_blobs_learned(self):
        rng = np.random.default_rng(3)
        centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
        x = np.vstack([rng.normal(c, 0.3, size=(30, 2)) for c in centers])
        y = np.repeat([0, 1, 2], 30)
        model = train(make_dataset(x, y), "logistic_regression")
        accuracy = float(np.mean(model.predict_codes(x) == y))
        assert accuracy >= 0.95

    def test_one_hot_for_categorical(self):
        x = [[0.0], [1.0], [0.0], [1.0]]
        y = [0, 2, 0, 2]
        ds = make_dataset(x, y, categories={"f0": ("A", "B")})
        model = train(ds, "logistic_regression")
        assert model.predict_codes(np.array([[0.0], [1.0]])).tolist() == [0, 2]


# --- decision tree -----------------------------------------------------------


class TestDecisionTree:
    def test_xor_learned_exactly(self):
        base_x = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        base_y = [2, 0, 0, 2]
        x = np.array(base_x * 10)
        y = np.array(base_y * 10)
        model = train(make_dataset(x, y), "decision_tree")
        assert np.array_equal(model.predict_codes(x), y)

    def test_first_split_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            n = int(rng.integers(8, 65))
            n_features = int(rng.integers(2, 5))
            x = rng.integers(0, 2, size=(n, n_features)).astype(np.float64)
            y = rng.integers(0, 3, size=n)
            if len(set(y.tolist())) < 2:
                continue
            model = train(make_dataset(x, y), "decision_tree")
            expected = oracle_best_split(x, y)
            if expected is None:
                assert model.root.is_leaf
                continue
            assert model.root.feature == expected[1]
            assert model.root.threshold == expected[2]

    def test_categorical_single_category_split(self):
        x = [[0.0], [1.0], [2.0], [1.0]]
        y = [0, 2, 0, 2]
        ds = make_dataset(x, y, categories={"f0": ("A", "B", "C")})
        model = train(ds, "decision_tree")
        assert model.root.category == 1
        # unseen category routes to the not-equal branch
        probs = model.predict_proba(np.array([[-1.0]]))[0]
        assert probs[0] == 1.0

    def test_pure_leaf_probability_one(self):
        model = train(make_dataset([[0.0], [0.0], [1.0], [1.0]], [0, 0, 2, 2]), "decision_tree")
        np.testing.assert_array_equal(model.predict_proba(np.array([[0.0]]))[0], [1.0, 0.0, 0.0])

    def test_constant_feature_yields_leaf(self):
        model = train(make_dataset([[5.0], [5.0], [5.0]], [0, 2, 2]), "decision_tree")
        assert model.root.is_leaf


# --- random forest -----------------------------------------------------------


class TestRandomForest:
    def test_single_tree_no_bootstrap_equals_decision_tree(self):
        rng = np.random.default_rng(31)
        x = rng.normal(size=(60, 4))
        y = rng.integers(0, 3, size=60)
        ds = make_dataset(x, y)
        tree = train(ds, "decision_tree")
        forest = train(ds, "random_forest", n_trees=1, max_features=4, bootstrap=False)
        query = rng.normal(size=(20, 4))
        np.testing.assert_array_equal(tree.predict_proba(query), forest.predict_proba(query))

    def test_forest_averaging_and_tie_break(self):
        model = RandomForestModel(("f0",), {}, n_trees=2)
        model.cat_sizes = {}
        model.trees = [
            _Node(counts=np.array([1.0, 0.0, 0.0])),
            _Node(counts=np.array([0.0, 1.0, 0.0])),
        ]
        label, probs = predict(model, np.array([0.0]))
        np.testing.assert_allclose(probs, [0.5, 0.5, 0.0])
        assert label is Label.HARD

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, size=40)
        ds = make_dataset(x, y)
        a = train(ds, "random_forest", seed=9, n_trees=8)
        b = train(ds, "random_forest", seed=9, n_trees=8)
        query = rng.normal(size=(10, 3))
        np.testing.assert_array_equal(a.predict_proba(query), b.predict_proba(query))

    def test_thread_count_does_not_change_results(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, size=40)
        ds = make_dataset(x, y)
        serial = train(ds, "random_forest", seed=4, n_trees=8, threads=1)
        threaded = train(ds, "random_forest", seed=4, n_trees=8, threads=4)
        query = rng.normal(size=(10, 3))
        np.testing.assert_array_equal(serial.predict_proba(query), threaded.predict_proba(query))


# --- shared contracts --------------------------------------------------------


VARIANT_NAMES = ("gaussian_nb", "logistic_regression", "decision_tree", "random_forest")


class TestSharedContracts:
    @pytest.fixture
    def dataset(self):
        rng = np.random.default_rng(11)
        x = np.hstack([rng.normal(size=(45, 2)), rng.integers(0, 3, size=(45, 1)).astype(float)])
        y = np.repeat([0, 1, 2], 15)
        return make_dataset(x, y, categories={"f2": ("A", "B", "C")})

    @pytest.mark.parametrize("variant", VARIANT_NAMES)
    def test_probability_vectors_valid(self, dataset, variant):
        kwargs = {"n_trees": 5} if variant == "random_forest" else {}
        model = train(dataset, variant, seed=1, **kwargs)
        probs = model.predict_proba(dataset.x)
        assert np.all(probs >= 0)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("variant", VARIANT_NAMES)
    def test_save_load_roundtrip(self, dataset, variant, tmp_path):
        kwargs = {"n_trees": 5} if variant == "random_forest" else {}
        model = train(dataset, variant, seed=1, **kwargs)
        path = tmp_path / "model.json"
        save_model(model, path)
        again = load_model(path)
        rng = np.random.default_rng(2)
        query = np.hstack([rng.normal(size=(100, 2)),
                           rng.integers(0, 3, size=(100, 1)).astype(float)])
        np.testing.assert_allclose(model.predict_proba(query), again.predict_proba(query),
                                   atol=1e-12)
        assert np.array_equal(model.predict_codes(query), again.predict_codes(query))

    def test_truncated_file_is_corrupt(self, dataset, tmp_path):
        model = train(dataset, "gaussian_nb")
        path = tmp_path / "model.json"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[:40])
        with pytest.raises(CorruptModelError):
            load_model(path)

    def test_unknown_version_rejected(self, dataset, tmp_path):
        model = train(dataset, "gaussian_nb")
        path = tmp_path / "model.json"
        save_model(model, path)
        payload = path.read_text(encoding="utf-8").replace('"version": 1', '"version": 99')
        path.write_text(payload, encoding="utf-8")
        with pytest.raises(UnsupportedVersionError):
            load_model(path)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            train(make_dataset([[1.0], [2.0]], [0, 0]), "gaussian_nb")

    def test_nan_features_rejected(self):
        with pytest.raises(ValueError):
            train(make_dataset([[1.0], [np.nan]], [0, 2]), "gaussian_nb")

    def test_predict_tie_breaks_hard_first(self):
        model = RandomForestModel(("f0",), {}, n_trees=1)
        model.cat_sizes = {}
        model.trees = [_Node(counts=np.array([2.0, 2.0, 1.0]))]
        label, probs = predict(model, np.array([0.0]))
        np.testing.assert_allclose(probs, [0.4, 0.4, 0.2])
        assert label is Label.HARD

    def test_schema_mismatch_rejected(self, dataset):
        model = train(dataset, "gaussian_nb")
        with pytest.raises(ValueError):
            model.predict_proba(np.zeros((2, 5)))
