"""The four difficulty classifiers, built from first principles.

Every model predicts a probability vector over (HARD, MEDIUM, EASY) that
sums to 1; argmax ties resolve to the earlier class in that order. Trees
split on information gain (entropy, base 2) with midpoint thresholds for
continuous features and single-category-vs-rest splits for categorical
ones; the forest draws a bootstrap sample and floor(log2(F))+1 candidate
features per split, with one RNG stream per tree derived from the seed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..consensus import CLASS_ORDER, Label
from ..errors import CorruptModelError, UnsupportedVersionError
from ..features import FeatureTable, FeatureVector
from ..rand import derive_seed
from .dataset import Dataset, N_CLASSES, encode_table

VARIANTS = ("gaussian_nb", "logistic_regression", "decision_tree", "random_forest")

_MODEL_FORMAT = "eldiff-classifier"
_MODEL_VERSION = 1
_VARIANCE_FLOOR = 1e-9


def _entropy(counts) -> np.ndarray:
    """Shannon entropy in bits of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=-1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    p = counts / safe
    logs = np.zeros_like(p)
    np.log2(p, out=logs, where=p > 0)
    return -(p * logs).sum(axis=-1)


class _Model:
    """Shared encode/predict plumbing; subclasses implement predict_proba."""

    variant: str = ""

    def __init__(self, columns: Sequence[str], categories: Mapping[str, tuple[str, ...]]):
        self.columns = tuple(columns)
        self.categories = {k: tuple(v) for k, v in categories.items()}

    def encode(self, table: FeatureTable) -> np.ndarray:
        return encode_table(table, self.columns, self.categories)

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != len(self.columns):
            raise ValueError(
                f"row has {x.shape[1]} features but the model expects {len(self.columns)}"
            )
        if np.isnan(x).any():
            raise ValueError("NaN feature value; impute missing values before predicting")
        return x

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_codes(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1)

    def predict_table(self, table: FeatureTable) -> list[tuple[Label, np.ndarray]]:
        probs = self.predict_proba(self.encode(table))
        return [(CLASS_ORDER[int(np.argmax(p))], p) for p in probs]


def predict(model: _Model, row) -> tuple[Label, np.ndarray]:
    """Label and class-probability vector for one row (encoded array or
    FeatureVector); ties go to the earlier class in (HARD, MEDIUM, EASY)."""
    if isinstance(row, FeatureVector):
        x = model.encode(FeatureTable([row]))
    else:
        x = np.asarray(row, dtype=np.float64)
    probs = model.predict_proba(model._check(x))[0]
    return CLASS_ORDER[int(np.argmax(probs))], probs


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


class GaussianNBModel(_Model):
    variant = "gaussian_nb"

    def fit(self, dataset: Dataset) -> "GaussianNBModel":
        x, y = dataset.x, dataset.y
        n = len(dataset)
        counts = dataset.class_counts().astype(np.float64)
        self.class_counts = counts
        self.priors = counts / n
        cat_sizes = dataset.cat_sizes()
        self.cont_idx = [j for j in range(x.shape[1]) if j not in cat_sizes]
        self.means = np.zeros((N_CLASSES, len(self.cont_idx)))
        self.variances = np.ones((N_CLASSES, len(self.cont_idx)))
        self.cat_probs: dict[int, np.ndarray] = {}
        self.cat_unseen: dict[int, np.ndarray] = {}
        for c in range(N_CLASSES):
            if counts[c] == 0:
                continue
            rows = x[y == c]
            if self.cont_idx:
                cont = rows[:, self.cont_idx]
                self.means[c] = cont.mean(axis=0)
                self.variances[c] = np.maximum(cont.var(axis=0), _VARIANCE_FLOOR)
        for j, k in cat_sizes.items():
            probs = np.zeros((N_CLASSES, k))
            unseen = np.zeros(N_CLASSES)
            for c in range(N_CLASSES):
                if counts[c] == 0:
                    continue
                codes = x[y == c, j].astype(np.int64)
                freq = np.bincount(codes[codes >= 0], minlength=k).astype(np.float64)
                probs[c] = (freq + 1.0) / (counts[c] + k)
                unseen[c] = 1.0 / (counts[c] + k)
            self.cat_probs[j] = probs
            self.cat_unseen[j] = unseen
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        log_post = np.full((x.shape[0], N_CLASSES), -np.inf)
        for c in range(N_CLASSES):
            if self.priors[c] == 0:
                continue
            lp = np.full(x.shape[0], math.log(self.priors[c]))
            if self.cont_idx:
                cont = x[:, self.cont_idx]
                var = self.variances[c]
                lp += (
                    -0.5 * np.log(2.0 * math.pi * var)
                    - (cont - self.means[c]) ** 2 / (2.0 * var)
                ).sum(axis=1)
            for j, probs in self.cat_probs.items():
                codes = x[:, j].astype(np.int64)
                # index -1 picks the appended unseen-category probability
                extended = np.append(probs[c], self.cat_unseen[j][c])
                lp += np.log(extended[codes])
            log_post[:, c] = lp
        log_post -= log_post.max(axis=1, keepdims=True)
        p = np.exp(log_post)
        return p / p.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Multinomial logistic regression


def softmax_loss_and_grads(weights, bias, x, y_onehot, l2):
    """Mean softmax cross-entropy with an L2 penalty on the weights only.

    Returns (loss, grad_weights, grad_bias); kept as a pure function so the
    finite-difference check exercises exactly the training gradient.
    """
    logits = x @ weights.T + bias
    logits = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(logits).sum(axis=1, keepdims=True))
    log_p = logits - log_norm
    n = x.shape[0]
    loss = -(y_onehot * log_p).sum() / n + 0.5 * l2 * (weights ** 2).sum()
    residual = (np.exp(log_p) - y_onehot) / n
    grad_w = residual.T @ x + l2 * weights
    grad_b = residual.sum(axis=0)
    return loss, grad_w, grad_b


class LogisticRegressionModel(_Model):
    variant = "logistic_regression"

    def __init__(self, columns, categories, l2: float = 1e-8,
                 learning_rate: float = 0.5, max_iter: int = 1000, tol: float = 1e-6):
        super().__init__(columns, categories)
        self.l2 = l2
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol

    def _design(self, x: np.ndarray) -> np.ndarray:
        """Standardized continuous columns followed by one-hot categorical
        blocks; unseen categories (code -1) one-hot to all zeros."""
        blocks = []
        if self.cont_idx:
            blocks.append((x[:, self.cont_idx] - self.mu) / self.sigma)
        for j, k in self.cat_layout:
            codes = x[:, j].astype(np.int64)
            onehot = np.zeros((x.shape[0], k))
            valid = codes >= 0
            onehot[np.nonzero(valid)[0], codes[valid]] = 1.0
            blocks.append(onehot)
        return np.hstack(blocks) if blocks else np.zeros((x.shape[0], 0))

    def fit(self, dataset: Dataset) -> "LogisticRegressionModel":
        x, y = dataset.x, dataset.y
        cat_sizes = dataset.cat_sizes()
        self.cont_idx = [j for j in range(x.shape[1]) if j not in cat_sizes]
        self.cat_layout = sorted(cat_sizes.items())
        cont = x[:, self.cont_idx]
        self.mu = cont.mean(axis=0) if self.cont_idx else np.zeros(0)
        sigma = cont.std(axis=0) if self.cont_idx else np.zeros(0)
        self.sigma = np.where(sigma > 0, sigma, 1.0)
        design = self._design(x)
        y_onehot = np.zeros((len(y), N_CLASSES))
        y_onehot[np.arange(len(y)), y] = 1.0
        self.weights = np.zeros((N_CLASSES, design.shape[1]))
        self.bias = np.zeros(N_CLASSES)
        lr = self.learning_rate
        loss, grad_w, grad_b = softmax_loss_and_grads(self.weights, self.bias, design, y_onehot, self.l2)
        for _ in range(self.max_iter):
            grad_norm = math.sqrt((grad_w ** 2).sum() + (grad_b ** 2).sum())
            if grad_norm < self.tol or lr < 1e-15:
                break
            new_w = self.weights - lr * grad_w
            new_b = self.bias - lr * grad_b
            new_loss, new_gw, new_gb = softmax_loss_and_grads(new_w, new_b, design, y_onehot, self.l2)
            if new_loss > loss:
                lr *= 0.5
                continue
            self.weights, self.bias = new_w, new_b
            loss, grad_w, grad_b = new_loss, new_gw, new_gb
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        logits = self._design(x) @ self.weights.T + self.bias
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Decision tree


@dataclass
class _Node:
    counts: np.ndarray
    feature: int | None = None
    threshold: float | None = None
    category: int | None = None
    gain: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _best_numeric_split(col, y_sub, parent_h):
    order = np.argsort(col, kind="stable")
    xs = col[order]
    n = xs.shape[0]
    onehot = np.zeros((n, N_CLASSES))
    onehot[np.arange(n), y_sub[order]] = 1.0
    prefix = np.cumsum(onehot, axis=0)
    cuts = np.nonzero(xs[1:] != xs[:-1])[0]
    if cuts.size == 0:
        return None
    left = prefix[cuts]
    right = prefix[-1] - left
    n_left = (cuts + 1).astype(np.float64)
    n_right = n - n_left
    entropies = _entropy(np.stack([left, right]))
    gains = parent_h - (n_left / n) * entropies[0] - (n_right / n) * entropies[1]
    best = int(np.argmax(gains))
    threshold = (xs[cuts[best]] + xs[cuts[best] + 1]) / 2.0
    return float(gains[best]), float(threshold)


def _best_categorical_split(col, y_sub, parent_h, n_categories):
    n = float(col.shape[0])
    best = None
    for code in range(n_categories):
        mask = col == code
        n_left = float(mask.sum())
        if n_left == 0 or n_left == n:
            continue
        left = np.bincount(y_sub[mask], minlength=N_CLASSES)
        right = np.bincount(y_sub[~mask], minlength=N_CLASSES)
        gain = parent_h - (n_left / n) * float(_entropy(left)) - ((n - n_left) / n) * float(_entropy(right))
        if best is None or gain > best[0]:
            best = (gain, code)
    return best


def _grow_tree(x, y, cat_sizes, rng=None, max_features=None):
    # Splits proceed while the node is impure and any usable candidate
    # exists, even at zero gain (parity splits like XOR have zero root gain
    # but become separable one level down). Children are always strictly
    # smaller, so growth terminates. Iterative to keep deep trees off the
    # Python recursion limit.
    n_features = x.shape[1]

    def new_node(rows: np.ndarray) -> _Node:
        return _Node(counts=np.bincount(y[rows], minlength=N_CLASSES).astype(np.float64))

    root_rows = np.arange(x.shape[0])
    root = new_node(root_rows)
    stack = [(root, root_rows)]
    while stack:
        node, rows = stack.pop()
        if rows.shape[0] < 2 or np.count_nonzero(node.counts) <= 1:
            continue
        y_sub = y[rows]
        parent_h = float(_entropy(node.counts))
        if max_features is not None and rng is not None and max_features < n_features:
            features = np.sort(rng.choice(n_features, size=max_features, replace=False))
        else:
            features = np.arange(n_features)
        best = None  # (gain, feature, threshold, category)
        for f in features:
            col = x[rows, f]
            if int(f) in cat_sizes:
                found = _best_categorical_split(col, y_sub, parent_h, cat_sizes[int(f)])
                if found is not None and (best is None or found[0] > best[0]):
                    best = (found[0], int(f), None, found[1])
            else:
                found = _best_numeric_split(col, y_sub, parent_h)
                if found is not None and (best is None or found[0] > best[0]):
                    best = (found[0], int(f), found[1], None)
        if best is None:
            continue
        gain, feature, threshold, category = best
        col = x[rows, feature]
        mask = (col == category) if threshold is None else (col <= threshold)
        node.feature, node.threshold, node.category = feature, threshold, category
        node.gain = max(gain, 0.0)
        node.left = new_node(rows[mask])
        node.right = new_node(rows[~mask])
        stack.append((node.left, rows[mask]))
        stack.append((node.right, rows[~mask]))
    return root


def _tree_probabilities(root: _Node, x: np.ndarray, out: np.ndarray) -> None:
    """Add the leaf distribution of every row to ``out`` (rows routed in bulk)."""
    stack = [(root, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] += node.counts / node.counts.sum()
            continue
        col = x[idx, node.feature]
        mask = (col == node.category) if node.threshold is None else (col <= node.threshold)
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))


class DecisionTreeModel(_Model):
    variant = "decision_tree"

    def fit(self, dataset: Dataset) -> "DecisionTreeModel":
        self.cat_sizes = dataset.cat_sizes()
        self.root = _grow_tree(dataset.x, dataset.y, self.cat_sizes)
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        probs = np.zeros((x.shape[0], N_CLASSES))
        _tree_probabilities(self.root, x, probs)
        return probs


# ---------------------------------------------------------------------------
# Random forest


class RandomForestModel(_Model):
    variant = "random_forest"

    def __init__(self, columns, categories, n_trees: int = 100,
                 max_features: int | None = None, bootstrap: bool = True, seed: int = 0):
        super().__init__(columns, categories)
        self.n_trees = n_trees
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[_Node] = []

    def _resolved_max_features(self) -> int:
        if self.max_features is not None:
            return self.max_features
        return int(math.log2(len(self.columns))) + 1

    def fit(self, dataset: Dataset, threads: int = 1) -> "RandomForestModel":
        self.cat_sizes = dataset.cat_sizes()
        n = len(dataset)
        max_features = self._resolved_max_features()

        def build(tree_index: int) -> _Node:
            rng = np.random.default_rng(derive_seed(self.seed, "tree", tree_index))
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            return _grow_tree(dataset.x[rows], dataset.y[rows], self.cat_sizes,
                              rng=rng, max_features=max_features)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                self.trees = list(pool.map(build, range(self.n_trees)))
        else:
            self.trees = [build(t) for t in range(self.n_trees)]
        return self

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise ValueError("the forest has no trees; fit it first")
        x = self._check(x)
        probs = np.zeros((x.shape[0], N_CLASSES))
        for tree in self.trees:
            _tree_probabilities(tree, x, probs)
        return probs / len(self.trees)


# ---------------------------------------------------------------------------
# Facade, persistence


def train(dataset: Dataset, variant: str, seed: int = 0, threads: int = 1, **hyperparams) -> _Model:
    """Fit one classifier variant on an (imputed) dataset."""
    if np.isnan(dataset.x).any():
        raise ValueError("dataset contains NaN features; impute before training")
    if np.count_nonzero(dataset.class_counts()) < 2:
        raise ValueError("training needs at least 2 classes present")
    columns, categories = dataset.columns, dataset.categories
    if variant == "gaussian_nb":
        return GaussianNBModel(columns, categories).fit(dataset)
    if variant == "logistic_regression":
        return LogisticRegressionModel(columns, categories, **hyperparams).fit(dataset)
    if variant == "decision_tree":
        return DecisionTreeModel(columns, categories).fit(dataset)
    if variant == "random_forest":
        return RandomForestModel(columns, categories, seed=seed, **hyperparams).fit(dataset, threads=threads)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def _node_to_dict(node: _Node) -> dict:
    payload: dict = {"counts": [float(c) for c in node.counts]}
    if not node.is_leaf:
        payload.update(
            feature=node.feature,
            threshold=node.threshold,
            category=node.category,
            gain=node.gain,
            left=_node_to_dict(node.left),
            right=_node_to_dict(node.right),
        )
    return payload


def _node_from_dict(payload: dict) -> _Node:
    node = _Node(counts=np.array(payload["counts"], dtype=np.float64))
    if "feature" in payload:
        node.feature = payload["feature"]
        node.threshold = payload["threshold"]
        node.category = payload["category"]
        node.gain = payload["gain"]
        node.left = _node_from_dict(payload["left"])
        node.right = _node_from_dict(payload["right"])
    return node


def save_model(model: _Model, path: str | Path) -> None:
    """Versioned, self-describing JSON persistence for every variant."""
    payload: dict = {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "variant": model.variant,
        "columns": list(model.columns),
        "categories": {k: list(v) for k, v in model.categories.items()},
    }
    if isinstance(model, GaussianNBModel):
        payload["gaussian_nb"] = {
            "priors": model.priors.tolist(),
            "class_counts": model.class_counts.tolist(),
            "cont_idx": model.cont_idx,
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
            "cat_probs": {str(j): p.tolist() for j, p in model.cat_probs.items()},
            "cat_unseen": {str(j): p.tolist() for j, p in model.cat_unseen.items()},
        }
    elif isinstance(model, LogisticRegressionModel):
        payload["logistic_regression"] = {
            "l2": model.l2,
            "cont_idx": model.cont_idx,
            "cat_layout": [list(pair) for pair in model.cat_layout],
            "mu": model.mu.tolist(),
            "sigma": model.sigma.tolist(),
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
        }
    elif isinstance(model, RandomForestModel):
        payload["random_forest"] = {
            "n_trees": model.n_trees,
            "max_features": model.max_features,
            "bootstrap": model.bootstrap,
            "seed": model.seed,
            "cat_sizes": {str(j): k for j, k in model.cat_sizes.items()},
            "trees": [_node_to_dict(t) for t in model.trees],
        }
    elif isinstance(model, DecisionTreeModel):
        payload["decision_tree"] = {
            "cat_sizes": {str(j): k for j, k in model.cat_sizes.items()},
            "root": _node_to_dict(model.root),
        }
    else:
        raise ValueError(f"cannot save model of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path: str | Path) -> _Model:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModelError(f"unreadable model file: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != _MODEL_FORMAT:
        raise CorruptModelError("not a classifier model file")
    if payload.get("version") != _MODEL_VERSION:
        raise UnsupportedVersionError(
            f"model version {payload.get('version')!r} is not supported (expected {_MODEL_VERSION})"
        )
    try:
        variant = payload["variant"]
        columns = payload["columns"]
        categories = {k: tuple(v) for k, v in payload["categories"].items()}
        if variant == "gaussian_nb":
            body = payload["gaussian_nb"]
            model = GaussianNBModel(columns, categories)
            model.priors = np.array(body["priors"])
            model.class_counts = np.array(body["class_counts"])
            model.cont_idx = list(body["cont_idx"])
            model.means = np.array(body["means"])
            model.variances = np.array(body["variances"])
            model.cat_probs = {int(j): np.array(p) for j, p in body["cat_probs"].items()}
            model.cat_unseen = {int(j): np.array(p) for j, p in body["cat_unseen"].items()}
            return model
        if variant == "logistic_regression":
            body = payload["logistic_regression"]
            model = LogisticRegressionModel(columns, categories, l2=body["l2"])
            model.cont_idx = list(body["cont_idx"])
            model.cat_layout = [tuple(pair) for pair in body["cat_layout"]]
            model.mu = np.array(body["mu"])
            model.sigma = np.array(body["sigma"])
            model.weights = np.array(body["weights"])
            model.bias = np.array(body["bias"])
            return model
        if variant == "decision_tree":
            body = payload["decision_tree"]
            model = DecisionTreeModel(columns, categories)
            model.cat_sizes = {int(j): k for j, k in body["cat_sizes"].items()}
            model.root = _node_from_dict(body["root"])
            return model
        if variant == "random_forest":
            body = payload["random_forest"]
            model = RandomForestModel(
                columns, categories, n_trees=body["n_trees"],
                max_features=body["max_features"], bootstrap=body["bootstrap"],
                seed=body["seed"],
            )
            model.cat_sizes = {int(j): k for j, k in body["cat_sizes"].items()}
            model.trees = [_node_from_dict(t) for t in body["trees"]]
            return model
    except (KeyError, TypeError) as exc:
        raise CorruptModelError(f"model file is missing fields: {exc}") from None
    raise CorruptModelError(f"unknown variant {variant!r} in model file")
