"""From-scratch binary classifiers: KNN, Gaussian Naive Bayes, CART tree.

These are the level-2 detectors that decide legitimate-vs-fake for tasks
the discriminator lets through. All fits are deterministic and fitted
models are immutable, so concurrent prediction is safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

KNN = "knn"
NAIVE_BAYES = "nb"
DECISION_TREE = "dt"

_ALIASES = {
    "knn": KNN,
    "nb": NAIVE_BAYES,
    "gaussian_nb": NAIVE_BAYES,
    "dt": DECISION_TREE,
    "decision_tree": DECISION_TREE,
}


@dataclass
class ClassifierKind:
    """Which classifier to build, with its hyperparameters.

    var_smoothing is a relative factor: the variance floor added by NB is
    var_smoothing * (largest per-feature variance in the training data).
    """

    name: str = KNN
    k: int = 5
    var_smoothing: float = 1e-9
    max_depth: int | None = None

    def validate(self):
        if self.name not in _ALIASES:
            raise ValueError(f"unknown classifier {self.name!r}")
        if _ALIASES[self.name] == KNN and (self.k < 1 or self.k % 2 == 0):
            raise ValueError("k must be odd and >= 1")
        if self.var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when set")

    @property
    def canonical_name(self):
        return _ALIASES[self.name]


def _check_fit_inputs(rows, labels):
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if rows.ndim != 2 or len(rows) != len(labels):
        raise ValueError("rows must be 2-D with one label per row")
    if len(np.unique(labels)) < 2:
        raise ValueError("training data must contain both classes")
    if not set(np.unique(labels)) <= {0, 1}:
        raise ValueError("labels must be 0/1")
    return rows, labels


def _check_predict_inputs(rows, n_features):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != n_features:
        raise ValueError(f"feature width {rows.shape[1]} != fitted width {n_features}")
    return rows


class KnnClassifier:
    """Majority vote over the k nearest rows by Euclidean distance.

    Distance ties break toward the lower training-row index (stable sort),
    and an odd k makes vote ties impossible for binary labels.
    """

    def __init__(self, k=5):
        if k < 1 or k % 2 == 0:
            raise ValueError("k must be odd and >= 1")
        self.k = k
        self.rows = None
        self.labels = None

    def fit(self, rows, labels):
        rows, labels = _check_fit_inputs(rows, labels)
        if self.k > len(rows):
            raise ValueError("k exceeds the number of training rows")
        self.rows = rows.copy()
        self.labels = labels.copy()
        return self

    def predict(self, rows, chunk_size=1024):
        rows = _check_predict_inputs(rows, self.rows.shape[1])
        train_sq = (self.rows**2).sum(axis=1)
        out = np.empty(len(rows), dtype=int)
        for start in range(0, len(rows), chunk_size):
            block = rows[start : start + chunk_size]
            # |a-b|^2 expansion keeps memory at (chunk x train) instead of
            # materializing the 3-D difference tensor.
            d2 = (block**2).sum(axis=1)[:, None] + train_sq[None, :] - 2.0 * (block @ self.rows.T)
            np.maximum(d2, 0.0, out=d2)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            votes = self.labels[nearest].sum(axis=1)
            out[start : start + len(block)] = (votes * 2 > self.k).astype(int)
        return out

    def to_json(self):
        return {
            "kind": KNN,
            "k": self.k,
            "rows": self.rows.tolist(),
            "labels": self.labels.tolist(),
        }

    @classmethod
    def from_json(cls, payload):
        model = cls(k=payload["k"])
        model.rows = np.array(payload["rows"], dtype=float)
        model.labels = np.array(payload["labels"], dtype=int)
        return model


class GaussianNbClassifier:
    """Gaussian Naive Bayes with a relative variance floor."""

    def __init__(self, var_smoothing=1e-9):
        if var_smoothing <= 0:
            raise ValueError("var_smoothing must be positive")
        self.var_smoothing = var_smoothing
        self.means = None
        self.variances = None
        self.log_priors = None

    def fit(self, rows, labels):
        rows, labels = _check_fit_inputs(rows, labels)
        smoothing = self.var_smoothing * rows.var(axis=0).max()
        means, variances, priors = [], [], []
        for cls_label in (0, 1):
            member = rows[labels == cls_label]
            means.append(member.mean(axis=0))
            variances.append(member.var(axis=0) + smoothing)
            priors.append(len(member) / len(rows))
        self.means = np.array(means)
        self.variances = np.array(variances)
        self.log_priors = np.log(priors)
        return self

    def log_posteriors(self, rows):
        """Unnormalized log posterior per class: log prior + log likelihood."""
        rows = _check_predict_inputs(rows, self.means.shape[1])
        out = np.empty((len(rows), 2))
        for cls_label in (0, 1):
            mu = self.means[cls_label]
            var = self.variances[cls_label]
            log_lik = -0.5 * (np.log(2.0 * np.pi * var) + (rows - mu) ** 2 / var).sum(axis=1)
            out[:, cls_label] = self.log_priors[cls_label] + log_lik
        return out

    def predict(self, rows):
        return np.argmax(self.log_posteriors(rows), axis=1)

    def to_json(self):
        return {
            "kind": NAIVE_BAYES,
            "var_smoothing": self.var_smoothing,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_priors": self.log_priors.tolist(),
        }

    @classmethod
    def from_json(cls, payload):
        model = cls(var_smoothing=payload["var_smoothing"])
        model.means = np.array(payload["means"], dtype=float)
        model.variances = np.array(payload["variances"], dtype=float)
        model.log_priors = np.array(payload["log_priors"], dtype=float)
        return model


def gini_impurity(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    p1 = labels.sum() / n
    return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)


def best_split(rows, labels):
    """Best (feature, threshold) by Gini gain, or None if nothing splits.

    Thresholds sit at midpoints of adjacent distinct sorted values. Ties
    break toward the lower feature index, then the lower threshold. A
    zero-gain split is still returned for an impure node so the tree can
    keep shattering label-consistent data (XOR-style layouts need it).
    """
    n, n_features = rows.shape
    parent = gini_impurity(labels)
    best = None  # (gain, feature, threshold)
    for feature in range(n_features):
        order = np.argsort(rows[:, feature], kind="stable")
        values = rows[order, feature]
        sorted_labels = labels[order]
        cut = np.flatnonzero(values[:-1] != values[1:])
        if len(cut) == 0:
            continue
        ones_left = np.cumsum(sorted_labels)[cut]
        n_left = cut + 1.0
        n_right = n - n_left
        ones_right = sorted_labels.sum() - ones_left
        p1_l = ones_left / n_left
        p1_r = ones_right / n_right
        gini_l = 1.0 - p1_l**2 - (1.0 - p1_l) ** 2
        gini_r = 1.0 - p1_r**2 - (1.0 - p1_r) ** 2
        child = (n_left * gini_l + n_right * gini_r) / n
        gains = parent - child
        pos = int(np.argmax(gains))
        if best is None or gains[pos] > best[0] + 1e-12:
            threshold = (values[cut[pos]] + values[cut[pos] + 1]) / 2.0
            best = (float(gains[pos]), feature, float(threshold))
    return None if best is None else (best[1], best[2])


class DecisionTreeClassifier:
    """CART with the Gini criterion; unlimited depth unless capped."""

    def __init__(self, max_depth=None):
        if max_depth is not None and max_depth < 1:
            raise ValueError("max_depth must be >= 1 when set")
        self.max_depth = max_depth
        self.root = None
        self.n_features = None

    def fit(self, rows, labels):
        rows, labels = _check_fit_inputs(rows, labels)
        self.n_features = rows.shape[1]
        self.root = self._grow(rows, labels, depth=0)
        return self

    def _grow(self, rows, labels, depth):
        counts = [int((labels == 0).sum()), int((labels == 1).sum())]
        pure = counts[0] == 0 or counts[1] == 0
        depth_capped = self.max_depth is not None and depth >= self.max_depth
        if pure or depth_capped or len(labels) < 2:
            return {"counts": counts}
        split = best_split(rows, labels)
        if split is None:  # duplicate rows with conflicting labels
            return {"counts": counts}
        feature, threshold = split
        left = rows[:, feature] <= threshold
        return {
            "feature": feature,
            "threshold": threshold,
            "left": self._grow(rows[left], labels[left], depth + 1),
            "right": self._grow(rows[~left], labels[~left], depth + 1),
        }

    def _leaf_for(self, row):
        node = self.root
        while "feature" in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        return node

    def predict(self, rows):
        rows = _check_predict_inputs(rows, self.n_features)
        out = np.empty(len(rows), dtype=int)
        for i, row in enumerate(rows):
            counts = self._leaf_for(row)["counts"]
            out[i] = int(counts[1] > counts[0])
        return out

    def to_json(self):
        return {"kind": DECISION_TREE, "max_depth": self.max_depth,
                "n_features": self.n_features, "root": self.root}

    @classmethod
    def from_json(cls, payload):
        model = cls(max_depth=payload["max_depth"])
        model.n_features = payload["n_features"]
        model.root = payload["root"]
        return model


def make_classifier(kind):
    """Build an unfitted classifier from a ClassifierKind (or alias string)."""
    if isinstance(kind, str):
        kind = ClassifierKind(name=kind)
    kind.validate()
    name = kind.canonical_name
    if name == KNN:
        return KnnClassifier(k=kind.k)
    if name == NAIVE_BAYES:
        return GaussianNbClassifier(var_smoothing=kind.var_smoothing)
    return DecisionTreeClassifier(max_depth=kind.max_depth)


def save_classifier(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh)
        fh.write("\n")


def load_classifier(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    cls = {KNN: KnnClassifier, NAIVE_BAYES: GaussianNbClassifier,
           DECISION_TREE: DecisionTreeClassifier}[payload["kind"]]
    return cls.from_json(payload)
