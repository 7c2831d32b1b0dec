"""Popularity-class assignment and the four classification algorithms.

All classifiers run on standardized features (zero-variance columns are
dropped and recorded). Prediction ties resolve to the lexicographically
smallest class label; every fit is deterministic for a fixed seed.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DataError
from ..scoring import FEATURE_NAMES, FeatureVector
from .regression import feature_matrix, pairs_fingerprint

ALGORITHMS = ("naive_bayes", "decision_tree", "bagging", "linear_margin")


@dataclass(frozen=True)
class ClassScheme:
    """Half-open tweet-count intervals: [1, b0), [b0, b1), ..., [b_last, inf)."""

    boundaries: tuple[float, ...] = (20, 100)
    labels: tuple[str, ...] = ("A", "B", "C")

    def __post_init__(self):
        if len(self.labels) != len(self.boundaries) + 1:
            raise DataError("need exactly one more label than boundaries")
        if any(b <= 0 for b in self.boundaries):
            raise DataError("boundaries must be positive")
        if list(self.boundaries) != sorted(set(self.boundaries)):
            raise DataError("boundaries must be strictly ascending")

    def to_record(self) -> dict:
        return {"boundaries": list(self.boundaries), "labels": list(self.labels)}

    @classmethod
    def from_record(cls, rec: dict) -> "ClassScheme":
        return cls(tuple(rec["boundaries"]), tuple(rec["labels"]))


DEFAULT_SCHEME = ClassScheme()


def assign_class(tweets: int, scheme: ClassScheme = DEFAULT_SCHEME) -> str:
    if tweets < 1:
        raise DataError("zero-tweet article has no class")
    return scheme.labels[bisect_right(scheme.boundaries, tweets)]


@dataclass
class Standardizer:
    means: np.ndarray
    sds: np.ndarray
    kept: list[int]  # column indices into the input matrix
    dropped: list[str]  # names of zero-variance columns

    @classmethod
    def fit(cls, X: np.ndarray, names: Sequence[str]) -> "Standardizer":
        means = X.mean(axis=0)
        sds = X.std(axis=0)
        kept = [i for i in range(X.shape[1]) if sds[i] > 0.0]
        if not kept:
            raise DataError("all features have zero variance")
        return cls(
            means=means[kept],
            sds=sds[kept],
            kept=kept,
            dropped=[names[i] for i in range(X.shape[1]) if sds[i] == 0.0],
        )

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X[:, self.kept] - self.means) / self.sds


class GaussianNB:
    """Per-class Gaussian likelihoods with a variance floor."""

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor
        self.log_priors: np.ndarray | None = None
        self.means: np.ndarray | None = None
        self.vars: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int, rng) -> None:
        self.log_priors = np.empty(n_classes)
        self.means = np.empty((n_classes, X.shape[1]))
        self.vars = np.empty((n_classes, X.shape[1]))
        for c in range(n_classes):
            rows = X[y == c]
            self.log_priors[c] = np.log(len(rows) / len(X))
            self.means[c] = rows.mean(axis=0)
            self.vars[c] = np.maximum(rows.var(axis=0), self.var_floor)

    def scores(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((len(X), len(self.log_priors)))
        for c in range(len(self.log_priors)):
            ll = -0.5 * (
                np.log(2.0 * np.pi * self.vars[c])
                + (X - self.means[c]) ** 2 / self.vars[c]
            ).sum(axis=1)
            out[:, c] = self.log_priors[c] + ll
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1)

    def proba(self, X: np.ndarray) -> np.ndarray:
        s = self.scores(X)
        s = np.exp(s - s.max(axis=1, keepdims=True))
        return s / s.sum(axis=1, keepdims=True)

    def to_record(self) -> dict:
        return {
            "var_floor": self.var_floor,
            "log_priors": self.log_priors.tolist(),
            "means": self.means.tolist(),
            "vars": self.vars.tolist(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "GaussianNB":
        nb = cls(rec["var_floor"])
        nb.log_priors = np.array(rec["log_priors"])
        nb.means = np.array(rec["means"])
        nb.vars = np.array(rec["vars"])
        return nb


class CartTree:
    """CART: Gini impurity, binary numeric splits at midpoints.

    Split ties go to the lower feature index, then the lower threshold.
    """

    def __init__(self, max_depth: int = 12, min_leaf: int = 5):
        if max_depth < 1 or min_leaf < 1:
            raise DataError("max_depth and min_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.root: dict | None = None
        self.n_classes = 0

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int, rng=None) -> None:
        self.n_classes = n_classes
        self.root = self._build(X, y, depth=0)

    def _leaf(self, y: np.ndarray) -> dict:
        return {"counts": np.bincount(y, minlength=self.n_classes).tolist()}

    def _build(self, X: np.ndarray, y: np.ndarray, depth: int) -> dict:
        n = len(y)
        counts = np.bincount(y, minlength=self.n_classes)
        if (
            depth >= self.max_depth
            or n < 2 * self.min_leaf
            or np.count_nonzero(counts) <= 1
        ):
            return self._leaf(y)
        split = self._best_split(X, y, counts)
        if split is None:
            return self._leaf(y)
        feature, threshold = split
        mask = X[:, feature] <= threshold
        return {
            "feature": int(feature),
            "threshold": float(threshold),
            "left": self._build(X[mask], y[mask], depth + 1),
            "right": self._build(X[~mask], y[~mask], depth + 1),
        }

    def _best_split(
        self, X: np.ndarray, y: np.ndarray, counts: np.ndarray
    ) -> Optional[tuple[int, float]]:
        n = len(y)
        gini_parent = 1.0 - float(((counts / n) ** 2).sum())
        best_gain = 0.0
        best: Optional[tuple[int, float]] = None
        onehot = np.zeros((n, self.n_classes))
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            onehot[:] = 0.0
            onehot[np.arange(n), y[order]] = 1.0
            cum = np.cumsum(onehot, axis=0)
            left_sizes = np.arange(1, n)
            valid = (
                (left_sizes >= self.min_leaf)
                & (left_sizes <= n - self.min_leaf)
                & (xs[1:] > xs[:-1])
            )
            if not valid.any():
                continue
            nl = left_sizes[valid].astype(float)
            nr = n - nl
            left_counts = cum[:-1][valid]
            right_counts = counts - left_counts
            gini_l = 1.0 - ((left_counts / nl[:, None]) ** 2).sum(axis=1)
            gini_r = 1.0 - ((right_counts / nr[:, None]) ** 2).sum(axis=1)
            gain = gini_parent - (nl * gini_l + nr * gini_r) / n
            i = int(np.argmax(gain))  # first max: lower threshold wins ties
            if gain[i] > best_gain:
                best_gain = float(gain[i])
                pos = np.nonzero(valid)[0][i]
                best = (f, float((xs[pos] + xs[pos + 1]) / 2.0))
        return best

    def _walk(self, x: np.ndarray) -> dict:
        node = self.root
        while "feature" in node:
            node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array(
            [int(np.argmax(self._walk(x)["counts"])) for x in X], dtype=int
        )

    def proba(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((len(X), self.n_classes))
        for i, x in enumerate(X):
            counts = np.array(self._walk(x)["counts"], dtype=float)
            out[i] = counts / counts.sum()
        return out

    def to_record(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "n_classes": self.n_classes,
            "root": self.root,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CartTree":
        tree = cls(rec["max_depth"], rec["min_leaf"])
        tree.n_classes = rec["n_classes"]
        tree.root = rec["root"]
        return tree


class Bagging:
    """Bootstrap ensemble of CART trees, majority vote."""

    def __init__(self, n_trees: int = 10, max_depth: int = 12, min_leaf: int = 5):
        if n_trees < 1:
            raise DataError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.trees: list[CartTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int, rng) -> None:
        self.trees = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, len(y), size=len(y))
            tree = CartTree(self.max_depth, self.min_leaf)
            tree.fit(X[idx], y[idx], n_classes)
            self.trees.append(tree)

    def _votes(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((len(X), self.trees[0].n_classes))
        for tree in self.trees:
            preds = tree.predict(X)
            votes[np.arange(len(X)), preds] += 1.0
        return votes

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax picks the first maximum: lexicographically smallest class
        return np.argmax(self._votes(X), axis=1)

    def proba(self, X: np.ndarray) -> np.ndarray:
        votes = self._votes(X)
        return votes / votes.sum(axis=1, keepdims=True)

    def to_record(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "trees": [t.to_record() for t in self.trees],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Bagging":
        bag = cls(rec["n_trees"], rec["max_depth"], rec["min_leaf"])
        bag.trees = [CartTree.from_record(t) for t in rec["trees"]]
        return bag


class LinearMargin:
    """One-vs-rest linear classifier trained by hinge-loss subgradient descent.

    Fixed epoch count with seeded per-epoch shuffling; the learning rate
    decays as lr0 / (1 + lr0 * reg * t).
    """

    def __init__(self, epochs: int = 30, lr0: float = 0.5, reg: float = 1e-4):
        self.epochs = epochs
        self.lr0 = lr0
        self.reg = reg
        self.weights: np.ndarray | None = None  # (n_classes, d)
        self.biases: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, n_classes: int, rng) -> None:
        n, d = X.shape
        rows = [[float(v) for v in row] for row in X]  # python floats: fast inner loop
        self.weights = np.zeros((n_classes, d))
        self.biases = np.zeros(n_classes)
        for c in range(n_classes):
            targets = [1.0 if label == c else -1.0 for label in y]
            w = [0.0] * d
            b = 0.0
            t = 0
            for _ in range(self.epochs):
                for i in rng.permutation(n):
                    t += 1
                    eta = self.lr0 / (1.0 + self.lr0 * self.reg * t)
                    x = rows[i]
                    yi = targets[i]
                    margin = yi * (sum(wj * xj for wj, xj in zip(w, x)) + b)
                    decay = 1.0 - eta * self.reg
                    if margin < 1.0:
                        w = [decay * wj + eta * yi * xj for wj, xj in zip(w, x)]
                        b += eta * yi
                    else:
                        w = [decay * wj for wj in w]
            self.weights[c] = w
            self.biases[c] = b

    def scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.biases

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1)

    def proba(self, X: np.ndarray) -> np.ndarray:
        s = self.scores(X)
        s = np.exp(s - s.max(axis=1, keepdims=True))
        return s / s.sum(axis=1, keepdims=True)

    def to_record(self) -> dict:
        return {
            "epochs": self.epochs,
            "lr0": self.lr0,
            "reg": self.reg,
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "LinearMargin":
        lm = cls(rec["epochs"], rec["lr0"], rec["reg"])
        lm.weights = np.array(rec["weights"])
        lm.biases = np.array(rec["biases"])
        return lm


_ALGORITHM_CLASSES = {
    "naive_bayes": GaussianNB,
    "decision_tree": CartTree,
    "bagging": Bagging,
    "linear_margin": LinearMargin,
}


@dataclass
class ClassifierModel:
    algorithm: str
    classes: list[str]  # sorted lexicographically
    standardizer: Standardizer
    inner: object
    params: dict = field(default_factory=dict)
    seed: int = 0
    scheme: Optional[ClassScheme] = None
    feature_indices: tuple[int, ...] = tuple(range(len(FEATURE_NAMES)))
    log_scores: bool = False
    train_fingerprint: str = ""

    def _matrix(self, fvs: Sequence[FeatureVector]) -> np.ndarray:
        X = feature_matrix(fvs, log_scores=self.log_scores)
        return self.standardizer.transform(X[:, list(self.feature_indices)])

    def predict(self, fvs: Sequence[FeatureVector]) -> list[str]:
        enc = self.inner.predict(self._matrix(fvs))
        return [self.classes[i] for i in enc]

    def predict_proba(self, fv: FeatureVector) -> dict[str, float]:
        row = self.inner.proba(self._matrix([fv]))[0]
        return {cls: float(p) for cls, p in zip(self.classes, row)}


def fit_classifier(
    train: Sequence[tuple[FeatureVector, str]],
    algorithm: str,
    params: Optional[dict] = None,
    seed: int = 0,
    scheme: Optional[ClassScheme] = None,
    feature_indices: Optional[Sequence[int]] = None,
    log_scores: bool = False,
) -> ClassifierModel:
    """Fit one of the four algorithms on labeled feature vectors."""
    if algorithm not in _ALGORITHM_CLASSES:
        raise DataError(f"unknown algorithm {algorithm!r}")
    if not train:
        raise DataError("empty training set")
    classes = sorted({label for _, label in train})
    if len(classes) < 2:
        raise DataError(f"single-class training data: {classes}")
    indices = tuple(feature_indices) if feature_indices is not None else tuple(
        range(len(FEATURE_NAMES))
    )
    names = [FEATURE_NAMES[i] for i in indices]

    X_raw = feature_matrix([fv for fv, _ in train], log_scores=log_scores)[:, list(indices)]
    standardizer = Standardizer.fit(X_raw, names)
    X = standardizer.transform(X_raw)
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.array([class_index[label] for _, label in train], dtype=int)

    inner = _ALGORITHM_CLASSES[algorithm](**(params or {}))
    rng = np.random.default_rng(seed)
    inner.fit(X, y, len(classes), rng)

    return ClassifierModel(
        algorithm=algorithm,
        classes=classes,
        standardizer=standardizer,
        inner=inner,
        params=dict(params or {}),
        seed=seed,
        scheme=scheme,
        feature_indices=indices,
        log_scores=log_scores,
        train_fingerprint=pairs_fingerprint(train),
    )
