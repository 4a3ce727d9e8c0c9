"""Tree-ensemble classifiers for the algorithm selector.

Two interchangeable backends: gradient-boosted trees with a softmax
multi-class objective (the default), and a bagged random forest for
ablation.  Both are exact-split, deterministic given their seed, and
serialize to plain dicts so models round-trip through JSON.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def _leaf(value: float) -> dict:
    return {"leaf": value}


def _tree_predict(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X))
    stack = [(node, np.arange(len(X)))]
    while stack:
        nd, idx = stack.pop()
        if "leaf" in nd:
            out[idx] = nd["leaf"]
            continue
        go_left = X[idx, nd["feature"]] <= nd["threshold"]
        stack.append((nd["left"], idx[go_left]))
        stack.append((nd["right"], idx[~go_left]))
    return out


def _best_split(X, g, h, idx, reg_lambda, min_child_weight):
    """Exact greedy split search; first feature / lowest threshold wins ties."""
    G, H = g[idx].sum(), h[idx].sum()
    base = G * G / (H + reg_lambda)
    best = (0.0, -1, 0.0)  # gain, feature, threshold
    for j in range(X.shape[1]):
        xj = X[idx, j]
        order = np.argsort(xj, kind="stable")
        xs = xj[order]
        gs = np.cumsum(g[idx][order])
        hs = np.cumsum(h[idx][order])
        distinct = xs[:-1] != xs[1:]
        if not np.any(distinct):
            continue
        GL, HL = gs[:-1], hs[:-1]
        GR, HR = G - GL, H - HL
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda) - base
        ok = distinct & (HL >= min_child_weight) & (HR >= min_child_weight)
        gain = np.where(ok, gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best[0]:
            best = (float(gain[k]), j, float(0.5 * (xs[k] + xs[k + 1])))
    return best


def _build_tree(X, g, h, idx, depth, max_depth, reg_lambda, min_child_weight, learning_rate):
    G, H = g[idx].sum(), h[idx].sum()
    if (max_depth is not None and depth >= max_depth) or len(idx) < 2:
        return _leaf(-learning_rate * G / (H + reg_lambda))
    gain, feature, threshold = _best_split(X, g, h, idx, reg_lambda, min_child_weight)
    if feature < 0 or gain <= 0.0:
        return _leaf(-learning_rate * G / (H + reg_lambda))
    left = idx[X[idx, feature] <= threshold]
    right = idx[X[idx, feature] > threshold]
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _build_tree(X, g, h, left, depth + 1, max_depth, reg_lambda, min_child_weight, learning_rate),
        "right": _build_tree(X, g, h, right, depth + 1, max_depth, reg_lambda, min_child_weight, learning_rate),
    }


class GradientBoostedClassifier:
    """Softmax multi-class boosting over axis-aligned regression trees."""

    kind = "gbdt"

    def __init__(self, n_rounds=100, max_depth=6, learning_rate=0.3,
                 reg_lambda=1.0, min_child_weight=1e-6):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.classes_: list[int] = []
        self.trees_: list[list[dict]] = []  # [round][class]

    def params(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "reg_lambda": self.reg_lambda,
            "min_child_weight": self.min_child_weight,
        }

    def fit(self, X, y, seed: int = 0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = sorted(set(int(v) for v in y))
        if len(self.classes_) < 2:
            raise DomainError("need at least two classes")
        k = len(self.classes_)
        col = {c: j for j, c in enumerate(self.classes_)}
        Y = np.zeros((len(y), k))
        Y[np.arange(len(y)), [col[int(v)] for v in y]] = 1.0
        margins = np.zeros((len(y), k))
        idx = np.arange(len(y))
        self.trees_ = []
        for _ in range(self.n_rounds):
            m = margins - margins.max(axis=1, keepdims=True)
            e = np.exp(m)
            p = e / e.sum(axis=1, keepdims=True)
            if np.max(np.abs(p - Y)) < 1e-4:
                break  # numerically converged; further rounds are no-ops
            round_trees = []
            for j in range(k):
                g = p[:, j] - Y[:, j]
                h = np.maximum(p[:, j] * (1.0 - p[:, j]), 1e-16)
                tree = _build_tree(X, g, h, idx, 0, self.max_depth,
                                   self.reg_lambda, self.min_child_weight, self.learning_rate)
                margins[:, j] += _tree_predict(tree, X)
                round_trees.append(tree)
            self.trees_.append(round_trees)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        margins = np.zeros((len(X), len(self.classes_)))
        for round_trees in self.trees_:
            for j, tree in enumerate(round_trees):
                margins[:, j] += _tree_predict(tree, X)
        return margins

    def predict(self, X) -> np.ndarray:
        margins = self.decision_function(X)
        return np.asarray(self.classes_)[np.argmax(margins, axis=1)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params(),
                "classes": self.classes_, "trees": self.trees_}

    @classmethod
    def from_dict(cls, doc: dict) -> "GradientBoostedClassifier":
        model = cls(**doc["params"])
        model.classes_ = list(doc["classes"])
        model.trees_ = doc["trees"]
        return model


def _gini_split(X, y_codes, idx, n_classes):
    best = (0.0, -1, 0.0)
    counts = np.bincount(y_codes[idx], minlength=n_classes).astype(float)
    n = len(idx)
    parent = 1.0 - np.sum((counts / n) ** 2)
    for j in range(X.shape[1]):
        xj = X[idx, j]
        order = np.argsort(xj, kind="stable")
        xs = xj[order]
        ys = y_codes[idx][order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        nl = np.arange(1, n, dtype=float)
        nr = n - nl
        right_counts = counts - left_counts
        gini_l = 1.0 - np.sum((left_counts / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((right_counts / nr[:, None]) ** 2, axis=1)
        impurity = (nl * gini_l + nr * gini_r) / n
        gain = parent - impurity
        gain = np.where(xs[:-1] != xs[1:], gain, -np.inf)
        k = int(np.argmax(gain))
        if gain[k] > best[0] + 1e-15:
            best = (float(gain[k]), j, float(0.5 * (xs[k] + xs[k + 1])))
    return best


def _build_class_tree(X, y_codes, idx, depth, max_depth, n_classes, min_leaf=1):
    counts = np.bincount(y_codes[idx], minlength=n_classes)
    if (max_depth is not None and depth >= max_depth) or len(idx) <= min_leaf or counts.max() == len(idx):
        return _leaf(int(np.argmax(counts)))
    gain, feature, threshold = _gini_split(X, y_codes, idx, n_classes)
    if feature < 0 or gain <= 0.0:
        return _leaf(int(np.argmax(counts)))
    left = idx[X[idx, feature] <= threshold]
    right = idx[X[idx, feature] > threshold]
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _build_class_tree(X, y_codes, left, depth + 1, max_depth, n_classes, min_leaf),
        "right": _build_class_tree(X, y_codes, right, depth + 1, max_depth, n_classes, min_leaf),
    }


class RandomForestClassifier:
    """Bagged, unlimited-depth classification trees; majority vote."""

    kind = "forest"

    def __init__(self, n_trees=100, max_depth=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.classes_: list[int] = []
        self.trees_: list[dict] = []

    def params(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth}

    def fit(self, X, y, seed: int = 0):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.classes_ = sorted(set(int(v) for v in y))
        if len(self.classes_) < 2:
            raise DomainError("need at least two classes")
        col = {c: j for j, c in enumerate(self.classes_)}
        codes = np.array([col[int(v)] for v in y])
        rng = np.random.default_rng(seed)
        n = len(y)
        self.trees_ = []
        for _ in range(self.n_trees):
            boot = rng.integers(0, n, size=n)
            self.trees_.append(
                _build_class_tree(X, codes, boot, 0, self.max_depth, len(self.classes_))
            )
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        votes = np.zeros((len(X), len(self.classes_)))
        for tree in self.trees_:
            pred = _tree_predict(tree, X).astype(int)
            votes[np.arange(len(X)), pred] += 1.0
        return np.asarray(self.classes_)[np.argmax(votes, axis=1)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params(),
                "classes": self.classes_, "trees": self.trees_}

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForestClassifier":
        model = cls(**doc["params"])
        model.classes_ = list(doc["classes"])
        model.trees_ = doc["trees"]
        return model
