"""Weighted CART regression trees and AdaBoost.R2 with linear loss.

Boosting reweights rows deterministically (no resampling):

1. fit a tree on the current row weights;
2. per-row loss is ``|pred - y| / max|pred - y|``;
3. the weighted mean loss ``Lbar`` stops boosting once it reaches 0.5;
4. ``beta = Lbar / (1 - Lbar)``, stage weight ``ln(1 / beta)``, and row
   weights are multiplied by ``beta ** (1 - loss)`` and renormalized.

Prediction is the weighted median of stage outputs, taking the lower
median on ties.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError, UsageError

logger = logging.getLogger(__name__)

LEAF = -1


class RegressionTree:
    """Axis-aligned regression tree with a weighted squared-error criterion.

    Splits are searched exhaustively over features in column order and
    thresholds in ascending order; the first best split wins.  Thresholds
    sit halfway between adjacent distinct values and rows with
    ``x <= threshold`` go left.
    """

    def __init__(self, max_depth=3, min_samples_leaf=2):
        if max_depth < 0:
            raise UsageError("max_depth must be >= 0")
        if min_samples_leaf < 1:
            raise UsageError("min_samples_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def fit(self, X, y, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
            raise UsageError(f"bad training shapes X={X.shape} y={y.shape}")
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise UsageError("sample weights must be finite, >= 0 and not all zero")
        self.n_features = X.shape[1]
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        self._grow(X, y, w, np.arange(len(y)), 0)
        return self

    def _new_node(self, value):
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.value) - 1

    def _grow(self, X, y, w, idx, depth):
        wi, yi = w[idx], y[idx]
        total = wi.sum()
        mean = float(np.dot(wi, yi) / total) if total > 0 else float(yi.mean())
        node = self._new_node(mean)
        if depth >= self.max_depth or len(idx) < 2 * self.min_samples_leaf:
            return node
        parent_sse = float(np.dot(wi, (yi - mean) ** 2))
        if parent_sse <= 0.0:
            return node
        split = self._best_split(X, y, w, idx, parent_sse)
        if split is None:
            return node
        f, thr = split
        go_left = X[idx, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(X, y, w, idx[go_left], depth + 1)
        self.right[node] = self._grow(X, y, w, idx[~go_left], depth + 1)
        return node

    def _best_split(self, X, y, w, idx, parent_sse):
        n = len(idx)
        m = self.min_samples_leaf
        best_sse, best = parent_sse, None
        for f in range(X.shape[1]):
            order = idx[np.argsort(X[idx, f], kind="stable")]
            xs, ys, ws = X[order, f], y[order], w[order]
            cw = np.cumsum(ws)
            cwy = np.cumsum(ws * ys)
            cwy2 = np.cumsum(ws * ys * ys)
            # candidate split after position i puts rows 0..i on the left
            i = np.arange(m - 1, n - m)
            if i.size == 0:
                continue
            i = i[xs[i] < xs[i + 1]]
            if i.size == 0:
                continue
            wl, wr = cw[i], cw[-1] - cw[i]
            ok = (wl > 0) & (wr > 0)
            i, wl, wr = i[ok], wl[ok], wr[ok]
            if i.size == 0:
                continue
            syl, syr = cwy[i], cwy[-1] - cwy[i]
            sse = (cwy2[i] - syl * syl / wl) + ((cwy2[-1] - cwy2[i]) - syr * syr / wr)
            k = int(np.argmin(sse))
            if sse[k] < best_sse:
                a, b = xs[i[k]], xs[i[k] + 1]
                thr = (a + b) / 2.0
                if not a <= thr < b:
                    thr = a
                best_sse, best = float(sse[k]), (f, float(thr))
        return best

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise UsageError(f"expected {self.n_features} features, got shape {X.shape}")
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left, right = np.asarray(self.left), np.asarray(self.right)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = feature[node]
            inner = f >= 0
            if not inner.any():
                break
            r = rows[inner]
            go_left = X[r, f[inner]] <= threshold[node[inner]]
            node[r] = np.where(go_left, left[node[inner]], right[node[inner]])
        return np.asarray(self.value, dtype=np.float64)[node]

    @property
    def n_nodes(self):
        return len(self.value)

    def to_dict(self):
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "n_features": self.n_features,
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            tree = cls(data["max_depth"], data["min_samples_leaf"])
            tree.n_features = int(data["n_features"])
            tree.feature = [int(v) for v in data["feature"]]
            tree.threshold = [float(v) for v in data["threshold"]]
            tree.left = [int(v) for v in data["left"]]
            tree.right = [int(v) for v in data["right"]]
            tree.value = [float(v) for v in data["value"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed tree: {exc}") from exc
        sizes = {len(tree.feature), len(tree.threshold), len(tree.left), len(tree.right), len(tree.value)}
        if len(sizes) != 1 or not tree.value:
            raise ModelFormatError("tree arrays have inconsistent lengths")
        return tree


def weighted_median(predictions, weights):
    """Column-wise weighted median of a (stages, rows) array.

    Returns the smallest prediction whose cumulative weight reaches half
    the total, i.e. the lower median on ties.
    """
    P = np.asarray(predictions, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    order = np.argsort(P, axis=0, kind="stable")
    cum = np.cumsum(w[order], axis=0)
    pos = np.argmax(cum >= 0.5 * cum[-1], axis=0)
    cols = np.arange(P.shape[1])
    return P[order[pos, cols], cols]


@dataclass
class AdaBoostR2:
    n_stages: int = 50
    max_depth: int = 3
    min_samples_leaf: int = 2
    trees: list = field(default_factory=list)
    stage_weights: list = field(default_factory=list)
    stage_losses: list = field(default_factory=list)
    status: str = "untrained"

    def fit(self, X, y, sample_weight=None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.n_stages < 1:
            raise UsageError("n_stages must be >= 1")
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        w = w / w.sum()
        self.trees, self.stage_weights, self.stage_losses = [], [], []
        self.status = "ok"

        if len(X) and np.all(X == X[0]):
            tree = RegressionTree(self.max_depth, self.min_samples_leaf).fit(X, y, w)
            self.trees.append(tree)
            self.stage_weights.append(1.0)
            self.stage_losses.append(0.0)
            self.status = "degenerate: all feature rows identical"
            logger.warning("AdaBoost.R2: %s, single-stage model", self.status)
            return self

        for stage in range(self.n_stages):
            tree = RegressionTree(self.max_depth, self.min_samples_leaf).fit(X, y, w)
            err = np.abs(tree.predict(X) - y)
            top = err.max()
            if top <= 0.0:
                self.trees.append(tree)
                self.stage_weights.append(1.0)
                self.stage_losses.append(0.0)
                if stage == 0:
                    self.status = "perfect fit at first stage"
                break
            loss = err / top
            lbar = float(np.dot(w, loss))
            if lbar >= 0.5:
                if stage == 0:
                    self.trees.append(tree)
                    self.stage_weights.append(1.0)
                    self.stage_losses.append(lbar)
                    self.status = f"weak first stage (average loss {lbar:.4f} >= 0.5)"
                    logger.warning("AdaBoost.R2: %s", self.status)
                break
            beta = lbar / (1.0 - lbar)
            self.trees.append(tree)
            self.stage_weights.append(math.log(1.0 / beta))
            self.stage_losses.append(lbar)
            w = w * np.power(beta, 1.0 - loss)
            w = w / w.sum()
        return self

    def stage_predictions(self, X):
        return np.vstack([t.predict(X) for t in self.trees])

    def predict(self, X, n_stages=None):
        if not self.trees:
            raise UsageError("model is not trained")
        k = len(self.trees) if n_stages is None else n_stages
        P = np.vstack([t.predict(X) for t in self.trees[:k]])
        return weighted_median(P, self.stage_weights[:k])

    def to_dict(self):
        return {
            "n_stages": self.n_stages,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "status": self.status,
            "stages": [{"weight": float(wt), "loss": float(ls), "tree": t.to_dict()}
                       for t, wt, ls in zip(self.trees, self.stage_weights, self.stage_losses)],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            model = cls(int(data["n_stages"]), int(data["max_depth"]), int(data["min_samples_leaf"]))
            model.status = data.get("status", "ok")
            for st in data["stages"]:
                model.trees.append(RegressionTree.from_dict(st["tree"]))
                model.stage_weights.append(float(st["weight"]))
                model.stage_losses.append(float(st.get("loss", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed boosting model: {exc}") from exc
        if not model.trees or any(not (math.isfinite(w) and w > 0) for w in model.stage_weights):
            raise ModelFormatError("stage weights must be finite and positive")
        return model
