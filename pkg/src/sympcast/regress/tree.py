"""CART regression trees with squared-error (variance reduction) splits.

Split search is exhaustive: for every feature, every boundary between two
distinct sorted values of the node's samples is a candidate, thresholded at
the midpoint.  Samples with ``x <= threshold`` go left.  Among equal gains the
earlier feature wins, then the lower threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# a split must remove at least this fraction of the node's SSE
_MIN_REL_GAIN = 1e-12


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray  # -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        X = np.asarray(X, dtype=float)
        rows = np.arange(len(X))
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            go_left = X[rows, np.maximum(f, 0)] <= self.threshold[node]
            node = np.where(inner, np.where(go_left, self.left[node], self.right[node]), node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=float),
        )


def presort(X: np.ndarray):
    """Per-feature stable argsort and sorted values, both (k, n).

    Depends only on ``X``, so boosting computes it once for all stages.
    """
    XT = np.asarray(X, dtype=float).T
    order = np.argsort(XT, axis=1, kind="stable")
    return order, np.take_along_axis(XT, order, axis=1)


def _best_split(xs, yc, min_leaf):
    """Best (feature, position, gain) for one node.

    ``xs`` and ``yc`` are (k, m): the node's feature values sorted per
    feature, and the node-centred targets in the same order.
    """
    k, m = xs.shape
    nl = np.arange(1, m, dtype=float)
    nr = m - nl
    left = np.cumsum(yc, axis=1)[:, :-1]
    gain = left * left * (m / (nl * nr))
    valid = xs[:, 1:] > xs[:, :-1]
    valid[:, : min_leaf - 1] = False
    if min_leaf > 1:
        valid[:, m - min_leaf :] = False
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    f, pos = divmod(flat, m - 1)
    return f, pos, gain[f, pos]


def build_tree(X, y, max_depth=3, min_leaf=5, order=None):
    """Fit a regression tree.

    ``order`` is the ``(order, sorted values)`` pair from :func:`presort`.

    Returns
    -------
    tree : Tree
    leaf_of_row : ndarray
        Leaf index of every training row, so callers can read training
        predictions as ``tree.value[leaf_of_row]`` without a traversal.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    order, x_sorted = presort(X) if order is None else order

    feature, threshold, left, right, value = [], [], [], [], []
    leaf_of_row = np.zeros(n, dtype=np.int64)

    def new_node(mean):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(mean)
        return len(feature) - 1

    root_rows = np.arange(n)
    stack = [(new_node(float(y.mean())), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        leaf_of_row[rows] = node
        m = len(rows)
        if depth >= max_depth or m < 2 * min_leaf or m < 2:
            continue
        yc = y[rows] - value[node]
        sse = float(yc @ yc)
        if sse <= 0.0:
            continue
        mask = np.zeros(n, bool)
        mask[rows] = True
        sel = mask[order]
        xs = x_sorted[sel].reshape(k, m)
        ys = y[order[sel]].reshape(k, m)
        f, pos, gain = _best_split(xs, ys - value[node], min_leaf)
        if not np.isfinite(gain) or gain <= _MIN_REL_GAIN * sse:
            continue
        lo, hi = xs[f, pos], xs[f, pos + 1]
        thr = 0.5 * (lo + hi)
        if thr >= hi:  # adjacent floats
            thr = lo
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node] = f
        threshold[node] = thr
        li = new_node(float(y[lrows].mean()))
        ri = new_node(float(y[rrows].mean()))
        left[node], right[node] = li, ri
        # right first so the left subtree is numbered first (preorder)
        stack.append((ri, rrows, depth + 1))
        stack.append((li, lrows, depth + 1))

    tree = Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
    )
    return tree, leaf_of_row
