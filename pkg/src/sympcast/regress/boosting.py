"""Gradient-boosted regression trees, squared-error loss, no subsampling."""
from __future__ import annotations

import numpy as np

from .tree import Tree, build_tree, presort


def fit_gbt(X, y, n_stages=100, learning_rate=0.1, max_depth=3, min_leaf=5):
    """Stagewise fit of depth-limited trees to the current residuals.

    Returns ``(init, trees, train_mse)`` where ``train_mse[s]`` is the
    training MSE after stage ``s + 1``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    order = presort(X)
    init = float(y.mean())
    pred = np.full(len(y), init)
    trees: list[Tree] = []
    mse = []
    for _ in range(n_stages):
        tree, leaf = build_tree(X, y - pred, max_depth=max_depth, min_leaf=min_leaf, order=order)
        pred = pred + learning_rate * tree.value[leaf]
        trees.append(tree)
        r = y - pred
        mse.append(float(r @ r) / len(y))
    return init, trees, mse


def predict_gbt(init, trees, learning_rate, X):
    X = np.asarray(X, dtype=float)
    out = np.full(len(X), init)
    for tree in trees:
        out = out + learning_rate * tree.predict(X)
    return out
