"""Ordinary least squares with intercept."""
from __future__ import annotations

import numpy as np
from scipy import linalg

RIDGE_JITTER = 1e-10


def fit_ols(X, y):
    """Solve the normal equations ``[1 X]' [1 X] b = [1 X]' y``.

    Cholesky solve on the Gram matrix; if the Gram matrix is not positive
    definite a ridge of ``RIDGE_JITTER`` is added to its diagonal.  One step
    of iterative refinement follows.

    Returns
    -------
    coef : ndarray (k,)
    intercept : float
    jittered : bool
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([np.ones(len(X)), X])
    gram = A.T @ A
    jittered = False
    try:
        factor = linalg.cho_factor(gram, check_finite=False)
        # roundoff can let an exactly singular Gram matrix factor; a squared
        # pivot is the share of a column's norm left after the earlier
        # columns, so compare it with that column's own norm
        pivots = np.diag(factor[0]) ** 2
        if (pivots <= len(gram) * np.finfo(float).eps * gram.diagonal()).any():
            raise linalg.LinAlgError("numerically singular Gram matrix")
    except linalg.LinAlgError:
        jittered = True
        factor = linalg.cho_factor(gram + RIDGE_JITTER * np.eye(len(gram)), check_finite=False)
    beta = linalg.cho_solve(factor, A.T @ y, check_finite=False)
    beta = beta + linalg.cho_solve(factor, A.T @ (y - A @ beta), check_finite=False)
    return beta[1:], float(beta[0]), jittered
