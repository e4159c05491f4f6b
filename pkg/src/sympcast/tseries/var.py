"""Vector autoregression: per-equation OLS, AIC lag selection, recursive forecasts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientHistory, SeriesTooShort, SingularDesign, ValidationError

DEFAULT_P_MAX = 7
# column-normalised design with a larger condition number counts as collinear
_COND_LIMIT = 1e10


@dataclass(frozen=True, eq=False)
class VarModel:
    p: int
    k: int
    intercept: np.ndarray  # (k,)
    coefs: np.ndarray  # (p, k, k); coefs[i] multiplies y_{t-1-i}
    aic: float
    sigma_u: np.ndarray | None = None
    aic_by_lag: dict = field(default_factory=dict)

    @property
    def coefficient_matrices(self) -> list[np.ndarray]:
        return [self.coefs[i] for i in range(self.p)]

    def implied_mean(self) -> np.ndarray:
        """Unconditional mean ``(I - sum A_i)^{-1} c`` of a stable model."""
        return np.linalg.solve(np.eye(self.k) - self.coefs.sum(axis=0), self.intercept)

    def is_stable(self) -> bool:
        return bool(np.max(np.abs(np.linalg.eigvals(companion(self.coefs)))) < 1.0) if self.p else True

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "intercept": self.intercept,
            "coefficient_matrices": self.coefs,
            "aic": self.aic,
            "aic_by_lag": {str(k): v for k, v in self.aic_by_lag.items()},
        }


def companion(coefs: np.ndarray) -> np.ndarray:
    p, k, _ = coefs.shape
    top = np.concatenate(list(coefs), axis=1)
    if p == 1:
        return top
    lower = np.eye(k * (p - 1), k * p)
    return np.vstack([top, lower])


def lag_design(Y: np.ndarray, p: int, start: int):
    """Rows t = start..T-1 of ``[1, y_{t-1}, ..., y_{t-p}]`` and targets ``y_t``."""
    T = len(Y)
    t = np.arange(start, T)
    blocks = [np.ones((len(t), 1))] + [Y[t - i] for i in range(1, p + 1)]
    return np.hstack(blocks), Y[t]


def _is_collinear(Z: np.ndarray) -> bool:
    norms = np.linalg.norm(Z, axis=0)
    if (norms == 0).any():
        return True
    s = np.linalg.svd(Z / norms, compute_uv=False)
    return s[-1] <= s[0] / _COND_LIMIT


def _ols(Z, target):
    B, *_ = np.linalg.lstsq(Z, target, rcond=None)
    resid = target - Z @ B
    return B, resid


def _aic(resid: np.ndarray, k: int, p: int) -> float:
    t_eff = len(resid)
    sigma = resid.T @ resid / t_eff
    sign, logdet = np.linalg.slogdet(sigma)
    ld = logdet if sign > 0 else -math.inf
    return ld + 2.0 * (k * k * p + k) / t_eff


def var_fit(Y, p_max: int = DEFAULT_P_MAX) -> VarModel:
    """Fit VAR(p) for p in 1..p_max and keep the AIC minimiser.

    Candidates are compared on the common sample ``t >= p_max``; the winner
    is re-estimated on every observation it can use.  Candidates whose lag
    design is collinear are skipped; if all are, :class:`SingularDesign`
    names the smallest offending lag.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, k = Y.shape
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    if np.isnan(Y).any():
        raise ValidationError("VAR input contains missing values")
    need = k * p_max + p_max + 2
    if T < need:
        raise SeriesTooShort(f"VAR with k={k}, p_max={p_max} needs T >= {need}, have {T}")
    if (np.ptp(Y, axis=0) == 0).any():
        col = int(np.flatnonzero(np.ptp(Y, axis=0) == 0)[0])
        raise SingularDesign(f"series column {col} is constant", lag=1)

    aics = {}
    first_singular = None
    for p in range(1, p_max + 1):
        Z, target = lag_design(Y, p, p_max)
        if _is_collinear(Z):
            first_singular = first_singular or p
            continue
        _, resid = _ols(Z, target)
        aics[p] = _aic(resid, k, p)
    if not aics:
        raise SingularDesign(f"collinear lag design at p={first_singular}", lag=first_singular)
    best = min(aics, key=lambda p: (aics[p], p))

    Z, target = lag_design(Y, best, best)
    if _is_collinear(Z):
        raise SingularDesign(f"collinear lag design at p={best}", lag=best)
    B, resid = _ols(Z, target)
    coefs = B[1:].reshape(best, k, k).transpose(0, 2, 1)
    return VarModel(
        p=best,
        k=k,
        intercept=B[0].copy(),
        coefs=np.ascontiguousarray(coefs),
        aic=aics[best],
        sigma_u=resid.T @ resid / len(resid),
        aic_by_lag=aics,
    )


def var_rollout(model: VarModel, history, h: int) -> np.ndarray:
    """``h`` recursive one-step forecasts from the last ``p`` rows of history."""
    history = np.asarray(history, dtype=float)
    if history.ndim == 1:
        history = history[:, None]
    if h < 0:
        raise ValidationError("horizon must be nonnegative")
    if len(history) < model.p:
        raise InsufficientHistory(f"need {model.p} history rows, have {len(history)}")
    buf = [row for row in history[len(history) - model.p :]] if model.p else []
    out = np.empty((h, model.k))
    for s in range(h):
        nxt = model.intercept.copy()
        for i in range(model.p):
            nxt = nxt + model.coefs[i] @ buf[-1 - i]
        out[s] = nxt
        buf.append(nxt)
    return out
