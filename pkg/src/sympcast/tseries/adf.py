"""Augmented Dickey-Fuller unit-root test, constant term, no trend."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConstantSeries, SeriesTooShort

# MacKinnon (1994/2010) asymptotic critical values, constant-only regression
CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}
MIN_EFFECTIVE = 20


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    n_effective: int
    critical_values: dict
    reject_at_5pct: bool
    max_lag: int = 0

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "lags_used": self.lags_used,
            "n_effective": self.n_effective,
            "max_lag": self.max_lag,
            "critical_values": dict(self.critical_values),
            "reject_at_5pct": self.reject_at_5pct,
        }


def schwert_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _design(y, lags, start):
    """Rows t = start..n-1 of [1, y_{t-1}, dy_{t-1}, ..., dy_{t-lags}] and dy_t."""
    dy = np.diff(y)
    # dy[j] = y[j+1] - y[j]; the equation for dy[t] uses y[t] and dy[t-1..t-lags]
    t = np.arange(start, len(dy))
    cols = [np.ones(len(t)), y[t]]
    cols += [dy[t - i] for i in range(1, lags + 1)]
    return np.column_stack(cols), dy[t]


def _ols(Z, target):
    beta, _, rank, _ = np.linalg.lstsq(Z, target, rcond=None)
    resid = target - Z @ beta
    return beta, float(resid @ resid), rank


def adf_test(y, max_lag: int | None = None) -> AdfResult:
    """Test H0: unit root, against a stationary alternative with nonzero mean.

    The augmentation lag is chosen by AIC over ``0..max_lag`` on a common
    sample (the first ``max_lag`` differences reserved), then the chosen
    regression is re-estimated on every available observation.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    if n < 3 or np.ptp(y) == 0.0:
        if n >= 2 and np.ptp(y) == 0.0:
            raise ConstantSeries("ADF test undefined for a constant series")
        raise SeriesTooShort(f"series of length {n} is too short")
    if max_lag is None:
        max_lag = schwert_max_lag(n)
    max_lag = int(max_lag)
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    n_common = n - 1 - max_lag
    if n_common < MIN_EFFECTIVE:
        raise SeriesTooShort(
            f"only {n_common} usable observations after differencing and {max_lag} lags; need {MIN_EFFECTIVE}"
        )

    best_lag, best_aic = 0, math.inf
    for lags in range(max_lag + 1):
        Z, target = _design(y, lags, max_lag)
        _, ssr, _ = _ols(Z, target)
        nobs = len(target)
        if ssr <= 0.0:
            aic = -math.inf
        else:
            llf = -0.5 * nobs * (math.log(2 * math.pi) + math.log(ssr / nobs) + 1.0)
            aic = -2.0 * llf + 2.0 * Z.shape[1]
        if aic < best_aic:
            best_lag, best_aic = lags, aic

    Z, target = _design(y, best_lag, best_lag)
    beta, ssr, rank = _ols(Z, target)
    nobs, kp = Z.shape
    if rank < kp or nobs <= kp:
        raise ConstantSeries("ADF regression is rank deficient")
    sigma2 = ssr / (nobs - kp)
    cov = sigma2 * np.linalg.inv(Z.T @ Z)
    se = math.sqrt(cov[1, 1])
    stat = float(beta[1] / se) if se > 0 else -math.inf
    return AdfResult(
        statistic=stat,
        lags_used=best_lag,
        n_effective=nobs,
        critical_values=dict(CRITICAL_VALUES),
        reject_at_5pct=bool(stat < CRITICAL_VALUES["5%"]),
        max_lag=max_lag,
    )
