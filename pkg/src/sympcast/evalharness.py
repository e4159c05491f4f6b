"""Error metrics and the experiment protocols built on them.

Every protocol is a pure function of its inputs and ``base_seed``: run ``i``
always splits with seed ``base_seed + i``, so results do not depend on how
runs are scheduled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._parallel import pmap
from .errors import (
    EmptyInput,
    SeriesTooShort,
    ShapeMismatch,
    SympcastError,
    ValidationError,
)
from .panel import PanelDataset, SplitSpec, split
from .rankcorr import FeatureRanking
from .regress import ModelSpec, fit
from .shapecluster import dtw
from .tseries import ForecastResult, LstmConfig, adf_test, lstm_fit, lstm_rollout, var_fit, var_rollout
from .tseries.var import DEFAULT_P_MAX


class NegativeActualWarning(UserWarning):
    pass


# -- metrics -----------------------------------------------------------------


def _pair(pred, actual):
    pred = np.asarray(pred, dtype=float).ravel()
    actual = np.asarray(actual, dtype=float).ravel()
    if pred.shape != actual.shape:
        raise ShapeMismatch(f"{pred.size} predictions for {actual.size} actuals")
    if pred.size == 0:
        raise EmptyInput("metrics need at least one pair")
    return pred, actual


def mae(pred, actual) -> float:
    """Mean absolute error."""
    pred, actual = _pair(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def mre(pred, actual) -> float:
    """Mean relative error in percent, ``100 * mean(|pred - actual| / (actual + 1))``.

    The +1 keeps zero actuals finite; it assumes actuals are percentages
    (nonnegative), and negative actuals only trigger a warning.
    """
    pred, actual = _pair(pred, actual)
    if (actual < 0).any():
        warnings.warn("negative actual values in MRE", NegativeActualWarning, stacklevel=2)
    return float(100.0 * np.mean(np.abs(pred - actual) / (actual + 1.0)))


@dataclass(frozen=True)
class EvalMetrics:
    mae: float
    mre_percent: float
    n: int

    @classmethod
    def of(cls, pred, actual) -> "EvalMetrics":
        return cls(mae(pred, actual), mre(pred, actual), len(np.ravel(actual)))

    def to_dict(self) -> dict:
        return {"mae": self.mae, "mre_percent": self.mre_percent, "n": self.n}


def confidence_interval(values, level=0.95, method="t"):
    """Two-sided interval for the mean; ``(m, m)`` with a flag when n < 2.

    Returns ``(low, high, degenerate)``.
    """
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    if len(v) < 2:
        return m, m, True
    se = float(v.std(ddof=1)) / math.sqrt(len(v))
    q = 0.5 + level / 2.0
    if method == "t":
        crit = float(stats.t.ppf(q, len(v) - 1))
    elif method == "normal":
        crit = float(stats.norm.ppf(q))
    else:
        raise ValidationError(f"unknown CI method {method!r}")
    return m - crit * se, m + crit * se, False


@dataclass(frozen=True)
class RepeatedEval:
    features: tuple[str, ...]
    runs: tuple[EvalMetrics, ...]
    mean_mae: float
    mean_mre: float
    mre_ci_95: tuple[float, float]
    degenerate_ci: bool = False
    ci_method: str = "t"
    base_seed: int = 0

    @property
    def n_features(self) -> int:
        return len(self.features)

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "n_features": self.n_features,
            "runs": [r.to_dict() for r in self.runs],
            "n_runs": len(self.runs),
            "mean_mae": self.mean_mae,
            "mean_mre": self.mean_mre,
            "mre_ci_95": list(self.mre_ci_95),
            "degenerate_ci": self.degenerate_ci,
            "ci_method": self.ci_method,
            "base_seed": self.base_seed,
        }


def _names(ranking) -> list[str]:
    return ranking.names if isinstance(ranking, FeatureRanking) else list(ranking)


def evaluate_features(
    ds: PanelDataset,
    features: Sequence[str],
    model_spec: ModelSpec,
    runs: int = 20,
    base_seed: int = 0,
    train_fraction: float = 0.8,
    ci_method: str = "t",
) -> RepeatedEval:
    """Random-split evaluation of one feature set, repeated ``runs`` times."""
    features = list(features)
    if not features:
        raise ValidationError("no features to evaluate")
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    data = ds.take(np.flatnonzero(ds.complete_rows(features)))

    def one(i):
        try:
            train, test = split(data, SplitSpec("random_row", train_fraction, seed=base_seed + i))
            Xtr, ytr = train.xy(features)
            Xte, yte = test.xy(features)
            model = fit(model_spec, Xtr, ytr, features)
            return EvalMetrics.of(model.predict(Xte), yte)
        except SympcastError as e:
            raise type(e)(f"run {i}: {e}") from e

    results = pmap(one, range(runs))
    mres = [r.mre_percent for r in results]
    lo, hi, degenerate = confidence_interval(mres, method=ci_method)
    return RepeatedEval(
        features=tuple(features),
        runs=tuple(results),
        mean_mae=float(np.mean([r.mae for r in results])),
        mean_mre=float(np.mean(mres)),
        mre_ci_95=(lo, hi),
        degenerate_ci=degenerate,
        ci_method=ci_method,
        base_seed=base_seed,
    )


def repeated_eval(ds, ranking, n_features, model_spec, runs=20, base_seed=0, **kw) -> RepeatedEval:
    names = _names(ranking)
    if not 1 <= n_features <= len(names):
        raise ValidationError(f"n_features={n_features} outside 1..{len(names)}")
    return evaluate_features(ds, names[:n_features], model_spec, runs, base_seed, **kw)


# -- sweeps and ablations ----------------------------------------------------


@dataclass(frozen=True)
class SweepReport:
    per_n: tuple[tuple[int, RepeatedEval], ...]
    best_n: int
    ranking: tuple[str, ...]
    model: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "ranking": list(self.ranking),
            "best_n": self.best_n,
            "per_n": [{"n": n, **ev.to_dict()} for n, ev in self.per_n],
        }

    def trajectory(self):
        return [(n, ev.mean_mre, ev.mre_ci_95[0], ev.mre_ci_95[1]) for n, ev in self.per_n]


def top_n_sweep(ds, ranking, model_spec, n_range=None, runs=20, base_seed=0, **kw) -> SweepReport:
    names = _names(ranking)
    if not names:
        raise ValidationError("ranking is empty")
    n_range = list(n_range) if n_range is not None else list(range(1, len(names) + 1))
    per_n = tuple((n, repeated_eval(ds, names, n, model_spec, runs, base_seed, **kw)) for n in n_range)
    best_n = min(per_n, key=lambda item: (item[1].mean_mre, item[0]))[0]
    return SweepReport(per_n, best_n, tuple(names), model_spec.kind)


@dataclass(frozen=True)
class AblationReport:
    mode: str
    features: tuple[str, ...]
    baseline: RepeatedEval
    steps: tuple[tuple[tuple[str, ...], RepeatedEval], ...]  # (dropped, evaluation)
    order: str = ""

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "order": self.order or None,
            "features": list(self.features),
            "baseline": self.baseline.to_dict(),
            "steps": [
                {"step": i + 1, "dropped": list(dropped), **ev.to_dict()}
                for i, (dropped, ev) in enumerate(self.steps)
            ],
        }

    def trajectory(self):
        rows = [(0, self.baseline.mean_mre, *self.baseline.mre_ci_95)]
        for i, (_, ev) in enumerate(self.steps):
            rows.append((i + 1, ev.mean_mre, *ev.mre_ci_95))
        return rows

    def step_mres(self) -> np.ndarray:
        return np.array([ev.mean_mre for _, ev in self.steps])


def ablate_all_but_one(ds, top_features, model_spec, runs=20, base_seed=0, **kw) -> AblationReport:
    """Drop each of the top N features in turn, most important first."""
    feats = list(top_features)
    if len(feats) < 2:
        raise ValidationError("all-but-one ablation needs N >= 2 features")
    baseline = evaluate_features(ds, feats, model_spec, runs, base_seed, **kw)
    steps = tuple(
        ((f,), evaluate_features(ds, [g for g in feats if g != f], model_spec, runs, base_seed, **kw))
        for f in feats
    )
    return AblationReport("all_but_one", tuple(feats), baseline, steps)


def ablate_cumulative(ds, top_features, model_spec, runs=20, base_seed=0, order="least_first", **kw) -> AblationReport:
    """Remove 1, 2, ..., N-1 features, least or most important first."""
    feats = list(top_features)
    if len(feats) < 2:
        raise ValidationError("cumulative ablation needs N >= 2 features")
    if order not in ("least_first", "most_first"):
        raise ValidationError(f"unknown drop order {order!r}")
    drop_seq = feats[::-1] if order == "least_first" else feats
    baseline = evaluate_features(ds, feats, model_spec, runs, base_seed, **kw)
    steps = []
    for i in range(1, len(feats)):
        dropped = drop_seq[:i]
        kept = [f for f in feats if f not in dropped]
        steps.append((tuple(dropped), evaluate_features(ds, kept, model_spec, runs, base_seed, **kw)))
    return AblationReport("cumulative", tuple(feats), baseline, tuple(steps), order)


# -- forecasting backtest ----------------------------------------------------


def forecast_backtest(
    ds: PanelDataset,
    region: str,
    features: Sequence[str],
    model: str = "var",
    horizon: int = 30,
    p_max: int = DEFAULT_P_MAX,
    lstm_config: LstmConfig | None = None,
) -> ForecastResult:
    """Hold out the last ``horizon`` days of one region and forecast them.

    The model sees the listed features plus the target.  Percent targets are
    clipped to [0, 100] before scoring; the model itself is never clipped.
    """
    if model not in ("var", "lstm"):
        raise ValidationError(f"unknown forecast model {model!r}; choose var or lstm")
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    cols = [f for f in features if f != ds.target] + [ds.target]
    target_index = len(cols) - 1
    dates, block = ds.region_series(region, cols)
    keep = ~np.isnan(block).any(axis=1)
    dates, block = dates[keep], block[keep]
    if horizon == 0:
        return ForecastResult(
            0, np.empty((0, len(cols))), target_index, tuple(cols), region, model, metrics_defined=False
        )
    if len(block) <= horizon + 2:
        raise SeriesTooShort(f"region {region!r} has {len(block)} rows for horizon {horizon}")
    train, test = block[:-horizon], block[-horizon:]
    notes = []
    try:
        res = adf_test(train[:, target_index])
        if not res.reject_at_5pct:
            notes.append(
                f"target not stationary by ADF (stat {res.statistic:.3f} >= {res.critical_values['5%']})"
            )
    except SympcastError as e:
        notes.append(f"ADF skipped: {e}")

    k = len(cols)
    if model == "var":
        feasible = (len(train) - 2) // (k + 1)
        p_eff = min(p_max, feasible)
        if p_eff < 1:
            raise SeriesTooShort(f"region {region!r}: {len(train)} training rows too few for VAR with k={k}")
        fc = var_rollout(var_fit(train, p_eff), train, horizon)
    else:
        cfg = lstm_config or LstmConfig()
        fc = lstm_rollout(lstm_fit(train, cfg), train, horizon)

    pred = fc[:, target_index]
    if ds.meta(ds.target).units == "percent":
        pred = np.clip(pred, 0.0, 100.0)
        fc = fc.copy()
        fc[:, target_index] = pred
    actual = test[:, target_index]
    return ForecastResult(
        horizon=horizon,
        forecast=fc,
        target_index=target_index,
        columns=tuple(cols),
        region=region,
        model=model,
        dates=tuple(str(d) for d in dates[-horizon:]),
        actuals=actual,
        mae=mae(pred, actual),
        mre=mre(pred, actual),
        dtw_distance=dtw(pred, actual).distance,
        warnings=tuple(notes),
    )
