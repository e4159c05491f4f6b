from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Multi-step forecast for one region, optionally scored against actuals."""

    horizon: int
    forecast: np.ndarray  # (h, k)
    target_index: int
    columns: tuple[str, ...] = ()
    region: str = ""
    model: str = ""
    dates: tuple[str, ...] = ()
    actuals: np.ndarray | None = None  # (h,) target column
    mae: float | None = None
    mre: float | None = None
    dtw_distance: float | None = None
    metrics_defined: bool = True
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        f = np.asarray(self.forecast, dtype=float)
        if f.ndim == 1:
            f = f.reshape(self.horizon, -1) if f.size else f.reshape(0, 0)
        if f.ndim != 2 or len(f) != self.horizon:
            raise ValueError("forecast row count must equal horizon")
        object.__setattr__(self, "forecast", f)

    @property
    def target_forecast(self) -> np.ndarray:
        return self.forecast[:, self.target_index]

    def to_dict(self) -> dict:
        per_step = []
        for s in range(self.horizon):
            per_step.append(
                {
                    "step": s + 1,
                    "date": self.dates[s] if self.dates else None,
                    "forecast": float(self.target_forecast[s]),
                    "actual": None if self.actuals is None else float(self.actuals[s]),
                }
            )
        return {
            "region": self.region,
            "model": self.model,
            "horizon": self.horizon,
            "target": self.columns[self.target_index] if self.columns else None,
            "columns": list(self.columns),
            "per_step": per_step,
            "mae": self.mae,
            "mre": self.mre,
            "dtw_distance": self.dtw_distance,
            "metrics_defined": self.metrics_defined,
            "warnings": list(self.warnings),
        }

    def plot_rows(self):
        """``(date, actual, forecast)`` tuples for the plot CSV."""
        for s in range(self.horizon):
            actual = np.nan if self.actuals is None else self.actuals[s]
            date = self.dates[s] if self.dates else str(s + 1)
            yield date, float(actual), float(self.target_forecast[s])
