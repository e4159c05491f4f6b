"""Stationarity testing and multivariate multi-step forecasting."""
from __future__ import annotations

from .adf import CRITICAL_VALUES, AdfResult, adf_test, schwert_max_lag
from .lstm import LstmConfig, LstmModel, lstm_fit, lstm_rollout
from .result import ForecastResult
from .var import VarModel, var_fit, var_rollout


def var_forecast(model: VarModel, history, h: int, target_index: int = 0) -> ForecastResult:
    return ForecastResult(h, var_rollout(model, history, h), target_index, model="var")


def lstm_forecast(model: LstmModel, history, h: int, target_index: int = 0) -> ForecastResult:
    return ForecastResult(h, lstm_rollout(model, history, h), target_index, model="lstm")


__all__ = [
    "AdfResult",
    "CRITICAL_VALUES",
    "ForecastResult",
    "LstmConfig",
    "LstmModel",
    "VarModel",
    "adf_test",
    "lstm_fit",
    "lstm_forecast",
    "lstm_rollout",
    "schwert_max_lag",
    "var_fit",
    "var_forecast",
    "var_rollout",
]
