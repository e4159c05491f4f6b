"""Symptom-survey panel toolkit: ranking, regression, forecasting, ablation."""

__version__ = "0.1.0"
