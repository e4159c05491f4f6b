"""Shared builders for tests."""
import numpy as np

from sympcast.panel import ColumnMeta, PanelDataset


def make_ds(names_kinds, values, region=None, dates=None, target="target"):
    values = np.asarray(values, dtype=float)
    n = len(values)
    region = region if region is not None else ["A"] * n
    dates = dates if dates is not None else np.datetime64("2020-01-01") + np.arange(n)
    cols = tuple(ColumnMeta(nm, kd, "percent" if kd != "other" else "unitless") for nm, kd in names_kinds)
    return PanelDataset(region=np.array(region, dtype=object), date=dates, columns=cols, values=values, target=target)
