"""Correlation studies and univariate F-statistic feature ranking."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ConstantInput, DegenerateSample, ShapeMismatch
from .panel import PanelDataset

# stands in for F = +inf when a feature fits the target perfectly
F_SENTINEL = 1e308


class RankingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RankEntry:
    name: str
    f_stat: float
    rank: int


@dataclass(frozen=True)
class FeatureRanking:
    entries: tuple[RankEntry, ...]
    n: int = 0
    warnings: tuple[str, ...] = ()

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def top(self, n: int) -> list[str]:
        return self.names[:n]

    def __len__(self):
        return len(self.entries)

    def to_rows(self):
        return [(e.rank, e.name, e.f_stat) for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [{"rank": e.rank, "signal": e.name, "f_statistic": e.f_stat} for e in self.entries],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_scores(cls, scores: dict[str, float], n: int = 0, notes=()) -> "FeatureRanking":
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(
            tuple(RankEntry(name, float(f), i + 1) for i, (name, f) in enumerate(ordered)),
            n=n,
            warnings=tuple(notes),
        )


@dataclass(frozen=True)
class CorrelationReport:
    columns: tuple[str, ...]
    matrix: np.ndarray
    pairs: tuple[tuple[str, str, float, float], ...]  # (a, b, r, p); r, p nan if undefined
    n: int
    threshold: float
    flagged: tuple[tuple[str, str, float, float], ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "n": self.n,
            "highlight_threshold": self.threshold,
            "matrix": self.matrix,
            "pairs": [{"a": a, "b": b, "r": r, "p_value": p} for a, b, r, p in self.pairs],
            "flagged": [{"a": a, "b": b, "r": r, "p_value": p} for a, b, r, p in self.flagged],
        }


def _as_pair(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeMismatch(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise DegenerateSample("correlation needs at least 2 samples")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation; raises :class:`ConstantInput` on zero variance."""
    x, y = _as_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx == 0.0 or syy == 0.0:
        raise ConstantInput("pearson correlation undefined for a constant vector")
    r = (dx @ dy) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p-value for H0: rho = 0 with n - 2 degrees of freedom.

    Uses P(|T| > t) = I_{df/(df + t^2)}(df/2, 1/2) and the identity
    df / (df + t^2) = 1 - r^2, so r = +-1 maps to exactly 0.
    """
    if n < 3:
        raise DegenerateSample(f"p-value needs n >= 3, got {n}")
    r = float(r)
    if abs(r) > 1.0:
        raise ValueError(f"|r| must be <= 1, got {r}")
    if abs(r) == 1.0:
        return 0.0
    df = n - 2
    p = special.betainc(0.5 * df, 0.5, 1.0 - r * r)
    return float(min(1.0, max(0.0, p)))


def correlation_matrix(ds: PanelDataset, cols: Sequence[str], threshold: float = 0.5) -> CorrelationReport:
    cols = list(cols)
    idx = [ds.index(c) for c in cols]
    block = ds.values[:, idx]
    block = block[~np.isnan(block).any(axis=1)]
    n = len(block)
    if n < 2:
        raise DegenerateSample(f"need >= 2 complete rows, have {n}")
    k = len(cols)
    mat = np.eye(k)
    pairs = []
    for a in range(k):
        for b in range(a + 1, k):
            try:
                r = pearson(block[:, a], block[:, b])
                p = pearson_p_value(r, n) if n >= 3 else math.nan
            except ConstantInput:
                r = p = math.nan
            mat[a, b] = mat[b, a] = r
            pairs.append((cols[a], cols[b], r, p))
    flagged = tuple(pr for pr in pairs if not math.isnan(pr[2]) and abs(pr[2]) > threshold)
    return CorrelationReport(tuple(cols), mat, tuple(pairs), n, threshold, flagged)


def f_regression(ds: PanelDataset, features: Sequence[str], target: str | None = None) -> FeatureRanking:
    """Rank features by the one-feature regression F statistic.

    ``F_j = r_j^2 / (1 - r_j^2) * (n - 2)`` over rows complete in every
    listed feature and the target.  Constant features score 0 and perfect
    fits score :data:`F_SENTINEL`; both emit a :class:`RankingWarning`.
    """
    target = target or ds.target
    features = list(features)
    block = ds.matrix(features + [target])
    block = block[~np.isnan(block).any(axis=1)]
    return f_regression_arrays(block[:, :-1], block[:, -1], features)


def f_regression_arrays(X, y, names: Sequence[str]) -> FeatureRanking:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 3:
        raise DegenerateSample(f"f_regression needs n >= 3 complete rows, have {n}")
    if X.shape != (n, len(names)):
        raise ShapeMismatch(f"X has shape {X.shape}, expected ({n}, {len(names)})")
    notes = []
    scores = {}
    for j, name in enumerate(names):
        try:
            r = pearson(X[:, j], y)
        except ConstantInput:
            notes.append(f"{name}: constant input, F set to 0")
            scores[name] = 0.0
            continue
        r2 = r * r
        if r2 >= 1.0:
            notes.append(f"{name}: perfect fit, F set to sentinel")
            scores[name] = F_SENTINEL
        else:
            scores[name] = min(r2 / (1.0 - r2) * (n - 2), F_SENTINEL)
    for note in notes:
        warnings.warn(note, RankingWarning, stacklevel=3)
    return FeatureRanking.from_scores(scores, n=n, notes=notes)
