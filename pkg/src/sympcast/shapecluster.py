"""Agglomerative clustering of region profiles and DTW curve comparison."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CountExceedsClusters,
    DimensionMismatch,
    EmptySeries,
    KTooLarge,
    ValidationError,
)
from .panel import PanelDataset

LINKAGES = ("average", "single", "complete")


@dataclass(frozen=True)
class ClusterAssignment:
    items: tuple[str, ...]
    labels: tuple[int, ...]
    k: int
    linkage: str
    # (cluster_a, cluster_b, distance); leaves are 0..n-1 in item order,
    # the i-th merge creates cluster n + i
    linkage_trace: tuple[tuple[int, int, float], ...]

    def members(self, label: int) -> list[str]:
        return [it for it, lab in zip(self.items, self.labels) if lab == label]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "linkage": self.linkage,
            "labels": {it: lab for it, lab in zip(self.items, self.labels)},
            "trace": [{"a": a, "b": b, "distance": d} for a, b, d in self.linkage_trace],
        }


@dataclass(frozen=True)
class DtwResult:
    distance: float
    path: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {"distance": self.distance, "path": [list(p) for p in self.path]}


def region_profiles(ds: PanelDataset, features: Sequence[str], mode: str = "mean") -> dict[str, np.ndarray]:
    """Per-region feature vectors: time-averaged signals, or the flattened series."""
    out = {}
    for reg in ds.regions:
        _, block = ds.region_series(reg, features)
        if mode == "mean":
            out[reg] = np.nanmean(block, axis=0)
        elif mode == "flatten":
            out[reg] = block.ravel()
        else:
            raise ValidationError(f"unknown profile mode {mode!r}")
    return out


def agglomerate(profiles: Mapping[str, Sequence[float]], k: int, linkage: str = "average") -> ClusterAssignment:
    """Bottom-up Euclidean clustering down to ``k`` clusters.

    Items are processed in sorted id order, and among equal merge distances
    the pair whose (smaller member id, larger member id) is lexicographically
    smallest merges first, so the result does not depend on input order.
    """
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    items = tuple(sorted(profiles))
    n = len(items)
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the {n} profiles")
    vecs = [np.asarray(profiles[it], dtype=float).ravel() for it in items]
    if len({v.size for v in vecs}) > 1:
        raise DimensionMismatch("profile vectors differ in length")
    X = np.vstack(vecs)
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(D, np.inf)

    active = np.ones(n, bool)
    size = np.ones(n)
    rep = np.arange(n)  # smallest member index of the cluster held in each slot
    node_id = np.arange(n)
    owner = np.arange(n)  # slot holding each item
    trace = []
    for step in range(n - k):
        best = D.min()
        cand = np.argwhere(D == best)
        cand = cand[cand[:, 0] < cand[:, 1]]
        keys = [(min(rep[a], rep[b]), max(rep[a], rep[b])) for a, b in cand]
        a, b = cand[min(range(len(cand)), key=keys.__getitem__)]
        lo, hi = sorted((node_id[a], node_id[b]))
        trace.append((int(lo), int(hi), float(best)))

        if linkage == "single":
            merged = np.minimum(D[a], D[b])
        elif linkage == "complete":
            merged = np.maximum(D[a], D[b])
        else:
            merged = (size[a] * D[a] + size[b] * D[b]) / (size[a] + size[b])
        merged[~active] = np.inf
        D[a, :] = merged
        D[:, a] = merged
        D[a, a] = np.inf
        D[b, :] = np.inf
        D[:, b] = np.inf
        active[b] = False
        size[a] += size[b]
        rep[a] = min(rep[a], rep[b])
        node_id[a] = n + step
        owner[owner == b] = a

    slots = sorted({int(s) for s in owner}, key=lambda s: rep[s])
    label_of_slot = {s: i for i, s in enumerate(slots)}
    labels = tuple(label_of_slot[int(owner[i])] for i in range(n))
    return ClusterAssignment(items, labels, k, linkage, tuple(trace))


def sample_cross_cluster(assign: ClusterAssignment, count: int, seed: int = 0) -> list[str]:
    """One region from each of ``count`` distinct, randomly chosen clusters."""
    if count > assign.k:
        raise CountExceedsClusters(f"asked for {count} regions from {assign.k} clusters")
    if count < 0:
        raise ValidationError("count must be nonnegative")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(assign.k, size=count, replace=False)
    picks = []
    for lab in chosen:
        members = assign.members(int(lab))
        picks.append(members[int(rng.integers(len(members)))])
    return picks


def dtw(a: Sequence[float], b: Sequence[float]) -> DtwResult:
    """Unconstrained DTW with ``|a_i - b_j|`` cost and unit steps.

    Backtracking prefers the diagonal predecessor, then ``(i-1, j)``, then
    ``(i, j-1)`` when cumulative costs tie.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise EmptySeries("DTW needs two nonempty series")
    cost = np.abs(a[:, None] - b[None, :]).tolist()
    D = [[0.0] * m for _ in range(n)]
    inf = float("inf")
    for i in range(n):
        Di, ci = D[i], cost[i]
        Dp = D[i - 1] if i else None
        for j in range(m):
            if i == 0 and j == 0:
                Di[j] = ci[j]
                continue
            best = inf
            if i and j:
                best = Dp[j - 1]
            if i and Dp[j] < best:
                best = Dp[j]
            if j and Di[j - 1] < best:
                best = Di[j - 1]
            Di[j] = ci[j] + best

    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i or j:
        options = []
        if i and j:
            options.append((D[i - 1][j - 1], 0, i - 1, j - 1))
        if i:
            options.append((D[i - 1][j], 1, i - 1, j))
        if j:
            options.append((D[i][j - 1], 2, i, j - 1))
        _, _, i, j = min(options)
        path.append((i, j))
    path.reverse()
    return DtwResult(float(D[n - 1][m - 1]), tuple(path))
