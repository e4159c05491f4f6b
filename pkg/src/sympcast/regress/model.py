"""One contract over the three cross-sectional regressors."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..errors import EmptyInput, ShapeMismatch, ValidationError
from .boosting import fit_gbt, predict_gbt
from .linear import fit_ols
from .tree import Tree, build_tree

MODEL_KINDS = ("linear", "tree", "gbt")
FORMAT = "sympcast-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "gbt"
    tree_max_depth: int = 3
    tree_min_leaf: int = 5
    gbt_stages: int = 100
    gbt_learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}; choose from {', '.join(MODEL_KINDS)}")
        for name in ("tree_max_depth", "tree_min_leaf", "gbt_stages"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be a positive integer")
        if not 0.0 < self.gbt_learning_rate <= 1.0:
            raise ValidationError("gbt_learning_rate must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class FittedModel:
    spec: ModelSpec
    feature_names: tuple[str, ...]
    params: dict
    train_diagnostics: tuple[float, ...] = field(default=())

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict(self, X) -> np.ndarray:
        return predict(self, X)

    # serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        kind = self.spec.kind
        if kind == "linear":
            params = {"coef": self.params["coef"].tolist(), "intercept": self.params["intercept"]}
        elif kind == "tree":
            params = {"tree": self.params["tree"].to_dict()}
        else:
            params = {
                "init": self.params["init"],
                "trees": [t.to_dict() for t in self.params["trees"]],
            }
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "kind": kind,
            "spec": asdict(self.spec),
            "feature_names": list(self.feature_names),
            "params": params,
            "train_diagnostics": list(self.train_diagnostics),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "FittedModel":
        if d.get("format") != FORMAT or d.get("version") != FORMAT_VERSION:
            raise ValidationError("not a version-1 sympcast model document")
        spec = ModelSpec(**d["spec"])
        p = d["params"]
        if spec.kind == "linear":
            params = {"coef": np.asarray(p["coef"], dtype=float), "intercept": float(p["intercept"])}
        elif spec.kind == "tree":
            params = {"tree": Tree.from_dict(p["tree"])}
        else:
            params = {"init": float(p["init"]), "trees": [Tree.from_dict(t) for t in p["trees"]]}
        return cls(spec, tuple(d["feature_names"]), params, tuple(d.get("train_diagnostics", ())))

    @classmethod
    def loads(cls, text: str) -> "FittedModel":
        return cls.from_dict(json.loads(text))


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise ShapeMismatch(f"X shape {X.shape} incompatible with y shape {y.shape}")
    if len(y) == 0:
        raise EmptyInput("no training rows")
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValidationError("missing values in training data")
    return X, y


def fit(spec: ModelSpec, X, y, feature_names: Sequence[str] | None = None) -> FittedModel:
    X, y = _check_xy(X, y)
    n, k = X.shape
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{j}" for j in range(k))
    if len(names) != k:
        raise ShapeMismatch(f"{len(names)} feature names for {k} columns")
    if spec.kind == "linear":
        if n < k + 1:
            raise ShapeMismatch(f"OLS needs n >= k + 1 rows, have n={n}, k={k}")
        coef, intercept, _ = fit_ols(X, y)
        return FittedModel(spec, names, {"coef": coef, "intercept": intercept})
    if n < 2:
        raise EmptyInput("tree models need at least 2 rows")
    if spec.kind == "tree":
        tree, _ = build_tree(X, y, spec.tree_max_depth, spec.tree_min_leaf)
        return FittedModel(spec, names, {"tree": tree})
    init, trees, mse = fit_gbt(
        X, y, spec.gbt_stages, spec.gbt_learning_rate, spec.tree_max_depth, spec.tree_min_leaf
    )
    return FittedModel(spec, names, {"init": init, "trees": trees}, tuple(mse))


def predict(model: FittedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if model.n_features == 1 else X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeMismatch(f"model expects {model.n_features} features, got array of shape {X.shape}")
    kind = model.spec.kind
    if kind == "linear":
        return X @ model.params["coef"] + model.params["intercept"]
    if kind == "tree":
        return model.params["tree"].predict(X)
    return predict_gbt(model.params["init"], model.params["trees"], model.spec.gbt_learning_rate, X)
