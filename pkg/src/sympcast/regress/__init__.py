"""Cross-sectional regressors behind one fit/predict contract."""

from .model import MODEL_KINDS, FittedModel, ModelSpec, fit, predict
from .tree import Tree, build_tree

__all__ = ["MODEL_KINDS", "FittedModel", "ModelSpec", "Tree", "build_tree", "fit", "predict"]
