"""CART random forests with impurity importances and exact Shapley values."""

from .cart import Tree, apply_tree
from .ensemble import (
    ForestParams,
    RandomForest,
    evaluate_classification,
    evaluate_regression,
    fit,
    impurity_importance,
    train_test_split,
)
from .shapley import ShapleyAttribution, exact_shapley, shap_summary_points

__all__ = [
    "Tree",
    "apply_tree",
    "ForestParams",
    "RandomForest",
    "fit",
    "train_test_split",
    "evaluate_regression",
    "evaluate_classification",
    "impurity_importance",
    "ShapleyAttribution",
    "exact_shapley",
    "shap_summary_points",
]
