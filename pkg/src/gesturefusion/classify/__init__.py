"""Random forest, baselines and cross-validation."""

from .baselines import OneRule, OneRuleResult, ZeroRuleModel, modal_class, one_rule, zero_rule
from .forest import ForestModel, train_forest
from .validation import (
    CVResult,
    FoldMetrics,
    ForestTrainer,
    confusion_matrix,
    cross_validate,
    fold_metrics,
    one_rule_trainer,
    stratified_folds,
    zero_rule_trainer,
)

__all__ = [
    "CVResult",
    "FoldMetrics",
    "ForestModel",
    "ForestTrainer",
    "OneRule",
    "OneRuleResult",
    "ZeroRuleModel",
    "confusion_matrix",
    "cross_validate",
    "fold_metrics",
    "modal_class",
    "one_rule",
    "one_rule_trainer",
    "stratified_folds",
    "train_forest",
    "zero_rule",
    "zero_rule_trainer",
]
