"""Windowed statistical and spatio-temporal features, ANOVA ranking and early-fusion forests for hand-gesture streams."""

from .classify import ForestTrainer, cross_validate, one_rule, train_forest, zero_rule
from .errors import PipelineError
from .experiment import SweepConfig, early_fuse, enumerate_grid, rank_matrix, run_sweep, top_results
from .features import SPATIO_TEMPORAL, STATISTICAL, FeatureColumn, FeatureMatrix, extract_features
from .ingest import ChannelDescriptor, FrameSet, parse_frames, windowize
from .select import FeatureScore, anova_f, mean_top_n, rank_and_filter, score_matrix, select_raw_channels

__all__ = [
    "ChannelDescriptor",
    "FeatureColumn",
    "FeatureMatrix",
    "FeatureScore",
    "ForestTrainer",
    "FrameSet",
    "PipelineError",
    "SPATIO_TEMPORAL",
    "STATISTICAL",
    "SweepConfig",
    "anova_f",
    "cross_validate",
    "early_fuse",
    "enumerate_grid",
    "extract_features",
    "mean_top_n",
    "one_rule",
    "parse_frames",
    "rank_and_filter",
    "rank_matrix",
    "run_sweep",
    "score_matrix",
    "select_raw_channels",
    "top_results",
    "train_forest",
    "windowize",
    "zero_rule",
]
