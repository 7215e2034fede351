"""Shapley attributions for multivariate time series over group-segment players.

Variables are grouped by kernel dependence (HSIC), each group's time axis is
split at distribution changes (MMD), and every (group, segment) block becomes
one Shapley player.
"""

from .attribution import (
    AttributionResult,
    MaskingBaseline,
    mask,
    shapley_exact,
    shapley_permutation,
)
from .evaluation import deletion_curve, delta_auc
from .grouping import Grouping, GroupingConfig, group_features
from .pipeline import PipelineConfig, explain, project_to_cells
from .players import Player, PlayerSet, baseline_players, build_players
from .segmentation import Segmentation, SegmentationConfig, segment_group, segment_window

__version__ = "0.1.0"

__all__ = [
    "AttributionResult",
    "MaskingBaseline",
    "mask",
    "shapley_exact",
    "shapley_permutation",
    "deletion_curve",
    "delta_auc",
    "Grouping",
    "GroupingConfig",
    "group_features",
    "PipelineConfig",
    "explain",
    "project_to_cells",
    "Player",
    "PlayerSet",
    "baseline_players",
    "build_players",
    "Segmentation",
    "SegmentationConfig",
    "segment_group",
    "segment_window",
]
