"""End-to-end explanation of one window: group, segment, build players, attribute."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .attribution import AttributionResult, MaskingBaseline, shapley_permutation
from .grouping import Grouping, GroupingConfig, alternative_grouping, group_features
from .players import PlayerSet, baseline_players, build_players
from .segmentation import Segmentation, SegmentationConfig, segment_window

__all__ = ["PipelineConfig", "Explanation", "fit_grouping", "make_players", "explain",
           "project_to_cells"]

DEFAULT_FRACTIONS = tuple(round(0.05 * i, 2) for i in range(21))


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of one explanation run. Seeds have no defaults."""

    grouping: GroupingConfig
    segmentation: SegmentationConfig
    M: int
    attribution_seed: int
    grouping_method: str = "hsic"
    mask_mode: str = "mean"
    noise_seed: int = 0
    scheme: str = "group_segment"
    window_len: int | None = None
    n_subseq: int | None = None
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    loss_mode: str = "output"

    def with_(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Explanation:
    player_set: PlayerSet
    result: AttributionResult
    importance: np.ndarray
    grouping: Grouping | None = None
    segmentations: tuple[Segmentation, ...] = field(default=())


def project_to_cells(result, player_set: PlayerSet) -> np.ndarray:
    """Spread each player's value uniformly over its cells (``T x D`` map)."""
    phi = np.asarray(getattr(result, "phi", result), dtype=float)
    if phi.shape != (len(player_set),):
        raise ValueError(f"{phi.shape[0]} values for {len(player_set)} players")
    per_cell = phi / player_set.cell_counts()
    return per_cell[player_set.owner]


def fit_grouping(background, config: PipelineConfig, k_hint: int | None = None,
                 variable_names=()) -> Grouping:
    if config.grouping_method == "hsic":
        return group_features(background, config.grouping, variable_names)
    return alternative_grouping(background, config.grouping_method, config.grouping,
                                k_hint=k_hint, variable_names=variable_names)


def make_players(window, config: PipelineConfig, grouping: Grouping | None = None):
    """Player set for ``window`` under ``config.scheme``.

    Returns ``(player_set, segmentations)``; segmentations is empty for the
    fixed layouts.
    """
    x = np.asarray(window, dtype=float)
    T, D = x.shape
    if config.scheme == "group_segment":
        if grouping is None:
            raise ValueError("group_segment players need a grouping")
        segs = segment_window(x, grouping.groups, config.segmentation)
        return build_players(grouping.groups, segs, T, D), tuple(segs)
    return baseline_players(config.scheme, T, D, config.window_len, config.n_subseq), ()


def explain(predictor, window, background, config: PipelineConfig,
            grouping: Grouping | None = None) -> Explanation:
    """Explain ``predictor`` at ``window``; masking statistics come from ``background``."""
    if config.scheme == "group_segment" and grouping is None:
        grouping = fit_grouping(background, config)
    baseline = MaskingBaseline.from_background(background, config.mask_mode, config.noise_seed)
    player_set, segs = make_players(window, config, grouping)
    result = shapley_permutation(predictor, window, player_set, config.M, baseline,
                                 config.attribution_seed)
    return Explanation(player_set, result, project_to_cells(result, player_set),
                       grouping if config.scheme == "group_segment" else None, segs)
