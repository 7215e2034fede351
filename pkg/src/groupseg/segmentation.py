"""Kernel change-point segmentation of the time axis, one group at a time.

Each interval is scanned for the split maximizing the unbiased MMD² between
its left and right parts. A split is accepted when that maximum exceeds a
permutation-calibrated threshold; accepted splits are recursed on depth-first,
left side first.

Time indices are 0-based; a segment ``(start, end)`` covers rows
``start <= t < end``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import as_points, median_bandwidth_sq, rbf_kernel_matrix

__all__ = [
    "SegmentationConfig",
    "Segmentation",
    "split_statistics",
    "best_split",
    "permutation_threshold",
    "segment_group",
    "segment_window",
]

THRESHOLD_MODES = ("top_level", "per_interval")


@dataclass(frozen=True)
class SegmentationConfig:
    """Segmentation hyperparameters.

    ``threshold_mode="top_level"`` calibrates the threshold once on the full
    axis and reuses it, together with the full-axis bandwidth, for every
    sub-interval. ``"per_interval"`` recomputes the bandwidth and recalibrates
    the threshold on each interval the recursion visits.
    """

    l_min: int
    seed: int
    j_max: int = 8
    alpha: float = 0.05
    num_permutations: int = 200
    threshold_mode: str = "top_level"

    def __post_init__(self):
        if self.l_min < 2:
            raise ValueError("l_min must be at least 2")
        if self.j_max < 1:
            raise ValueError("j_max must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.num_permutations < 1:
            raise ValueError("num_permutations must be positive")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}")


@dataclass(frozen=True)
class Segmentation:
    segments: tuple[tuple[int, int], ...]
    group: int = 0
    l_min: int = 2
    alpha: float = 0.05
    seed: int = 0
    under_length: bool = False
    statistics: tuple[float, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        segs = tuple((int(s), int(e)) for s, e in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs or segs[0][0] != 0:
            raise ValueError("segments must start at 0")
        for (s0, e0), (s1, _) in zip(segs, segs[1:]):
            if e0 != s1:
                raise ValueError(f"segments are not contiguous: {segs}")
        if any(e <= s for s, e in segs):
            raise ValueError(f"empty segment in {segs}")

    @property
    def T(self) -> int:
        return self.segments[-1][1]

    @property
    def boundaries(self) -> list[int]:
        return [s for s, _ in self.segments[1:]]

    def to_dict(self) -> dict:
        # serialized with 1-based, end-exclusive time indices
        return {
            "group": int(self.group),
            "segments": [[s + 1, e + 1] for s, e in self.segments],
            "l_min": int(self.l_min),
            "alpha": float(self.alpha),
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Segmentation":
        return cls(
            segments=tuple((s - 1, e - 1) for s, e in d["segments"]),
            group=int(d["group"]),
            l_min=int(d["l_min"]),
            alpha=float(d["alpha"]),
            seed=int(d["seed"]),
        )

    @classmethod
    def from_json(cls, s: str) -> "Segmentation":
        return cls.from_dict(json.loads(s))


def _prefix(k: np.ndarray) -> np.ndarray:
    p = np.zeros((k.shape[0] + 1, k.shape[1] + 1))
    np.cumsum(np.cumsum(k, axis=0), axis=1, out=p[1:, 1:])
    return p


def _split_stats_from_kernel(k: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """MMD² of ``[0, t)`` vs ``[t, n)`` for every candidate t, from one Gram matrix."""
    n = k.shape[0]
    p = _prefix(k)
    total = p[n, n]
    left = p[cands, cands]
    cross = p[cands, n] - left
    right = total - left - 2.0 * cross
    nl = cands.astype(float)
    nr = n - nl
    # Gram diagonal is exactly 1, so excluding i == i' subtracts the side size
    xx = (left - nl) / (nl * (nl - 1))
    yy = (right - nr) / (nr * (nr - 1))
    xy = cross / (nl * nr)
    return xx + yy - 2.0 * xy


def _candidates(length: int, l_min: int) -> np.ndarray:
    return np.arange(l_min, length - l_min + 1)


def split_statistics(block, l_min: int, bandwidth_sq: float | None = None):
    """Candidate split offsets and their MMD² statistics for a whole block.

    Returns ``(candidates, stats)`` with offsets relative to the block start,
    or ``(empty, empty)`` when the block is shorter than ``2 * l_min``.
    """
    x = as_points(block)
    n = x.shape[0]
    cands = _candidates(n, l_min)
    if n < 2 * l_min or cands.size == 0:
        return cands[:0], np.empty(0)
    if bandwidth_sq is None:
        bandwidth_sq = median_bandwidth_sq(x).sq
    k = rbf_kernel_matrix(x, bandwidth_sq)
    return cands, _split_stats_from_kernel(k, cands)


def best_split(block, l_min: int, bandwidth_sq: float | None = None):
    """Best split of ``block`` as ``(offset, statistic)``, or None if too short.

    The offset t is the first row of the right part; ties go to the smallest t.
    """
    cands, stats = split_statistics(block, l_min, bandwidth_sq)
    if cands.size == 0:
        return None
    i = int(np.argmax(stats))
    return int(cands[i]), float(stats[i])


def _nearest_rank(values: np.ndarray, q: float) -> float:
    v = np.sort(values)
    rank = max(1, math.ceil(q * len(v) - 1e-12))
    return float(v[rank - 1])


def permutation_threshold(block, l_min: int, alpha: float, num_permutations: int,
                          seed: int, bandwidth_sq: float | None = None,
                          stream_key: tuple[int, ...] = ()) -> float:
    """(1 - alpha) nearest-rank quantile of the permuted max-split statistic.

    Each permutation shuffles the rows of ``block`` and re-maximizes the MMD²
    over the same candidate offsets. Permutation i draws from its own
    generator, keyed by ``(seed, *stream_key, i)``, so the result does not
    depend on evaluation order.
    """
    x = as_points(block)
    n = x.shape[0]
    cands = _candidates(n, l_min)
    if n < 2 * l_min or cands.size == 0:
        raise ValueError(f"interval of length {n} is shorter than 2 * l_min = {2 * l_min}")
    if bandwidth_sq is None:
        bandwidth_sq = median_bandwidth_sq(x).sq
    k = rbf_kernel_matrix(x, bandwidth_sq)
    root = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream_key))
    null = np.empty(num_permutations)
    for i, child in enumerate(root.spawn(num_permutations)):
        perm = np.random.default_rng(child).permutation(n)
        null[i] = _split_stats_from_kernel(k[np.ix_(perm, perm)], cands).max()
    return _nearest_rank(null, 1.0 - alpha)


def segment_group(block, config: SegmentationConfig, group: int = 0) -> Segmentation:
    """Recursive binary segmentation of a ``(T, |G|)`` block."""
    x = as_points(block)
    T = x.shape[0]
    meta = dict(group=group, l_min=config.l_min, alpha=config.alpha, seed=config.seed)
    if T < config.l_min:
        return Segmentation(((0, T),), under_length=True, **meta)

    # top_level: one bandwidth and one threshold for the whole recursion, so
    # every statistic is compared to a null drawn on the same kernel scale
    shared = None
    if config.threshold_mode == "top_level" and T >= 2 * config.l_min:
        bw = median_bandwidth_sq(x).sq
        tau = permutation_threshold(
            x, config.l_min, config.alpha, config.num_permutations, config.seed,
            bandwidth_sq=bw, stream_key=(group, 0, T),
        )
        shared = (bw, tau)

    boundaries: list[int] = []
    stats: list[float] = []

    def recurse(s: int, e: int) -> None:
        if e - s < 2 * config.l_min:
            return
        if len(boundaries) + 1 >= config.j_max:
            return
        sub = x[s:e]
        if shared is not None:
            bw, tau = shared
            t, stat = best_split(sub, config.l_min, bw)
        else:
            bw = median_bandwidth_sq(sub).sq
            t, stat = best_split(sub, config.l_min, bw)
            tau = permutation_threshold(
                sub, config.l_min, config.alpha, config.num_permutations, config.seed,
                bandwidth_sq=bw, stream_key=(group, s, e),
            )
        if not stat > tau:
            return
        boundaries.append(s + t)
        stats.append(stat)
        recurse(s, s + t)
        recurse(s + t, e)

    recurse(0, T)
    cuts = [0] + sorted(boundaries) + [T]
    segs = tuple(zip(cuts[:-1], cuts[1:]))
    return Segmentation(segs, statistics=tuple(stats), **meta)


def segment_window(window, groups, config: SegmentationConfig) -> list[Segmentation]:
    """Segment each group's columns of a ``(T, D)`` window independently."""
    x = np.asarray(window, dtype=float)
    return [segment_group(x[:, list(g)], config, group=k) for k, g in enumerate(groups)]
