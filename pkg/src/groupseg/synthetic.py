"""Seeded synthetic datasets with known structure.

* ``planted_blocks``: variables in blocks, each block driven by its own latent
  factor through different monotone nonlinearities.
* ``mean_shift``: Gaussian noise with one step change in the mean.
* ``player_fixture``: a fixed player set, background windows, explained windows
  with every player's mean deviation equal to 1, and a player-additive
  predictor whose exact Shapley values are its weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attribution import MaskingBaseline
from .players import PlayerSet, build_players
from .predictors import PlayerAdditivePredictor

__all__ = ["PlantedBlocks", "planted_blocks", "mean_shift", "PlayerFixture", "player_fixture"]

_LINKS = (
    lambda u: u,
    lambda u: np.tanh(1.5 * u),
    lambda u: u * np.abs(u) / 2.0,
    lambda u: -u,
)


@dataclass(frozen=True, eq=False)
class PlantedBlocks:
    windows: np.ndarray  # (N, T, D)
    groups: tuple[tuple[int, ...], ...]
    latents: np.ndarray  # (N, T, n_blocks)

    @property
    def labels(self) -> np.ndarray:
        out = np.empty(self.windows.shape[2], dtype=int)
        for k, g in enumerate(self.groups):
            out[list(g)] = k
        return out


def planted_blocks(seed: int, n_windows: int = 10, T: int = 100, block_sizes=(3, 3),
                   noise: float = 0.3) -> PlantedBlocks:
    """Block-structured variables; ``n_windows * T`` pooled observations.

    Variable ``j`` of block ``b`` is ``link_j(u_b) + noise * eps`` where the
    latents ``u_b`` are independent standard normal per time step.
    """
    if n_windows < 1 or T < 1 or not block_sizes or min(block_sizes) < 1:
        raise ValueError("invalid planted_blocks parameters")
    rng = np.random.default_rng(seed)
    nb = len(block_sizes)
    u = rng.standard_normal((n_windows, T, nb))
    cols, groups, d = [], [], 0
    for b, size in enumerate(block_sizes):
        groups.append(tuple(range(d, d + size)))
        for j in range(size):
            cols.append(_LINKS[j % len(_LINKS)](u[:, :, b]))
        d += size
    x = np.stack(cols, axis=2)
    x = x + noise * rng.standard_normal(x.shape)
    return PlantedBlocks(x, tuple(groups), u)


def mean_shift(seed: int, T: int = 128, shift_at: int = 64, magnitude: float = 3.0,
               sigma: float = 1.0, D: int = 1, n_windows: int = 1) -> np.ndarray:
    """``(n_windows, T, D)`` Gaussian noise; rows ``shift_at:`` are offset by
    ``magnitude * sigma``. ``magnitude=0`` gives pure noise."""
    if not 0 <= shift_at <= T:
        raise ValueError("shift_at must lie in [0, T]")
    rng = np.random.default_rng(seed)
    x = sigma * rng.standard_normal((n_windows, T, D))
    x[:, shift_at:, :] += magnitude * sigma
    return x


@dataclass(frozen=True, eq=False)
class PlayerFixture:
    player_set: PlayerSet
    weights: np.ndarray
    background: np.ndarray  # (N_bg, T, D)
    windows: np.ndarray  # (N, T, D)
    baseline: MaskingBaseline
    predictor: PlayerAdditivePredictor


DEFAULT_FIXTURE_GROUPS = ((0, 1), (2,), (3,))
DEFAULT_FIXTURE_SEGMENTS = (((0, 8), (8, 24)), ((0, 12), (12, 24)), ((0, 24),))


def player_fixture(seed: int, T: int = 24, groups=DEFAULT_FIXTURE_GROUPS,
                   segments=DEFAULT_FIXTURE_SEGMENTS, weights=None, n_background: int = 20,
                   n_windows: int = 1, spread: float = 0.0) -> PlayerFixture:
    """Player-additive fixture with analytically known Shapley values.

    Background windows are ``N(level_d, 1)`` with seeded per-variable levels.
    Explained windows equal the background mean plus one in every cell, plus
    optional ``spread``-scaled noise that is recentred within each player so
    every player's mean deviation stays exactly 1 (up to rounding). Hence the
    exact Shapley value of player p under mean masking is ``weights[p]``.
    When ``weights`` is None they are drawn from the seed with sparse
    relevance: each player is relevant with probability 0.4 (at least one
    is), relevant weights are ``2 * Exp(1)`` and the rest are 0.
    """
    D = sum(len(g) for g in groups)
    player_set = build_players(groups, segments, T, D)
    rng = np.random.default_rng(seed)
    n = len(player_set)
    if weights is None:
        on = rng.uniform(size=n) < 0.4
        if not on.any():
            on[rng.integers(n)] = True
        weights = np.where(on, 2.0 * rng.exponential(1.0, n), 0.0)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError(f"need {n} weights, got {weights.shape}")
    levels = rng.uniform(-2.0, 2.0, D)
    background = levels + rng.standard_normal((n_background, T, D))
    baseline = MaskingBaseline.from_background(background, "mean", seed)
    windows = np.empty((n_windows, T, D))
    for i in range(n_windows):
        eps = spread * rng.standard_normal((T, D))
        for p in range(n):
            cells = player_set.owner == p
            eps[cells] -= eps[cells].mean()
        windows[i] = baseline.mu + 1.0 + eps
    predictor = PlayerAdditivePredictor(weights, player_set, baseline.mu)
    return PlayerFixture(player_set, weights, background, windows, baseline, predictor)
