"""Shapley attribution over a player set.

A coalition is a boolean vector over players. Masking keeps the cells of
active players and replaces every other cell with a baseline value. Values
are estimated by walking sampled permutations (``shapley_permutation``) or
computed exactly by enumerating all coalitions (``shapley_exact``).

A predictor is any callable mapping an ``(N, T, D)`` array to ``N`` scalars.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .players import PlayerSet

__all__ = [
    "MaskingBaseline",
    "AttributionResult",
    "mask",
    "mask_batch",
    "marginal_contribution",
    "shapley_permutation",
    "shapley_exact",
    "player_set_ref",
    "MAX_EXACT_PLAYERS",
]

MAX_EXACT_PLAYERS = 20
MASK_MODES = ("mean", "zero", "noise")

Predictor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class MaskingBaseline:
    """Replacement values for masked cells.

    ``mean`` uses the per-variable background mean, ``zero`` uses 0 and
    ``noise`` uses a fixed Gaussian field ``mu_d + sigma_d * z[t, d]`` drawn
    once from ``seed``, so a given coalition always yields the same input.
    """

    mode: str
    mu: np.ndarray
    sigma: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MASK_MODES:
            raise ValueError(f"mask mode must be one of {MASK_MODES}, got {self.mode!r}")
        mu = np.asarray(self.mu, dtype=float).ravel()
        object.__setattr__(self, "mu", mu)
        sigma = np.zeros_like(mu) if self.sigma is None else np.asarray(self.sigma, float).ravel()
        if sigma.shape != mu.shape:
            raise ValueError("sigma and mu lengths differ")
        if (sigma < 0).any():
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_background(cls, windows, mode: str = "mean", seed: int = 0) -> "MaskingBaseline":
        arr = [np.asarray(w, dtype=float) for w in windows]
        if not arr:
            raise ValueError("background set is empty")
        cells = np.concatenate(arr, axis=0)
        return cls(mode, cells.mean(axis=0), cells.std(axis=0), seed)

    @property
    def D(self) -> int:
        return self.mu.shape[0]

    def fill(self, T: int) -> np.ndarray:
        """The ``(T, D)`` matrix of replacement values."""
        if self.mode == "mean":
            return np.broadcast_to(self.mu, (T, self.D)).copy()
        if self.mode == "zero":
            return np.zeros((T, self.D))
        z = np.random.default_rng(self.seed).standard_normal((T, self.D))
        return self.mu + self.sigma * z

    def with_mode(self, mode: str) -> "MaskingBaseline":
        return MaskingBaseline(mode, self.mu, self.sigma, self.seed)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MaskingBaseline":
        return cls(d["mode"], d["mu"], d.get("sigma"), int(d.get("seed", 0)))


def player_set_ref(player_set: PlayerSet) -> str:
    """Short content hash identifying a player set."""
    blob = json.dumps(player_set.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class AttributionResult:
    phi: np.ndarray
    M: int
    f_full: float
    f_empty: float
    baseline: MaskingBaseline
    players_ref: str
    seed: int
    n_calls: int = 0
    method: str = "permutation"

    def to_dict(self) -> dict:
        return {
            "phi": [float(v) for v in self.phi],
            "M": int(self.M),
            "f_full": float(self.f_full),
            "f_empty": float(self.f_empty),
            "baseline": self.baseline.to_dict(),
            "players_ref": self.players_ref,
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "AttributionResult":
        return cls(
            phi=np.asarray(d["phi"], dtype=float),
            M=int(d["M"]),
            f_full=float(d["f_full"]),
            f_empty=float(d["f_empty"]),
            baseline=MaskingBaseline.from_dict(d["baseline"]),
            players_ref=d["players_ref"],
            seed=int(d["seed"]),
        )

    @classmethod
    def from_json(cls, s: str) -> "AttributionResult":
        return cls.from_dict(json.loads(s))


def _check(window, player_set: PlayerSet, baseline: MaskingBaseline) -> np.ndarray:
    x = np.asarray(window, dtype=float)
    if x.shape != (player_set.T, player_set.D):
        raise ValueError(f"window shape {x.shape} does not match players "
                         f"({player_set.T}, {player_set.D})")
    if baseline.D != player_set.D:
        raise ValueError(f"baseline has {baseline.D} variables, players have {player_set.D}")
    return x


def mask_batch(window, coalitions, player_set: PlayerSet, baseline: MaskingBaseline,
               fill: np.ndarray | None = None) -> np.ndarray:
    """Masked copies of ``window``, one per row of the ``(N, |P|)`` coalition matrix."""
    x = _check(window, player_set, baseline)
    z = np.asarray(coalitions, dtype=bool)
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[1] != len(player_set):
        raise ValueError(f"coalition length {z.shape[1]} != {len(player_set)} players")
    if fill is None:
        fill = baseline.fill(player_set.T)
    keep = z[:, player_set.owner]
    return np.where(keep, x[None], fill[None])


def mask(window, coalition, player_set: PlayerSet, baseline: MaskingBaseline) -> np.ndarray:
    """Keep the cells of active players, replace all others with the baseline."""
    return mask_batch(window, np.asarray(coalition, dtype=bool)[None], player_set, baseline)[0]


def _predict(predictor: Predictor, batch: np.ndarray) -> np.ndarray:
    out = np.asarray(predictor(batch), dtype=float).reshape(-1)
    if out.shape[0] != batch.shape[0]:
        raise ValueError(f"predictor returned {out.shape[0]} outputs for {batch.shape[0]} inputs")
    return out


def marginal_contribution(predictor: Predictor, window, player: int, preceding,
                          player_set: PlayerSet, baseline: MaskingBaseline) -> float:
    """``f(mask(preceding + player)) - f(mask(preceding))``."""
    before = np.zeros(len(player_set), dtype=bool)
    before[list(np.flatnonzero(np.asarray(preceding, dtype=bool)))] = True
    if before[player]:
        raise ValueError(f"player {player} is already in the preceding coalition")
    after = before.copy()
    after[player] = True
    vals = _predict(predictor, mask_batch(window, np.stack([after, before]), player_set, baseline))
    return float(vals[0] - vals[1])


def shapley_permutation(predictor: Predictor, window, player_set: PlayerSet, M: int,
                        baseline: MaskingBaseline, seed: int) -> AttributionResult:
    """Permutation-sampling Shapley estimate.

    Each of the ``M`` permutations is walked incrementally: players are added
    one at a time, so a walk costs ``|P| + 1`` predictor calls, evaluated as
    one batch. Permutation ``m`` uses its own child stream of ``seed``.
    """
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    x = _check(window, player_set, baseline)
    n = len(player_set)
    fill = baseline.fill(player_set.T)
    tri = np.tri(n + 1, n, k=-1, dtype=bool)  # row i: first i positions active
    total = np.zeros(n)
    f_full = f_empty = None
    for child in np.random.SeedSequence(seed).spawn(M):
        perm = np.random.default_rng(child).permutation(n)
        z = np.empty_like(tri)
        z[:, perm] = tri
        vals = _predict(predictor, mask_batch(x, z, player_set, baseline, fill))
        total[perm] += np.diff(vals)
        if f_full is None:
            f_empty, f_full = float(vals[0]), float(vals[-1])
    return AttributionResult(total / M, M, f_full, f_empty, baseline, player_set_ref(player_set),
                             seed, n_calls=M * (n + 1), method="permutation")


def _popcount(a: np.ndarray) -> np.ndarray:
    c = np.zeros(a.shape, dtype=np.int64)
    a = a.copy()
    while a.any():
        c += a & 1
        a >>= 1
    return c


def shapley_exact(predictor: Predictor, window, player_set: PlayerSet,
                  baseline: MaskingBaseline, chunk: int = 4096) -> AttributionResult:
    """Exact Shapley values by evaluating all ``2^|P|`` coalitions once."""
    n = len(player_set)
    if n > MAX_EXACT_PLAYERS:
        raise ValueError(f"exact enumeration supports at most {MAX_EXACT_PLAYERS} players, got {n}")
    x = _check(window, player_set, baseline)
    fill = baseline.fill(player_set.T)
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    v = np.empty(1 << n)
    for s in range(0, 1 << n, chunk):
        v[s:s + chunk] = _predict(predictor, mask_batch(x, bits[s:s + chunk], player_set,
                                                        baseline, fill))
    size = _popcount(codes)
    weight = np.array([math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n)
                       for s in range(n)])
    phi = np.empty(n)
    for p in range(n):
        without = codes[(codes >> p) & 1 == 0]
        phi[p] = np.sum(weight[size[without]] * (v[without | (1 << p)] - v[without]))
    return AttributionResult(phi, 0, float(v[-1]), float(v[0]), baseline,
                             player_set_ref(player_set), 0, n_calls=1 << n, method="exact")
