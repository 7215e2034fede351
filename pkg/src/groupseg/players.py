"""Player sets: partitions of the T x D cell grid into explanation units.

Every scheme produces a ``PlayerSet`` whose ``owner`` table maps each cell
``(t, d)`` to exactly one player id. Group-segment players come from a
grouping plus per-group segmentations; the other schemes are fixed
layouts (single cells, time steps, windows, subsequences) used for comparison.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["Player", "PlayerSet", "build_players", "baseline_players", "SCHEMES"]

SCHEMES = ("group_segment", "cell", "timestep", "window", "subsequence")


@dataclass(frozen=True)
class Player:
    id: int
    group: int | None
    segment: tuple[int, int]
    variables: tuple[int, ...]

    @property
    def n_cells(self) -> int:
        return (self.segment[1] - self.segment[0]) * len(self.variables)

    def cells(self):
        for t in range(*self.segment):
            for d in self.variables:
                yield t, d


@dataclass(frozen=True, eq=False)
class PlayerSet:
    players: tuple[Player, ...]
    T: int
    D: int
    scheme: str = "group_segment"
    owner: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        owner = np.full((self.T, self.D), -1, dtype=np.int64)
        for i, p in enumerate(self.players):
            if p.id != i:
                raise ValueError("player ids must be 0..|P|-1 in order")
            s, e = p.segment
            if not (0 <= s < e <= self.T) or not p.variables:
                raise ValueError(f"player {i} has an empty or out-of-range cell block")
            block = owner[s:e][:, list(p.variables)]
            if (block != -1).any():
                raise ValueError(f"player {i} overlaps another player")
            owner[np.ix_(range(s, e), p.variables)] = i
        if (owner == -1).any():
            t, d = np.argwhere(owner == -1)[0]
            raise ValueError(f"cell ({t}, {d}) is not owned by any player")
        owner.flags.writeable = False
        object.__setattr__(self, "owner", owner)

    def __len__(self) -> int:
        return len(self.players)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlayerSet):
            return NotImplemented
        return (self.players, self.T, self.D, self.scheme) == (
            other.players, other.T, other.D, other.scheme)

    def cell_owner(self, t: int, d: int) -> int:
        if not (0 <= t < self.T and 0 <= d < self.D):
            raise IndexError(f"cell ({t}, {d}) outside a {self.T}x{self.D} grid")
        return int(self.owner[t, d])

    def cell_counts(self) -> np.ndarray:
        return np.array([p.n_cells for p in self.players], dtype=np.int64)

    def to_dict(self) -> dict:
        # time indices serialized 1-based, end-exclusive; variables 0-based
        return {
            "scheme": self.scheme,
            "T": self.T,
            "D": self.D,
            "players": [
                {
                    "id": p.id,
                    "group": p.group,
                    "segment": [p.segment[0] + 1, p.segment[1] + 1],
                    "variables": list(p.variables),
                }
                for p in self.players
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PlayerSet":
        players = tuple(
            Player(
                id=int(p["id"]),
                group=None if p["group"] is None else int(p["group"]),
                segment=(int(p["segment"][0]) - 1, int(p["segment"][1]) - 1),
                variables=tuple(int(v) for v in p["variables"]),
            )
            for p in d["players"]
        )
        return cls(players, int(d["T"]), int(d["D"]), d["scheme"])

    @classmethod
    def from_json(cls, s: str) -> "PlayerSet":
        return cls.from_dict(json.loads(s))


def build_players(groups: Sequence[Sequence[int]], segmentations, T: int, D: int) -> PlayerSet:
    """One player per (group, segment) pair, ids in (group, segment start) order.

    ``groups`` may be a ``Grouping`` or a plain list of index lists;
    ``segmentations[k]`` is a ``Segmentation`` or a list of ``(start, end)``.
    """
    groups = getattr(groups, "groups", groups)
    if len(groups) != len(segmentations):
        raise ValueError(f"{len(groups)} groups but {len(segmentations)} segmentations")
    if sorted(v for g in groups for v in g) != list(range(D)):
        raise ValueError(f"groups do not partition 0..{D - 1}")
    players = []
    for k, (g, seg) in enumerate(zip(groups, segmentations)):
        segs = sorted(getattr(seg, "segments", seg))
        if not segs or segs[0][0] != 0 or segs[-1][1] != T:
            raise ValueError(f"segmentation of group {k} does not cover 0..{T}")
        for s, e in segs:
            players.append(Player(len(players), k, (int(s), int(e)), tuple(sorted(g))))
    return PlayerSet(tuple(players), T, D, "group_segment")


def _time_blocks(bounds: Sequence[int], D: int) -> list[Player]:
    allvars = tuple(range(D))
    return [Player(i, None, (s, e), allvars) for i, (s, e) in enumerate(zip(bounds, bounds[1:]))]


def baseline_players(scheme: str, T: int, D: int, window_len: int | None = None,
                     n_subseq: int | None = None) -> PlayerSet:
    """Fixed player layouts.

    cell: one player per cell, ids in row-major order. timestep: one player
    per time row. window: contiguous blocks of ``window_len`` rows, the last
    possibly shorter. subsequence: ``n_subseq`` near-equal blocks, the
    remainder going one row each to the earliest blocks.
    """
    if T < 1 or D < 1:
        raise ValueError("T and D must be positive")
    if scheme == "cell":
        players = [Player(t * D + d, None, (t, t + 1), (d,)) for t in range(T) for d in range(D)]
    elif scheme == "timestep":
        players = _time_blocks(list(range(T + 1)), D)
    elif scheme == "window":
        if window_len is None or window_len < 1:
            raise ValueError("window scheme needs window_len >= 1")
        n = math.ceil(T / window_len)
        players = _time_blocks([min(i * window_len, T) for i in range(n + 1)], D)
    elif scheme == "subsequence":
        if n_subseq is None or not 1 <= n_subseq <= T:
            raise ValueError("subsequence scheme needs 1 <= n_subseq <= T")
        base, rem = divmod(T, n_subseq)
        sizes = [base + (1 if i < rem else 0) for i in range(n_subseq)]
        players = _time_blocks([0, *np.cumsum(sizes).tolist()], D)
    else:
        raise ValueError(f"unknown baseline scheme {scheme!r}")
    return PlayerSet(tuple(players), T, D, scheme)
