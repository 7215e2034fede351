"""Feature grouping from pooled background data.

Pipeline: pooled per-variable samples -> pairwise HSIC affinity -> normalized
Laplacian -> eigengap choice of K -> spectral embedding + seeded k-means ->
quality refinement of weak clusters.

Indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .kernels import center, median_bandwidth_sq, rbf_kernel_matrix

__all__ = [
    "GroupingConfig",
    "Grouping",
    "pooled_background_samples",
    "hsic_affinity",
    "pearson_affinity",
    "normalized_laplacian",
    "eigengap_k",
    "kmeans",
    "spectral_cluster",
    "cluster_affinity",
    "group_features",
    "alternative_grouping",
]

METHODS = ("hsic", "pearson", "random", "none")


@dataclass(frozen=True)
class GroupingConfig:
    seed: int
    n_hsic_subsample: int = 3000
    k_max: int = 6
    quality_threshold: float = 1e-3
    max_refine_depth: int = 5

    def __post_init__(self):
        if self.n_hsic_subsample < 4:
            raise ValueError("n_hsic_subsample must be at least 4")
        if self.k_max < 1:
            raise ValueError("k_max must be positive")
        if self.quality_threshold <= 0:
            raise ValueError("quality_threshold must be positive")
        if self.max_refine_depth < 0:
            raise ValueError("max_refine_depth must be non-negative")


@dataclass(frozen=True)
class Grouping:
    """A partition of variable indices ``0..D-1`` into ordered groups."""

    groups: tuple[tuple[int, ...], ...]
    method: str = "hsic"
    variable_names: tuple[str, ...] = ()
    seed: int = 0
    affinity: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        groups = tuple(sorted((tuple(sorted(int(v) for v in g)) for g in self.groups), key=min))
        object.__setattr__(self, "groups", groups)
        if any(len(g) == 0 for g in groups):
            raise ValueError("groups must be non-empty")
        members = [v for g in groups for v in g]
        if sorted(members) != list(range(len(members))):
            raise ValueError(f"groups do not partition 0..{len(members) - 1}: {groups}")
        if self.method not in METHODS:
            raise ValueError(f"unknown grouping method {self.method!r}")
        names = tuple(self.variable_names) or tuple(f"x{d}" for d in range(len(members)))
        if len(names) != len(members):
            raise ValueError("variable_names length does not match D")
        object.__setattr__(self, "variable_names", names)

    @property
    def n_variables(self) -> int:
        return sum(len(g) for g in self.groups)

    def labels(self) -> np.ndarray:
        out = np.empty(self.n_variables, dtype=int)
        for k, g in enumerate(self.groups):
            out[list(g)] = k
        return out

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "groups": [list(g) for g in self.groups],
            "variable_names": list(self.variable_names),
            "seed": int(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "Grouping":
        return cls(
            groups=tuple(tuple(g) for g in d["groups"]),
            method=d["method"],
            variable_names=tuple(d.get("variable_names", ())),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, s: str) -> "Grouping":
        return cls.from_dict(json.loads(s))


def _stack_windows(windows) -> np.ndarray:
    arr = [np.asarray(w, dtype=float) for w in windows]
    if not arr:
        raise ValueError("no background windows given")
    d = arr[0].shape[1]
    for w in arr:
        if w.ndim != 2 or w.shape[1] != d:
            raise ValueError("all windows must be 2-D with the same number of variables")
    return np.concatenate(arr, axis=0)


def pooled_background_samples(windows, config: GroupingConfig) -> np.ndarray:
    """Pool all time points of all windows, then subsample rows without replacement.

    Returns an ``(n, D)`` array; column ``d`` is variable ``d``'s sample. The
    same row subset is used for every variable so pairs stay aligned.
    """
    pooled = _stack_windows(windows)
    n = pooled.shape[0]
    if n <= config.n_hsic_subsample:
        return pooled
    rng = np.random.default_rng(config.seed)
    idx = np.sort(rng.choice(n, size=config.n_hsic_subsample, replace=False))
    return pooled[idx]


def hsic_affinity(samples: np.ndarray) -> np.ndarray:
    """Pairwise HSIC matrix of the columns of ``samples`` with zero diagonal.

    Constant columns get an all-zero row and column.
    """
    x = np.asarray(samples, dtype=float)
    n, dim = x.shape
    if n < 4:
        raise ValueError("need at least 4 aligned observations per variable")
    bws = [median_bandwidth_sq(x[:, d]) for d in range(dim)]
    a = np.zeros((dim, dim))
    for d in range(dim):
        if bws[d].degenerate:
            continue
        kc = center(rbf_kernel_matrix(x[:, d], bws[d].sq))
        for e in range(d + 1, dim):
            if bws[e].degenerate:
                continue
            l = rbf_kernel_matrix(x[:, e], bws[e].sq)
            a[d, e] = a[e, d] = max(float(np.sum(kc * l)) / (n - 1) ** 2, 0.0)
    return a


def pearson_affinity(samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    sd = x.std(axis=0)
    a = np.zeros((x.shape[1], x.shape[1]))
    ok = sd > 0
    if ok.sum() >= 2:
        c = np.corrcoef(x[:, ok], rowvar=False)
        a[np.ix_(ok, ok)] = np.abs(c)
    np.fill_diagonal(a, 0.0)
    return a


def normalized_laplacian(affinity: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized Laplacian ``I - D^{-1/2} A D^{-1/2}`` of the connected part.

    Variables whose degree is zero cannot be normalized; they are split off.

    Returns
    -------
    lap : ndarray
        Laplacian over the kept variables (possibly 0x0).
    kept : ndarray of int
        Indices of the variables the Laplacian is defined over.
    singletons : ndarray of int
        Zero-degree variables, to be treated as singleton groups.
    """
    a = np.asarray(affinity, dtype=float).copy()
    np.fill_diagonal(a, 0.0)
    deg = a.sum(axis=1)
    kept = np.flatnonzero(deg > 0)
    singletons = np.flatnonzero(deg <= 0)
    sub = a[np.ix_(kept, kept)]
    inv_sqrt = 1.0 / np.sqrt(sub.sum(axis=1))
    lap = np.eye(len(kept)) - inv_sqrt[:, None] * sub * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    return lap, kept, singletons


def eigengap_k(eigenvalues: Sequence[float], k_max: int) -> int:
    """Number of clusters at the largest gap between consecutive eigenvalues.

    ``eigenvalues`` must be ascending. Ties go to the smaller K.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 2:
        return 1
    upper = min(k_max, lam.size - 1)
    if upper < 1:
        return 1
    gaps = np.diff(lam)[:upper]
    return int(np.argmax(gaps)) + 1


def kmeans(points: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100) -> np.ndarray:
    """Lloyd's k-means with greedy farthest-point initialization.

    The first center is a seeded random row; each next center is the row with
    the largest distance to its nearest chosen center (lowest index on ties).
    Assignment ties go to the lowest centroid index. Iteration stops when no
    assignment changes.
    """
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of points {n}")
    first = int(rng.integers(n))
    chosen = [first]
    mind = np.sum((x - x[first]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, np.sum((x - x[nxt]) ** 2, axis=1))
    centers = x[chosen].copy()
    labels = np.full(n, -1)
    for _ in range(max_iter):
        d2 = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
    return labels


def spectral_cluster(affinity: np.ndarray, k: int, seed: int) -> list[list[int]]:
    """Cluster the variables of a connected affinity matrix into (at most) k groups.

    Embeds each variable with the eigenvectors of the k smallest Laplacian
    eigenvalues, normalizes rows to unit length and runs seeded k-means.
    """
    a = np.asarray(affinity, dtype=float)
    n = a.shape[0]
    if k > n:
        raise ValueError(f"K={k} exceeds number of variables {n}")
    if k <= 1:
        return [list(range(n))]
    lap, kept, singletons = normalized_laplacian(a)
    if len(singletons):
        raise ValueError("spectral_cluster expects an affinity without zero-degree rows")
    _, vecs = np.linalg.eigh(lap)
    emb = vecs[:, :k]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = np.divide(emb, norms, out=np.zeros_like(emb), where=norms > 0)
    labels = kmeans(emb, k, np.random.default_rng(seed))
    groups = [sorted(np.flatnonzero(labels == j).tolist()) for j in range(k)]
    return sorted((g for g in groups if g), key=min)


def _within_quality(affinity: np.ndarray, members: Sequence[int]) -> float:
    sub = np.abs(affinity[np.ix_(members, members)])
    m = len(members)
    return float((sub.sum() - np.trace(sub)) / (m * (m - 1)))


def _split(affinity: np.ndarray, k_max: int, seed: int) -> list[list[int]]:
    """One round: forced singletons, eigengap K, spectral clustering."""
    lap, kept, singletons = normalized_laplacian(affinity)
    groups = [[int(s)] for s in singletons]
    if len(kept):
        lam = np.linalg.eigvalsh(lap)
        k = min(eigengap_k(lam, k_max), len(kept))
        sub = affinity[np.ix_(kept, kept)]
        for g in spectral_cluster(sub, k, seed):
            groups.append([int(kept[i]) for i in g])
    return sorted(groups, key=min)


def _refine(affinity, members, k_max, threshold, depth, max_depth, seed) -> list[list[int]]:
    if len(members) < 2 or _within_quality(affinity, members) >= threshold:
        return [list(members)]
    if depth >= max_depth:
        return [[m] for m in members]
    sub = affinity[np.ix_(members, members)]
    out = []
    for g in _split(sub, k_max, seed):
        out.extend(
            _refine(affinity, [members[i] for i in g], k_max, threshold, depth + 1, max_depth, seed)
        )
    return out


def cluster_affinity(affinity: np.ndarray, config: GroupingConfig) -> list[list[int]]:
    """Full clustering of an affinity matrix, including quality refinement."""
    a = np.asarray(affinity, dtype=float)
    dim = a.shape[0]
    if dim == 1:
        return [[0]]
    groups = []
    for g in _split(a, config.k_max, config.seed):
        groups.extend(
            _refine(a, g, config.k_max, config.quality_threshold, 0,
                    config.max_refine_depth, config.seed)
        )
    return sorted((sorted(g) for g in groups), key=min)


def group_features(windows, config: GroupingConfig, variable_names=()) -> Grouping:
    """HSIC grouping of the variables of ``windows`` (each a ``(T, D)`` array)."""
    samples = pooled_background_samples(windows, config)
    if samples.shape[1] == 1:
        return Grouping(((0,),), "hsic", tuple(variable_names), config.seed,
                        affinity=np.zeros((1, 1)))
    a = hsic_affinity(samples)
    groups = cluster_affinity(a, config)
    return Grouping(tuple(map(tuple, groups)), "hsic", tuple(variable_names), config.seed,
                    affinity=a)


def _random_partition(dim: int, k: int, seed: int) -> list[list[int]]:
    if not 1 <= k <= dim:
        raise ValueError(f"random grouping needs 1 <= K <= D, got K={k}, D={dim}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(dim)
    labels = np.empty(dim, dtype=int)
    labels[order[:k]] = np.arange(k)
    labels[order[k:]] = rng.integers(0, k, size=dim - k)
    return [np.flatnonzero(labels == j).tolist() for j in range(k)]


def alternative_grouping(windows, method: str, config: GroupingConfig,
                         k_hint: int | None = None, variable_names=()) -> Grouping:
    """Comparison groupings: ``pearson``, ``random`` (``k_hint`` groups) or ``none``."""
    dim = _stack_windows(windows).shape[1]
    if method == "none":
        groups = [[d] for d in range(dim)]
        a = None
    elif method == "random":
        if k_hint is None:
            raise ValueError("random grouping requires k_hint")
        groups = _random_partition(dim, k_hint, config.seed)
        a = None
    elif method == "pearson":
        samples = pooled_background_samples(windows, config)
        a = pearson_affinity(samples)
        groups = [[0]] if dim == 1 else cluster_affinity(a, config)
    elif method == "hsic":
        return group_features(windows, config, variable_names)
    else:
        raise ValueError(f"unknown grouping method {method!r}")
    return Grouping(tuple(map(tuple, groups)), method, tuple(variable_names), config.seed,
                    affinity=a)
