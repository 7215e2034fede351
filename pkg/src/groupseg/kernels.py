"""RBF kernel primitives: median-heuristic bandwidth, Gram matrices, HSIC and MMD².

All functions accept either a 1-D array (n scalar observations) or a 2-D array
of shape (n, d) (n points in d dimensions).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "Bandwidth",
    "as_points",
    "sq_distances",
    "median_bandwidth_sq",
    "rbf_kernel_matrix",
    "center",
    "hsic",
    "hsic_from_kernels",
    "mmd2_unbiased",
    "mmd2_from_kernel",
]


class Bandwidth(NamedTuple):
    """Squared RBF bandwidth plus a flag set when the input had no spread."""

    sq: float
    degenerate: bool


def as_points(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D samples, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    return x


def sq_distances(x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows, clipped at zero."""
    if y is None:
        y = x
    if x.shape[1] == 1:
        d2 = (x[:, 0][:, None] - y[:, 0][None, :]) ** 2
    else:
        xx = np.einsum("ij,ij->i", x, x)
        yy = np.einsum("ij,ij->i", y, y)
        d2 = xx[:, None] + yy[None, :] - 2.0 * (x @ y.T)
        np.maximum(d2, 0.0, out=d2)
    return d2


def median_bandwidth_sq(samples) -> Bandwidth:
    """Median of the strictly positive pairwise squared distances.

    Zero distances (duplicate points) are excluded so that repeated values do
    not collapse the bandwidth. If every point is identical the bandwidth
    falls back to 1 and ``degenerate`` is set.

    >>> median_bandwidth_sq([0.0, 1.0, 3.0])
    Bandwidth(sq=4.0, degenerate=False)
    """
    x = as_points(samples)
    if x.shape[0] < 2:
        raise ValueError("median heuristic needs at least two points")
    d2 = sq_distances(x)
    iu = np.triu_indices(x.shape[0], k=1)
    pos = d2[iu]
    pos = pos[pos > 0]
    if pos.size == 0:
        return Bandwidth(1.0, True)
    return Bandwidth(float(np.median(pos)), False)


def rbf_kernel_matrix(samples, bandwidth_sq: float) -> np.ndarray:
    """Gram matrix ``exp(-||x_i - x_j||^2 / (2 * bandwidth_sq))``."""
    if not bandwidth_sq > 0:
        raise ValueError(f"bandwidth_sq must be positive, got {bandwidth_sq}")
    x = as_points(samples)
    k = np.exp(sq_distances(x) / (-2.0 * bandwidth_sq))
    # exact symmetry and unit diagonal regardless of rounding in the distances
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return k


def center(k: np.ndarray) -> np.ndarray:
    """Return ``H K H`` with ``H = I - 11^T / n``, without forming H."""
    row = k.mean(axis=0, keepdims=True)
    col = k.mean(axis=1, keepdims=True)
    return k - row - col + k.mean()


def hsic_from_kernels(k: np.ndarray, l: np.ndarray, k_centered: bool = False) -> float:
    """Biased HSIC, ``tr(HKHL) / (n - 1)^2``.

    ``tr(HKHL) = sum((HKH) * L)`` because H is symmetric and idempotent, so only
    one of the two Gram matrices needs centering.
    """
    n = k.shape[0]
    if l.shape != k.shape:
        raise ValueError(f"kernel shapes differ: {k.shape} vs {l.shape}")
    kc = k if k_centered else center(k)
    return float(np.sum(kc * l) / (n - 1) ** 2)


def hsic(x, y, bandwidth_x: float | None = None, bandwidth_y: float | None = None) -> float:
    """Biased HSIC between two equal-length samples.

    Bandwidths default to each sample's own median heuristic. A sample with no
    spread yields 0: its centered Gram matrix vanishes.
    """
    xp = as_points(x)
    yp = as_points(y)
    if xp.shape[0] != yp.shape[0]:
        raise ValueError(f"length mismatch: {xp.shape[0]} vs {yp.shape[0]}")
    if xp.shape[0] < 4:
        raise ValueError("hsic needs at least 4 observations")
    if bandwidth_x is None:
        bw = median_bandwidth_sq(xp)
        if bw.degenerate:
            return 0.0
        bandwidth_x = bw.sq
    if bandwidth_y is None:
        bw = median_bandwidth_sq(yp)
        if bw.degenerate:
            return 0.0
        bandwidth_y = bw.sq
    return hsic_from_kernels(
        rbf_kernel_matrix(xp, bandwidth_x), rbf_kernel_matrix(yp, bandwidth_y)
    )


def mmd2_from_kernel(k: np.ndarray, n: int) -> float:
    """Unbiased MMD² from a joint Gram matrix whose first ``n`` rows are the left sample."""
    m = k.shape[0] - n
    if n < 2 or m < 2:
        raise ValueError(f"each side needs at least two points, got {n} and {m}")
    kxx = k[:n, :n]
    kyy = k[n:, n:]
    kxy = k[:n, n:]
    xx = (kxx.sum() - np.trace(kxx)) / (n * (n - 1))
    yy = (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
    xy = kxy.sum() / (n * m)
    return float(xx + yy - 2.0 * xy)


def mmd2_unbiased(left, right, bandwidth_sq: float | None = None) -> float:
    """Unbiased three-term MMD² estimate between two samples.

    The value can be negative; no clipping is applied. When ``bandwidth_sq`` is
    omitted the median heuristic over the pooled sample is used.
    """
    xl = as_points(left)
    xr = as_points(right)
    if xl.shape[1] != xr.shape[1]:
        raise ValueError("left and right samples differ in dimension")
    pooled = np.vstack([xl, xr])
    if bandwidth_sq is None:
        bandwidth_sq = median_bandwidth_sq(pooled).sq
    return mmd2_from_kernel(rbf_kernel_matrix(pooled, bandwidth_sq), xl.shape[0])
