"""Evaluation harness: deletion curves, ΔAUC, grouping comparison, robustness,
sensitivity sweeps and runtime benchmarking.

All comparisons happen on cell-level importance maps, so explanations with
different player layouts are scored with the same deletion budget: at
fraction r exactly ``floor(r * T * D)`` cells are masked.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .attribution import MaskingBaseline, shapley_permutation
from .grouping import Grouping
from .pipeline import (
    DEFAULT_FRACTIONS,
    PipelineConfig,
    explain,
    fit_grouping,
    make_players,
    project_to_cells,
)
from .predictors import CountingPredictor

__all__ = [
    "DeletionCurve",
    "BenchRecord",
    "project_to_cells",
    "deletion_order",
    "n_masked",
    "deletion_curve",
    "delta_auc",
    "loss_at",
    "cosine_similarity",
    "grouping_comparison",
    "robustness_cosine",
    "sensitivity_sweep",
    "runtime_bench",
    "fit_cost_model",
    "DEFAULT_FRACTIONS",
]

LOSS_MODES = ("output", "label")


@dataclass(frozen=True, eq=False)
class DeletionCurve:
    fractions: np.ndarray
    delta_loss: np.ndarray
    loss: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {"fractions": self.fractions.tolist(), "delta_loss": self.delta_loss.tolist()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fraction", "delta_loss"])
        for f, v in zip(self.fractions, self.delta_loss):
            w.writerow([repr(float(f)), repr(float(v))])
        return buf.getvalue()


@dataclass(frozen=True)
class BenchRecord:
    method: str
    M: int
    mean_seconds: float
    std_seconds: float
    n_samples: int
    mean_calls: float
    mean_players: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def deletion_order(importance: np.ndarray) -> np.ndarray:
    """Flat cell indices by descending importance; ties in row-major order."""
    flat = np.asarray(importance, dtype=float).ravel()
    return np.argsort(-flat, kind="stable")


def n_masked(fraction: float, n_cells: int) -> int:
    # small slack so that e.g. 0.6 * 100 is not floored to 59 by rounding
    return int(math.floor(fraction * n_cells + 1e-9))


def _check_fractions(fractions) -> np.ndarray:
    fr = np.asarray(fractions, dtype=float)
    if fr.ndim != 1 or fr.size == 0:
        raise ValueError("fractions must be a non-empty 1-D sequence")
    if (fr < 0).any() or (fr > 1).any():
        raise ValueError("deletion fractions must lie in [0, 1]")
    if fr[0] != 0 or (np.diff(fr) <= 0).any():
        raise ValueError("fractions must be strictly ascending and start at 0")
    return fr


def deletion_curve(predictor, window, importance, fractions=DEFAULT_FRACTIONS,
                   baseline: MaskingBaseline | None = None, loss_mode: str = "output",
                   label: float | None = None, task: str = "regression") -> DeletionCurve:
    """Loss increase as the most important cells are progressively masked.

    ``loss_mode="output"`` measures ``(f(masked) - f(X))^2``. ``loss_mode="label"``
    measures squared error to ``label`` (``task="regression"``) or
    ``-log f(masked)`` where f returns the probability of the true class
    (``task="classification"``). Increases over the unmasked loss are clipped
    at zero.
    """
    if baseline is None:
        raise ValueError("deletion needs a masking baseline")
    if loss_mode not in LOSS_MODES:
        raise ValueError(f"loss_mode must be one of {LOSS_MODES}")
    fr = _check_fractions(fractions)
    x = np.asarray(window, dtype=float)
    imp = np.asarray(importance, dtype=float)
    if imp.shape != x.shape:
        raise ValueError(f"importance shape {imp.shape} != window shape {x.shape}")
    T, D = x.shape
    order = deletion_order(imp)
    fill = baseline.fill(T).ravel()
    batch = np.empty((fr.size, T * D))
    for i, f in enumerate(fr):
        row = x.ravel().copy()
        idx = order[: n_masked(f, T * D)]
        row[idx] = fill[idx]
        batch[i] = row
    out = np.asarray(predictor(batch.reshape(fr.size, T, D)), dtype=float).ravel()
    if loss_mode == "output":
        loss = (out - out[0]) ** 2
    elif label is None:
        raise ValueError("label loss needs a label")
    elif task == "regression":
        loss = (out - label) ** 2
    elif task == "classification":
        loss = -np.log(np.clip(out, 1e-12, None))
    else:
        raise ValueError(f"unknown task {task!r}")
    delta = np.maximum(loss - loss[0], 0.0)
    return DeletionCurve(fr, delta, loss)


def delta_auc(curve: DeletionCurve) -> float:
    """Trapezoidal area under the clipped Δloss curve."""
    return float(np.trapezoid(curve.delta_loss, curve.fractions))


def loss_at(curve: DeletionCurve, fraction: float) -> float:
    hit = np.flatnonzero(np.isclose(curve.fractions, fraction, atol=1e-12))
    if hit.size == 0:
        raise ValueError(f"fraction {fraction} is not on the deletion grid")
    return float(curve.delta_loss[hit[0]])


def mean_curve(curves: Sequence[DeletionCurve]) -> DeletionCurve:
    fr = curves[0].fractions
    return DeletionCurve(fr, np.mean([c.delta_loss for c in curves], axis=0),
                         np.mean([c.loss for c in curves], axis=0))


def cosine_similarity(a, b) -> float:
    """Cosine similarity of two flattened maps; NaN if either is all zeros."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float("nan")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _score_window(predictor, window, background, config, grouping, labels=None, i=0,
                  player_set=None):
    label = None if labels is None else labels[i]
    if player_set is None:
        exp = explain(predictor, window, background, config, grouping)
        importance, baseline = exp.importance, exp.result.baseline
    else:
        baseline = MaskingBaseline.from_background(background, config.mask_mode,
                                                   config.noise_seed)
        res = shapley_permutation(predictor, window, player_set, config.M, baseline,
                                  config.attribution_seed)
        importance = project_to_cells(res, player_set)
    return deletion_curve(predictor, window, importance, config.fractions, baseline,
                          config.loss_mode, label)


def grouping_comparison(predictor, windows, background, strategies: Sequence[str],
                        config: PipelineConfig, labels=None) -> dict:
    """Run the full pipeline once per grouping strategy, everything else fixed.

    ``random`` uses as many groups as the HSIC grouping finds. Returns a dict
    with per-strategy groupings, mean curves and a ``table`` of
    ``{"strategy", "delta_auc", "delta_auc_std"}`` rows (per-window ΔAUC
    mean and std).
    """
    if len(windows) < 1:
        raise ValueError("need at least one window")
    hsic = None
    if "random" in strategies or "hsic" in strategies:
        hsic = fit_grouping(background, config.with_(grouping_method="hsic"))
    out = {"groupings": {}, "curves": {}, "table": []}
    for name in strategies:
        if name == "hsic":
            grouping = hsic
        else:
            k = len(hsic.groups) if hsic is not None else None
            grouping = fit_grouping(background, config.with_(grouping_method=name), k_hint=k)
        cfg = config.with_(grouping_method=name, scheme="group_segment")
        curves = [_score_window(predictor, w, background, cfg, grouping, labels, i)
                  for i, w in enumerate(windows)]
        aucs = [delta_auc(c) for c in curves]
        out["groupings"][name] = grouping
        out["curves"][name] = mean_curve(curves)
        out["table"].append({"strategy": name, "delta_auc": float(np.mean(aucs)),
                             "delta_auc_std": float(np.std(aucs))})
    return out


def robustness_cosine(predictor, window, background_pool, n_runs: int, config: PipelineConfig,
                      background_size: int, seed: int, grouping: Grouping | None = None,
                      player_set=None) -> dict:
    """Attribution stability when only the background subset changes.

    The players are built once (the grouping comes from the whole pool) unless
    a fixed ``player_set`` is given; each run draws ``background_size``
    windows without replacement, recomputes the masking statistics and
    re-attributes. Returns all pairwise cosine similarities plus min/mean/max
    over the defined ones.
    """
    pool = [np.asarray(w, dtype=float) for w in background_pool]
    if n_runs < 2:
        raise ValueError("robustness needs at least two runs")
    if not 1 <= background_size <= len(pool):
        raise ValueError(f"background_size must be in [1, {len(pool)}]")
    if player_set is None:
        if config.scheme == "group_segment" and grouping is None:
            grouping = fit_grouping(pool, config)
        player_set, _ = make_players(window, config, grouping)
    maps = []
    for child in np.random.SeedSequence(seed).spawn(n_runs):
        idx = np.random.default_rng(child).choice(len(pool), background_size, replace=False)
        baseline = MaskingBaseline.from_background([pool[i] for i in idx], config.mask_mode,
                                                   config.noise_seed)
        res = shapley_permutation(predictor, window, player_set, config.M, baseline,
                                  config.attribution_seed)
        maps.append(project_to_cells(res, player_set))
    pairs = []
    for i, j in itertools.combinations(range(n_runs), 2):
        pairs.append({"i": i, "j": j, "cosine": cosine_similarity(maps[i], maps[j])})
    vals = np.array([p["cosine"] for p in pairs])
    ok = vals[~np.isnan(vals)]
    summary = {"min": float(ok.min()), "mean": float(ok.mean()), "max": float(ok.max())} \
        if ok.size else {"min": None, "mean": None, "max": None}
    return {"pairs": pairs, "n_undefined": int(np.isnan(vals).sum()), **summary,
            "maps": maps}


SWEEP_AXES = ("l_min", "masking_mode")


def sensitivity_sweep(predictor, windows, background, axis: str, values: Sequence,
                      config: PipelineConfig, labels=None,
                      grouping: Grouping | None = None, player_set=None) -> list[dict]:
    """Re-run explanation + deletion per value of one hyperparameter.

    Rows are ``{"value", "delta_auc", "delta_loss_at_0.60"}`` averaged over the
    windows. The masking mode applies to both attribution and deletion. A
    fixed ``player_set`` skips grouping and segmentation (masking sweeps only).
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    if not values:
        raise ValueError("sweep needs at least one value")
    if player_set is not None and axis == "l_min":
        raise ValueError("an l_min sweep needs data-driven players, not a fixed player set")
    if player_set is None and config.scheme == "group_segment" and grouping is None:
        grouping = fit_grouping(background, config)
    rows = []
    for v in values:
        if axis == "l_min":
            cfg = config.with_(segmentation=replace(config.segmentation, l_min=int(v)))
        else:
            cfg = config.with_(mask_mode=str(v))
        curves = [_score_window(predictor, w, background, cfg, grouping, labels, i, player_set)
                  for i, w in enumerate(windows)]
        rows.append({
            "value": v,
            "delta_auc": float(np.mean([delta_auc(c) for c in curves])),
            "delta_loss_at_0.60": float(np.mean([loss_at(c, 0.60) for c in curves])),
        })
    return rows


def runtime_bench(predictor, windows, background, methods: Sequence[str],
                  budgets: Sequence[int], config: PipelineConfig, n_samples: int | None = None,
                  budget_unit: str = "permutations", grouping: Grouping | None = None,
                  clock=time.perf_counter) -> list[BenchRecord]:
    """Wall-clock seconds per explained window for each (method, budget).

    ``methods`` are player schemes (``group_segment``, ``cell``, ``timestep``,
    ``window``, ``subsequence``). Timing covers player construction (for
    group_segment: segmentation of the window; the grouping is fitted once up
    front), masked-input generation, predictor calls and projection.
    ``budget_unit="forward_calls"`` converts a budget B into
    ``max(1, B // (|P| + 1))`` permutations. Runs serially.
    """
    if not budgets:
        raise ValueError("budgets must be non-empty")
    if budget_unit not in ("permutations", "forward_calls"):
        raise ValueError("budget_unit must be 'permutations' or 'forward_calls'")
    samples = list(windows)[: n_samples or len(windows)]
    if not samples:
        raise ValueError("no windows to benchmark")
    baseline = MaskingBaseline.from_background(background, config.mask_mode, config.noise_seed)
    if "group_segment" in methods and grouping is None:
        grouping = fit_grouping(background, config)
    records = []
    for method in methods:
        cfg = config.with_(scheme=method)
        for budget in budgets:
            times, calls, sizes = [], [], []
            for w in samples:
                counter = CountingPredictor(predictor)
                t0 = clock()
                player_set, _ = make_players(w, cfg, grouping)
                m = budget if budget_unit == "permutations" else \
                    max(1, budget // (len(player_set) + 1))
                res = shapley_permutation(counter, w, player_set, m, baseline,
                                          config.attribution_seed)
                project_to_cells(res, player_set)
                times.append(clock() - t0)
                calls.append(counter.calls)
                sizes.append(len(player_set))
            records.append(BenchRecord(method, int(budget), float(np.mean(times)),
                                       float(np.std(times)), len(samples),
                                       float(np.mean(calls)), float(np.mean(sizes))))
    return records


def fit_cost_model(records: Sequence[BenchRecord]) -> tuple[float, float, float]:
    """Least-squares fit ``seconds ~ a + b * calls``; returns ``(a, b, r_squared)``."""
    x = np.array([r.mean_calls for r in records])
    y = np.array([r.mean_seconds for r in records])
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), float(r2)
