import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from groupseg.attribution import AttributionResult, MaskingBaseline, shapley_exact
from groupseg.evaluation import (
    BenchRecord,
    DeletionCurve,
    cosine_similarity,
    deletion_curve,
    deletion_order,
    delta_auc,
    fit_cost_model,
    grouping_comparison,
    loss_at,
    n_masked,
    robustness_cosine,
    runtime_bench,
    sensitivity_sweep,
)
from groupseg.grouping import GroupingConfig
from groupseg.pipeline import DEFAULT_FRACTIONS, PipelineConfig, project_to_cells
from groupseg.players import baseline_players, build_players
from groupseg.predictors import LinearPredictor, PlayerAdditivePredictor
from groupseg.segmentation import SegmentationConfig
from groupseg.synthetic import planted_blocks, player_fixture

import oracles


def config(seed=0, l_min=13, M=4, **kw):
    return PipelineConfig(GroupingConfig(seed=seed),
                          SegmentationConfig(l_min=l_min, seed=seed, num_permutations=40),
                          M=M, attribution_seed=seed, **kw)


def three_players():
    return build_players([(0, 1), (2,)], [((0, 4), (4, 8)), ((0, 8),)], T=8, D=3)


def test_project_examples():
    ps = build_players([(0,)], [((0, 3), (3, 4))], T=4, D=1)
    m = project_to_cells(np.array([6.0, 1.0]), ps)
    assert m[:3, 0].tolist() == [2.0, 2.0, 2.0] and m[3, 0] == 1.0
    cell = baseline_players("cell", 3, 2)
    phi = np.arange(6.0)
    assert np.array_equal(project_to_cells(phi, cell), phi.reshape(3, 2))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 4), st.integers(1, 6), st.integers(0, 999))
def test_projection_conserves(T, D, w, seed):
    ps = baseline_players("window", T, D, window_len=w)
    phi = np.random.default_rng(seed).normal(size=len(ps)) * 10
    assert abs(project_to_cells(phi, ps).sum() - phi.sum()) <= 1e-9


def test_deletion_order_row_major_ties():
    imp = np.array([[1.0, 2.0], [2.0, 1.0]])
    assert deletion_order(imp).tolist() == [1, 2, 0, 3]


def test_n_masked_floor():
    assert n_masked(0.6, 100) == 60
    assert n_masked(0.05 * 7, 20) == 7
    assert n_masked(0.33, 10) == 3
    assert n_masked(1.0, 24) == 24


def test_deletion_matches_oracle():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 3))
    imp = np.round(rng.normal(size=(6, 3)), 1)  # rounding creates ties
    base = MaskingBaseline("noise", rng.normal(size=3), np.ones(3), seed=5)

    def f(b):
        b = np.asarray(b)
        return np.tanh(b).sum(axis=(1, 2)) + b[:, 0, 0] ** 2

    curve = deletion_curve(f, x, imp, DEFAULT_FRACTIONS, base)
    ref = oracles.deletion_losses(lambda y: float(f(y[None])[0]), x, imp, DEFAULT_FRACTIONS,
                                  base.fill(6))
    assert np.allclose(curve.delta_loss, ref, atol=1e-12)
    assert curve.delta_loss[0] == 0


def test_deletion_full_fraction_and_zero():
    fx = player_fixture(1)
    x = fx.windows[0]
    res = shapley_exact(fx.predictor, x, fx.player_set, fx.baseline)
    imp = project_to_cells(res, fx.player_set)
    curve = deletion_curve(fx.predictor, x, imp, [0.0, 1.0], fx.baseline)
    assert curve.delta_loss[0] == 0.0
    assert curve.delta_loss[1] == pytest.approx((res.f_empty - res.f_full) ** 2, rel=1e-12)


def test_deletion_additive_hand_computed():
    ps = three_players()
    mu = np.array([0.5, -1.0, 2.0])
    x = np.tile(mu + 1.0, (8, 1))
    f = PlayerAdditivePredictor([1.0, 3.0, 0.5], ps, mu)
    base = MaskingBaseline("mean", mu)
    imp = project_to_cells(shapley_exact(f, x, ps, base), ps)
    curve = deletion_curve(f, x, imp, [0.0, 1 / 3, 2 / 3, 1.0], base)
    # player 1 (weight 3) goes first, then player 0, then player 2
    assert np.allclose(curve.delta_loss, [0.0, 9.0, 16.0, 20.25], atol=1e-12)


def test_deletion_rejects_bad_fractions():
    x = np.zeros((2, 2))
    base = MaskingBaseline("zero", [0.0, 0.0])
    for fr in ([0.0, 1.5], [0.1, 0.5], [0.0, 0.5, 0.4]):
        with pytest.raises(ValueError):
            deletion_curve(lambda b: np.zeros(len(b)), x, x, fr, base)


def test_label_losses():
    x = np.ones((2, 2))
    base = MaskingBaseline("zero", [0.0, 0.0])
    lin = LinearPredictor(np.ones((2, 2)))
    c = deletion_curve(lin, x, x, [0.0, 0.5, 1.0], base, "label", label=4.0)
    assert c.loss.tolist() == [0.0, 4.0, 16.0]

    def prob(b):
        return 1.0 / (1.0 + np.exp(-np.asarray(b).sum(axis=(1, 2))))

    c = deletion_curve(prob, x, x, [0.0, 1.0], base, "label", label=1.0, task="classification")
    assert c.loss[1] == pytest.approx(math.log(2))
    assert c.delta_loss[1] == pytest.approx(math.log(2) - (-math.log(prob(x[None])[0])))
    with pytest.raises(ValueError):
        deletion_curve(lin, x, x, [0.0, 1.0], base, "label")


def test_delta_auc_examples():
    fr = np.array(DEFAULT_FRACTIONS)
    assert delta_auc(DeletionCurve(fr, np.zeros(21))) == 0.0
    const = np.ones(21)
    const[0] = 0.0
    assert delta_auc(DeletionCurve(fr, const)) == pytest.approx(1 - 0.05 / 2, abs=1e-12)
    assert delta_auc(DeletionCurve(fr, 2 * fr)) == pytest.approx(1.0, abs=1e-12)
    assert delta_auc(DeletionCurve(fr, const)) == pytest.approx(oracles.trapezoid(const, fr))


@given(arrays(float, 21, elements=st.floats(0, 100)), arrays(float, 21, elements=st.floats(0, 5)))
def test_delta_auc_monotone(base, extra):
    fr = np.array(DEFAULT_FRACTIONS)
    assert delta_auc(DeletionCurve(fr, base + extra)) >= delta_auc(DeletionCurve(fr, base))


def test_loss_at_and_csv():
    fr = np.array(DEFAULT_FRACTIONS)
    c = DeletionCurve(fr, fr * 3)
    assert loss_at(c, 0.60) == pytest.approx(1.8)
    with pytest.raises(ValueError):
        loss_at(c, 0.61)
    lines = c.to_csv().splitlines()
    assert lines[0] == "fraction,delta_loss" and len(lines) == 22


def test_cosine():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    assert cosine_similarity(a, -a) == pytest.approx(-1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 2.0]) == 0.0
    assert math.isnan(cosine_similarity(a, np.zeros_like(a)))


def test_robustness_identical_background():
    fx = player_fixture(2, spread=0.3)
    cfg = config(M=3)
    out = robustness_cosine(fx.predictor, fx.windows[0], list(fx.background), 3, cfg,
                            background_size=len(fx.background), seed=0,
                            player_set=fx.player_set)
    assert len(out["pairs"]) == 3 and out["n_undefined"] == 0
    assert all(p["cosine"] == pytest.approx(1.0, abs=1e-12) for p in out["pairs"])


def test_robustness_varies_with_subsets():
    pb = planted_blocks(0, n_windows=12, T=40)
    out = robustness_cosine(LinearPredictor(np.ones((40, 6))), pb.windows[0], list(pb.windows),
                            4, config(M=3), background_size=4, seed=1)
    assert len(out["pairs"]) == 6
    assert out["min"] <= out["mean"] <= out["max"] <= 1.0
    with pytest.raises(ValueError):
        robustness_cosine(LinearPredictor(np.ones((40, 6))), pb.windows[0], list(pb.windows),
                          1, config(), background_size=4, seed=1)


def test_sensitivity_shapes_and_determinism():
    pb = planted_blocks(1, n_windows=4, T=48)
    f = LinearPredictor(np.ones((48, 6)))
    cfg = config(seed=1, l_min=4)
    rows = sensitivity_sweep(f, pb.windows[:2], list(pb.windows), "l_min", [4, 6, 8, 10, 12, 16],
                             cfg)
    assert [r["value"] for r in rows] == [4, 6, 8, 10, 12, 16]
    assert all(set(r) == {"value", "delta_auc", "delta_loss_at_0.60"} for r in rows)
    mrows = sensitivity_sweep(f, pb.windows[:2], list(pb.windows), "masking_mode",
                              ["mean", "zero", "noise"], cfg)
    assert len(mrows) == 3
    again = sensitivity_sweep(f, pb.windows[:2], list(pb.windows), "masking_mode",
                              ["mean", "zero", "noise"], cfg)
    assert again == mrows
    with pytest.raises(ValueError):
        sensitivity_sweep(f, pb.windows[:2], list(pb.windows), "alpha", [0.1], cfg)


def test_grouping_comparison_rows_and_determinism():
    pb = planted_blocks(2, n_windows=4, T=40)
    f = LinearPredictor(np.ones((40, 6)))
    one = grouping_comparison(f, pb.windows[:1], list(pb.windows), ["hsic"], config(l_min=8))
    assert len(one["table"]) == 1 and one["table"][0]["strategy"] == "hsic"
    a = grouping_comparison(f, pb.windows[:2], list(pb.windows), ["hsic", "random", "none"],
                            config(l_min=8))
    b = grouping_comparison(f, pb.windows[:2], list(pb.windows), ["hsic", "random", "none"],
                            config(l_min=8))
    assert a["table"] == b["table"]
    assert len(a["groupings"]["random"].groups) == len(a["groupings"]["hsic"].groups)


class FakeClock:
    def __init__(self):
        self.t = 0.0

    def __call__(self):
        self.t += 1.0
        return self.t


def test_runtime_bench_records_and_calls():
    pb = planted_blocks(0, n_windows=3, T=24)
    f = LinearPredictor(np.ones((24, 6)))
    cfg = config(l_min=6)
    recs = runtime_bench(f, pb.windows, list(pb.windows), ["group_segment", "cell"],
                         [10, 20, 30, 50], cfg, n_samples=2, clock=FakeClock())
    assert len(recs) == 8
    assert all(r.mean_seconds == 1.0 and r.std_seconds == 0.0 for r in recs)
    for r in recs:
        assert r.mean_calls == r.M * (r.mean_players + 1)
    cell = [r for r in recs if r.method == "cell"]
    assert all(r.mean_players == 24 * 6 for r in cell)
    one = runtime_bench(f, pb.windows, list(pb.windows), ["timestep"], [5], cfg, n_samples=1)
    assert one[0].std_seconds == 0.0 and one[0].n_samples == 1
    budget = runtime_bench(f, pb.windows, list(pb.windows), ["timestep"], [100], cfg,
                           n_samples=1, budget_unit="forward_calls")
    assert budget[0].mean_calls == (100 // 25) * 25


def test_fit_cost_model_exact_line():
    recs = [BenchRecord("m", k, 0.5 + 0.01 * c, 0.0, 1, c, 1.0)
            for k, c in ((1, 10.0), (2, 20.0), (3, 35.0))]
    a, b, r2 = fit_cost_model(recs)
    assert a == pytest.approx(0.5) and b == pytest.approx(0.01) and r2 == pytest.approx(1.0)


def test_attribution_result_projection_accepts_result():
    ps = three_players()
    res = AttributionResult(np.array([8.0, 4.0, 2.0]), 1, 0.0, 0.0,
                            MaskingBaseline("zero", [0, 0, 0]), "x", 0)
    m = project_to_cells(res, ps)
    assert m[0, 0] == 1.0 and m[7, 1] == 0.5 and m[0, 2] == 0.25
