# %% [markdown]
# Faithfulness by deletion
# ========================
#
# Rank the cells by importance and mask the top fraction r, for r in
# 0, 0.05, ..., 1. Then record how far the prediction moves. The area under
# that curve (dAUC) is larger when the ranking puts the important cells first.

# %%
import numpy as np

from groupseg import GroupingConfig, PipelineConfig, SegmentationConfig, explain
from groupseg import deletion_curve, delta_auc, project_to_cells, shapley_exact
from groupseg.evaluation import grouping_comparison, sensitivity_sweep
from groupseg.synthetic import planted_blocks, player_fixture

fx = player_fixture(seed=2)
x = fx.windows[0]
exact_map = project_to_cells(shapley_exact(fx.predictor, x, fx.player_set, fx.baseline),
                             fx.player_set)
random_map = np.random.default_rng(0).uniform(size=x.shape)
for name, m in (("exact Shapley", exact_map), ("random", random_map)):
    c = deletion_curve(fx.predictor, x, m, baseline=fx.baseline)
    print(f"{name:<14} dAUC = {delta_auc(c):.3f}")

# %% [markdown]
# The full pipeline on block-structured data. The predictor depends on the
# energy of the first block, so a grouping that keeps that block together should
# delete more efficiently than a random grouping with the same number of groups.

# %%
pb = planted_blocks(seed=1, n_windows=10, T=100)


def block_energy(batch):
    return (np.asarray(batch)[:, :, :3].sum(axis=2) ** 2).mean(axis=1)


cfg = PipelineConfig(GroupingConfig(seed=1), SegmentationConfig(l_min=13, seed=1),
                     M=20, attribution_seed=1)
exp = explain(block_energy, pb.windows[0], pb.windows, cfg)
print("groups:", exp.grouping.groups, " players:", len(exp.player_set))

table = grouping_comparison(block_energy, pb.windows[:2], pb.windows, ["hsic", "random"],
                            cfg)["table"]
for row in table:
    print(f"{row['strategy']:<7} dAUC = {row['delta_auc']:.2f}")

# %% [markdown]
# Sensitivity to the masking baseline. These variables are centred near zero,
# so mean and zero masking almost coincide. Noise masking injects variance and
# moves the curve a lot. The CLI walkthrough shows a fixture with nonzero
# background levels, where mean and zero masking differ clearly.

# %%
for row in sensitivity_sweep(block_energy, pb.windows[:2], pb.windows, "masking_mode",
                             ["mean", "zero", "noise"], cfg):
    print(f"{row['value']:<6} dAUC = {row['delta_auc']:.2f}  "
          f"dLoss@0.60 = {row['delta_loss_at_0.60']:.2f}")
