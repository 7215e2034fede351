# %% [markdown]
# Segmenting a group's time axis
# ==============================
#
# Binary segmentation with an MMD split statistic. A split is accepted only
# if its statistic beats a permutation-calibrated threshold (alpha = 0.05),
# and no segment may be shorter than ``l_min``.

# %%
import numpy as np

from groupseg import SegmentationConfig, segment_group
from groupseg.synthetic import mean_shift

cfg = SegmentationConfig(l_min=13, seed=0)

x = mean_shift(seed=0, T=128, shift_at=64, magnitude=3.0)[0]
seg = segment_group(x, cfg)
print("3-sigma shift at t=64 ->", seg.segments)

noise = mean_shift(seed=1, magnitude=0.0)[0]
print("pure noise            ->", segment_group(noise, cfg).segments)

# %% [markdown]
# Segments are half-open ``(start, end)`` pairs with 0-based indices. The JSON
# form uses 1-based, end-exclusive boundaries.

# %%
print(seg.to_dict())

# %% [markdown]
# Two shifts: the recursion is depth-first and left-first, and every split is
# compared against the same top-level threshold.

# %%
rng = np.random.default_rng(3)
y = rng.normal(size=(150, 2))
y[50:100] += 2.5
y[100:] -= 2.0
print("two shifts            ->", segment_group(y, cfg).segments)

# %% [markdown]
# A window shorter than ``2 * l_min`` has no admissible split and stays whole.
# One shorter than ``l_min`` itself is also flagged as under-length.

# %%
for T in (20, 10):
    short = segment_group(rng.normal(size=T), cfg)
    print(f"T={T}, l_min=13        ->", short.segments, "under_length =", short.under_length)
