import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from groupseg.grouping import (
    Grouping,
    GroupingConfig,
    alternative_grouping,
    cluster_affinity,
    eigengap_k,
    group_features,
    hsic_affinity,
    normalized_laplacian,
    pooled_background_samples,
    spectral_cluster,
)
from groupseg.kernels import hsic
from groupseg.synthetic import planted_blocks


def test_pooled_samples_no_subsampling():
    w = np.random.default_rng(0).normal(size=(2, 10, 3))
    s = pooled_background_samples(list(w), GroupingConfig(seed=0))
    assert s.shape == (20, 3)
    assert np.array_equal(s, np.concatenate(w))


def test_pooled_samples_subsample_is_aligned_and_seeded():
    w = np.random.default_rng(1).normal(size=(5, 1000, 3))
    w[:, :, 1] = 2 * w[:, :, 0]
    cfg = GroupingConfig(seed=9)
    a = pooled_background_samples(list(w), cfg)
    b = pooled_background_samples(list(w), cfg)
    assert a.shape == (3000, 3)
    assert np.array_equal(a, b)
    assert np.array_equal(a[:, 1], 2 * a[:, 0])


def test_pooled_samples_empty():
    with pytest.raises(ValueError):
        pooled_background_samples([], GroupingConfig(seed=0))


def test_affinity_duplicate_beats_shuffled():
    x = np.random.default_rng(3).normal(size=200)
    a = hsic_affinity(np.column_stack([x, x]))
    assert a[0, 1] > 0
    shuffled = hsic(x, np.random.default_rng(4).permutation(x))
    assert a[0, 1] > shuffled


def test_affinity_constant_row_zero_and_symmetric():
    rng = np.random.default_rng(5)
    s = np.column_stack([rng.normal(size=50), np.ones(50), rng.normal(size=50)])
    a = hsic_affinity(s)
    assert np.all(a[1] == 0) and np.all(a[:, 1] == 0)
    assert np.allclose(a, a.T, atol=1e-12)
    assert np.all(np.diag(a) == 0)


def test_laplacian_two_node_block():
    a = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], float)
    lap, kept, singles = normalized_laplacian(a)
    assert kept.tolist() == [0, 1] and singles.tolist() == [2]
    assert np.allclose(lap, [[1, -1], [-1, 1]])
    assert np.allclose(np.linalg.eigvalsh(lap), [0, 2])


def test_laplacian_all_isolated():
    lap, kept, singles = normalized_laplacian(np.zeros((3, 3)))
    assert lap.shape == (0, 0) and singles.tolist() == [0, 1, 2]


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8).flatmap(lambda n: st.lists(st.floats(0, 5), min_size=n * n,
                                                    max_size=n * n).map(
    lambda v: np.array(v).reshape(int(len(v) ** 0.5), -1))))
def test_laplacian_properties(m):
    a = (m + m.T) / 2
    lap, kept, _ = normalized_laplacian(a)
    if not len(kept):
        return
    assert np.array_equal(lap, lap.T)
    lam = np.linalg.eigvalsh(lap)
    assert lam.min() >= -1e-10 and lam.max() <= 2 + 1e-10
    sub = a[np.ix_(kept, kept)].copy()
    np.fill_diagonal(sub, 0)
    v = np.sqrt(sub.sum(axis=1))
    assert np.allclose(lap @ v, 0, atol=1e-9 * max(1.0, v.max()))


def test_eigengap_examples():
    assert eigengap_k([0, 0, 1], 6) == 2
    assert eigengap_k([0.5, 0.5, 0.5], 6) == 1
    assert eigengap_k([0, 0.1, 0.2, 1.5], 6) == 3
    assert eigengap_k([0.3], 6) == 1


@given(st.lists(st.floats(0, 2), min_size=2, max_size=12), st.integers(1, 10))
def test_eigengap_bounds(vals, k_max):
    k = eigengap_k(sorted(vals), k_max)
    assert 1 <= k <= min(k_max, len(vals) - 1)


def test_spectral_two_blocks():
    # {0, 1} linked, 2 isolated: the full pipeline splits 2 off as a singleton
    a = np.array([[0, 1, 0.0], [1, 0, 0], [0, 0, 0]])
    # spectral_cluster itself needs non-zero degrees, so couple 2 weakly
    b = np.array([[0, 1, 1e-6], [1, 0, 1e-6], [1e-6, 1e-6, 0]])
    assert spectral_cluster(b, 2, seed=0) == [[0, 1], [2]]
    assert spectral_cluster(b, 2, seed=0) == spectral_cluster(b, 2, seed=0)
    assert cluster_affinity(a, GroupingConfig(seed=0, quality_threshold=1e-9)) == [[0, 1], [2]]


def test_spectral_k_equals_d():
    b = np.ones((4, 4)) - np.eye(4)
    b[0, 1] = b[1, 0] = 2.0
    assert spectral_cluster(b, 4, seed=1) == [[0], [1], [2], [3]]
    with pytest.raises(ValueError):
        spectral_cluster(b, 5, seed=1)


def test_refinement_dissolves_weak_cluster():
    a = np.full((3, 3), 5e-4)
    np.fill_diagonal(a, 0)
    groups = cluster_affinity(a, GroupingConfig(seed=0))
    assert groups == [[0], [1], [2]]
    # above threshold the same matrix stays one group
    assert cluster_affinity(a * 10, GroupingConfig(seed=0)) == [[0, 1, 2]]


def test_group_features_single_variable():
    g = group_features([np.random.default_rng(0).normal(size=(20, 1))], GroupingConfig(seed=0))
    assert g.groups == ((0,),)


def test_group_features_planted_blocks():
    pb = planted_blocks(0)
    g = group_features(list(pb.windows), GroupingConfig(seed=0))
    assert g.groups == ((0, 1, 2), (3, 4, 5))
    assert adjusted_rand_score(pb.labels, g.labels()) == 1.0


def test_group_features_equivariant_under_column_permutation():
    pb = planted_blocks(3, block_sizes=(2, 3, 1))
    cfg = GroupingConfig(seed=3)
    base = group_features(list(pb.windows), cfg)
    perm = np.array([4, 0, 5, 2, 1, 3])
    moved = group_features(list(pb.windows[:, :, perm]), cfg)
    mapped = sorted(sorted(int(perm[v]) for v in g) for g in moved.groups)
    assert mapped == sorted(list(g) for g in base.groups)


def test_group_features_deterministic():
    pb = planted_blocks(5)
    cfg = GroupingConfig(seed=11)
    assert group_features(list(pb.windows), cfg) == group_features(list(pb.windows), cfg)


def test_alternatives():
    pb = planted_blocks(0)
    w = list(pb.windows)
    assert alternative_grouping([x[:, :4] for x in w], "none",
                                GroupingConfig(seed=0)).groups == ((0,), (1,), (2,), (3,))
    r1 = alternative_grouping(w, "random", GroupingConfig(seed=2), k_hint=2)
    r2 = alternative_grouping(w, "random", GroupingConfig(seed=2), k_hint=2)
    assert r1 == r2 and len(r1.groups) == 2
    with pytest.raises(ValueError):
        alternative_grouping(w, "random", GroupingConfig(seed=2), k_hint=7)
    p = alternative_grouping(w, "pearson", GroupingConfig(seed=0))
    assert (0, 3) not in p.groups
    # variables 0 and 3 are exact negatives (link -u) in a 4-wide block
    pb4 = planted_blocks(1, block_sizes=(4, 2), noise=0.0)
    p4 = alternative_grouping(list(pb4.windows), "pearson", GroupingConfig(seed=1))
    assert any({0, 3} <= set(g) for g in p4.groups)


def test_grouping_validation_and_roundtrip():
    g = Grouping(((2, 0), (1,)), "pearson", seed=4)
    assert g.groups == ((0, 2), (1,))
    assert Grouping.from_json(g.to_json()) == g
    assert g.to_dict() == {"method": "pearson", "groups": [[0, 2], [1]],
                           "variable_names": ["x0", "x1", "x2"], "seed": 4}
    with pytest.raises(ValueError):
        Grouping(((0,), (0, 1)))
    with pytest.raises(ValueError):
        Grouping(((0,), (2,)))
