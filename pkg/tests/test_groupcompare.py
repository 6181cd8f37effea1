"""Edgewise tests, component clustering (nbs), and spatial pairwise clustering."""

import numpy as np
import pytest
from scipy import stats

from fcnets.estimators import ConnectionMatrix
from fcnets.groupcompare import (
    adjacency_from_coordinates,
    edgewise_compare,
    nbs,
    spc,
)
from fcnets.panels import fisher_z


def _edge_idx(n):
    iu, ju = np.triu_indices(n, 1)
    return {(int(a), int(b)): k for k, (a, b) in enumerate(zip(iu, ju))}


def cm_from_z(z, n, measure="correlation"):
    vals = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    vals[iu, ju] = np.tanh(z)
    vals += vals.T
    return ConnectionMatrix(vals, measure, {})


def make_groups(n, subjects, shift_edges=(), shift=1.0, seed=0, paired_noise=True):
    """Two groups; with paired_noise the groups share identical base subjects,
    so unshifted edges have exactly zero observed t."""
    rng = np.random.default_rng(seed)
    m = n * (n - 1) // 2
    idx = _edge_idx(n)
    base = [0.2 * rng.standard_normal(m) for _ in range(subjects)]
    if paired_noise:
        base_b = base
    else:
        base_b = [0.2 * rng.standard_normal(m) for _ in range(subjects)]
    group_b = [cm_from_z(z, n) for z in base_b]
    group_a = []
    for z in base:
        z2 = z.copy()
        for e in shift_edges:
            z2[idx[e]] += shift
        group_a.append(cm_from_z(z2, n))
    return group_a, group_b


def test_edgewise_matches_scipy():
    n = 5
    ga, gb = make_groups(n, subjects=7, seed=3, paired_noise=False)
    res = edgewise_compare(ga, gb)
    az = np.vstack([fisher_z(cm.values[np.triu_indices(n, 1)]) for cm in ga])
    bz = np.vstack([fisher_z(cm.values[np.triu_indices(n, 1)]) for cm in gb])
    ref = stats.ttest_ind(az, bz, axis=0, equal_var=True)
    assert np.allclose(res.t, ref.statistic, atol=1e-12)
    assert np.allclose(res.p, ref.pvalue, atol=1e-12)


def test_edgewise_finds_shifted_edge():
    ga, gb = make_groups(6, subjects=6, shift_edges=[(0, 1)], shift=1.0, seed=1)
    res = edgewise_compare(ga, gb)
    assert res.significant_edges(alpha=0.05) == [(0, 1)]
    k = _edge_idx(6)[(0, 1)]
    assert res.t[k] > 4
    bon = edgewise_compare(ga, gb, correction="bonferroni")
    assert bon.q[k] == pytest.approx(min(bon.p[k] * bon.p.size, 1.0))


def test_edgewise_skips_fisher_for_noncorrelation():
    # values above 1 would break the z-transform if it were applied
    rng = np.random.default_rng(9)
    n = 4
    mats = []
    for _ in range(8):
        vals = np.zeros((n, n))
        iu, ju = np.triu_indices(n, 1)
        vals[iu, ju] = 1.5 + rng.random(iu.size)
        vals += vals.T
        mats.append(ConnectionMatrix(vals, "mutual_information", {}))
    res = edgewise_compare(mats[:4], mats[4:])
    raw_a = np.vstack([cm.values[np.triu_indices(n, 1)] for cm in mats[:4]])
    raw_b = np.vstack([cm.values[np.triu_indices(n, 1)] for cm in mats[4:]])
    ref = stats.ttest_ind(raw_a, raw_b, axis=0, equal_var=True)
    assert np.allclose(res.t, ref.statistic)


def test_edgewise_undefined_edges():
    n = 4
    ga, gb = make_groups(n, subjects=5, seed=2, paired_noise=False)
    for cm in ga + gb:
        cm.values[0, 1] = cm.values[1, 0] = 0.0
    res = edgewise_compare(ga, gb)
    k = _edge_idx(n)[(0, 1)]
    assert res.undefined[k]
    assert np.isnan(res.p[k])
    assert res.q[k] == 1.0
    assert (0, 1) not in res.significant_edges(alpha=0.99)


def test_edgewise_guards():
    ga, gb = make_groups(4, subjects=3, seed=0)
    with pytest.raises(ValueError, match="unknown correction"):
        edgewise_compare(ga, gb, correction="holm")
    with pytest.raises(ValueError, match="at least 2"):
        edgewise_compare(ga[:1], gb)
    bad = make_groups(5, subjects=3, seed=0)[0]
    with pytest.raises(ValueError, match="node counts"):
        edgewise_compare(ga, bad)


SCENARIO_COORDS = np.array(
    [[0.0, 0.0], [0.5, 0.0], [5.0, 0.0], [10.0, 0.0], [15.0, 0.0], [20.0, 0.0], [25.0, 0.0]]
)


def test_adjacency_from_coordinates():
    adj = adjacency_from_coordinates(SCENARIO_COORDS, radius=1.0)
    assert adj[0, 1] and adj[1, 0]
    assert adj.sum() == 2
    assert not adj.diagonal().any()


def test_clustering_scenario_shared_target():
    # adjacent seed nodes 0,1 each connect to two distant targets: one nbs
    # component, but spatial pairwise clustering splits it per target
    planted = [(0, 2), (1, 2), (0, 3), (1, 3)]
    ga, gb = make_groups(7, subjects=6, shift_edges=planted, shift=1.0, seed=4)
    adj = adjacency_from_coordinates(SCENARIO_COORDS, radius=1.0)
    r_nbs = nbs(ga, gb, t_threshold=5.0, permutations=199, seed=0)
    assert len(r_nbs.clusters) == 1
    assert set(r_nbs.clusters[0]) == set(planted)
    r_spc = spc(ga, gb, t_threshold=5.0, node_adjacency=adj, permutations=199, seed=0)
    got = {frozenset(c) for c in r_spc.clusters}
    assert got == {frozenset([(0, 2), (1, 2)]), frozenset([(0, 3), (1, 3)])}
    assert r_spc.sizes == [2, 2]


def test_clustering_scenario_spur_excluded():
    # a third edge hanging off the shared node joins the nbs component but
    # has no pairwise spatial neighbor, so it drops out of spc
    planted = [(0, 2), (1, 2), (2, 6)]
    ga, gb = make_groups(7, subjects=6, shift_edges=planted, shift=1.0, seed=5)
    adj = adjacency_from_coordinates(SCENARIO_COORDS, radius=1.0)
    r_nbs = nbs(ga, gb, t_threshold=5.0, permutations=199, seed=0)
    assert len(r_nbs.clusters) == 1 and set(r_nbs.clusters[0]) == set(planted)
    r_spc = spc(ga, gb, t_threshold=5.0, node_adjacency=adj, permutations=199, seed=0)
    assert len(r_spc.clusters) == 1
    assert set(r_spc.clusters[0]) == {(0, 2), (1, 2)}


def test_clustering_scenario_chain_only_topological():
    # a two-edge chain through a shared node is one nbs component yet has no
    # spatial pairing at all, so spc reports nothing
    planted = [(0, 2), (2, 3)]
    ga, gb = make_groups(7, subjects=6, shift_edges=planted, shift=1.0, seed=6)
    adj = adjacency_from_coordinates(SCENARIO_COORDS, radius=1.0)
    r_nbs = nbs(ga, gb, t_threshold=5.0, permutations=199, seed=0)
    assert len(r_nbs.clusters) == 1 and set(r_nbs.clusters[0]) == set(planted)
    r_spc = spc(ga, gb, t_threshold=5.0, node_adjacency=adj, permutations=199, seed=0)
    assert r_spc.clusters == []


def test_nbs_alternatives():
    ga, gb = make_groups(6, subjects=6, shift_edges=[(0, 1), (0, 2)], shift=1.2, seed=7)
    up = nbs(ga, gb, t_threshold=4.0, permutations=199, seed=1, alternative="greater")
    assert len(up.clusters) == 1
    down = nbs(ga, gb, t_threshold=4.0, permutations=199, seed=1, alternative="less")
    assert down.clusters == []
    flipped = nbs(gb, ga, t_threshold=4.0, permutations=199, seed=1, alternative="less")
    assert len(flipped.clusters) == 1
    with pytest.raises(ValueError, match="unknown alternative"):
        nbs(ga, gb, t_threshold=4.0, permutations=199, alternative="both")


def test_nbs_significance_and_determinism():
    ga, gb = make_groups(7, subjects=8, shift_edges=[(0, 1), (1, 2), (0, 2)], shift=1.5, seed=8)
    a = nbs(ga, gb, t_threshold=4.0, permutations=199, seed=3)
    b = nbs(ga, gb, t_threshold=4.0, permutations=199, seed=3)
    assert a.fwe_p == b.fwe_p
    assert np.array_equal(a.null_max, b.null_max)
    assert a.fwe_p[0] < 0.05
    assert a.significant(alpha=0.05) == [a.clusters[0]]
    assert a.fwe_p[0] >= 1.0 / 200.0  # add-one floor


def test_nbs_no_suprathreshold_edges():
    ga, gb = make_groups(5, subjects=5, seed=9)
    res = nbs(ga, gb, t_threshold=8.0, permutations=101, seed=0)
    assert res.clusters == [] and res.sizes == [] and res.fwe_p == []


def test_permutation_count_guards():
    ga, gb = make_groups(5, subjects=5, seed=10)
    with pytest.raises(ValueError, match="100 permutations"):
        nbs(ga, gb, t_threshold=3.0, permutations=50)
    with pytest.raises(ValueError, match="100 permutations"):
        spc(ga, gb, t_threshold=3.0, node_adjacency=np.zeros((5, 5), bool), permutations=50)


def test_spc_adjacency_shape_guard():
    ga, gb = make_groups(5, subjects=5, seed=11)
    with pytest.raises(ValueError, match="node adjacency"):
        spc(ga, gb, t_threshold=3.0, node_adjacency=np.zeros((4, 4), bool), permutations=101)
