import numpy as np
import pytest

from smw import ClusterState, build_graph, run_mws, run_smw
from smw.errors import AlreadyConnected, LabelConflict, MutexViolation, TooManyLabels
from smw.prng import Xoshiro256StarStar
from smw.synthetic import random_graph

from helpers import (
    canonical_partition,
    path_with_one_repulsive_exists,
    reference_run,
    terminal_path_exists,
)


# ---------------------------------------------------------------- ClusterState


def test_connected_fresh_and_after_merges():
    s = ClusterState(3)
    assert not s.connected(0, 1)
    s.merge(0, 1)
    assert s.connected(0, 1)
    s.merge(1, 2)
    assert s.connected(0, 2)


def test_mutex_fresh_and_direct():
    s = ClusterState(2)
    assert not s.mutex(0, 1)
    s.add_mutex(0, 1)
    assert s.mutex(0, 1)


def test_mutex_propagates_through_merge():
    s = ClusterState(3)
    s.add_mutex(0, 1)
    s.merge(1, 2)
    assert s.mutex(0, 2)
    # the path 0 -R- 1 -A- 2 has exactly one repulsive edge
    assert path_with_one_repulsive_exists([(0, 1, "R"), (1, 2, "A")], 0, 2)


def test_class_of_fresh_assign_and_merge():
    s = ClusterState(2)
    assert s.class_of(0) is None
    s.assign_class(0, 2)
    assert s.class_of(0) == 2
    s.merge(0, 1)
    assert s.class_of(1) == 2
    # label reaches node 1 through the path 1 -A- 0 -S- terminal(2)
    assert terminal_path_exists([(1, 0, "A"), (0, "t2", "S")], 1, "t2")


def test_merge_label_absorption():
    s = ClusterState(2)
    s.assign_class(0, 1)
    s.merge(0, 1)
    assert s.class_of(1) == 1


def test_merge_label_conflict_guard():
    s = ClusterState(2)
    s.assign_class(0, 0)
    s.assign_class(1, 1)
    with pytest.raises(LabelConflict):
        s.merge(0, 1)


def test_merge_mutex_guard():
    s = ClusterState(2)
    s.add_mutex(0, 1)
    with pytest.raises(MutexViolation):
        s.merge(0, 1)


def test_add_mutex_idempotent():
    s = ClusterState(2)
    s.add_mutex(0, 1)
    s.add_mutex(0, 1)
    assert s.mutex_sets[s.find(0)] == {s.find(1)}


def test_add_mutex_connected_guard():
    s = ClusterState(2)
    s.merge(0, 1)
    with pytest.raises(AlreadyConnected):
        s.add_mutex(0, 1)


def test_assign_class_repeat_and_conflict():
    s = ClusterState(1)
    s.assign_class(0, 1)
    s.assign_class(0, 1)
    assert s.class_of(0) == 1
    with pytest.raises(LabelConflict):
        s.assign_class(0, 2)


# -------------------------------------------------------------------- run_smw


def test_two_labels_keep_nodes_apart():
    g = build_graph(2, 2, [(0, 0, "S", 0.9), (1, 1, "S", 0.8), (0, 1, "A", 0.7)])
    r = run_smw(g)
    assert r.node_cluster.tolist() == [0, 1]
    assert r.cluster_labels == (0, 1)
    assert r.active.tolist() == [True, True, False]
    assert r.energy == pytest.approx(1.7)


def test_repulsive_after_merge_is_rejected():
    g = build_graph(2, 1, [(0, 1, "A", 0.9), (0, 1, "R", 0.5)])
    r = run_smw(g)
    assert r.node_cluster.tolist() == [0, 0]
    assert r.active.tolist() == [True, False]


def test_empty_graph_gives_singletons():
    g = build_graph(4, 2, [])
    r = run_smw(g, exact_energy=True)
    assert r.node_cluster.tolist() == [0, 1, 2, 3]
    assert r.cluster_labels == (None, None, None, None)
    assert r.energy == 0.0
    assert r.exact_energy == 0


def test_redundant_activations_count():
    # triangle: third attractive edge is inside the cluster, still active;
    # duplicate semantic edge re-confirms the label, still active
    g = build_graph(
        3,
        1,
        [
            (0, 1, "A", 0.9),
            (1, 2, "A", 0.8),
            (0, 2, "A", 0.7),
            (0, 0, "S", 0.6),
            (1, 0, "S", 0.5),
        ],
    )
    r = run_smw(g)
    assert r.active.tolist() == [True] * 5
    assert r.energy == pytest.approx(0.9 + 0.8 + 0.7 + 0.6 + 0.5)


def test_redundant_repulsive_between_mutexed_clusters():
    g = build_graph(2, 0, [(0, 1, "R", 0.9), (0, 1, "R", 0.8)])
    r = run_smw(g)
    assert r.active.tolist() == [True, True]


def test_unlabeled_then_labeled_merge_allowed():
    # attractive edge merges a labeled with an unlabeled cluster
    g = build_graph(2, 1, [(0, 0, "S", 0.9), (0, 1, "A", 0.5)])
    r = run_smw(g)
    assert r.node_cluster.tolist() == [0, 0]
    assert r.cluster_labels == (0,)


def test_determinism_bit_identical():
    rng = Xoshiro256StarStar(5)
    for _ in range(20):
        g = random_graph(rng)
        r1 = run_smw(g, exact_energy=True)
        r2 = run_smw(g, exact_energy=True)
        assert np.array_equal(r1.node_cluster, r2.node_cluster)
        assert r1.cluster_labels == r2.cluster_labels
        assert np.array_equal(r1.active, r2.active)
        assert r1.energy == r2.energy
        assert r1.exact_energy == r2.exact_energy


def test_matches_reference_driver():
    rng = Xoshiro256StarStar(17)
    for _ in range(150):
        g = random_graph(rng)
        fast = run_smw(g)
        state, active = reference_run(g)
        node_cluster, labels = canonical_partition(state, g.num_nodes)
        assert np.array_equal(fast.node_cluster, node_cluster)
        assert fast.cluster_labels == labels
        assert fast.active.tolist() == active


def test_no_cluster_is_connected_and_mutexed():
    rng = Xoshiro256StarStar(23)
    for _ in range(50):
        g = random_graph(rng)
        state, _ = reference_run(g)
        for i in range(g.num_nodes):
            for j in range(i + 1, g.num_nodes):
                assert not (state.connected(i, j) and state.mutex(i, j))


def test_cluster_members_share_class():
    rng = Xoshiro256StarStar(29)
    for _ in range(50):
        g = random_graph(rng)
        state, _ = reference_run(g)
        r = run_smw(g)
        for i in range(g.num_nodes):
            expected = r.cluster_labels[r.node_cluster[i]]
            assert state.class_of(i) == expected


def test_prefix_replay_reproduces_full_run():
    # greedy is history independent: replaying the first k decisions and
    # resuming gives the same result as one uninterrupted pass
    rng = Xoshiro256StarStar(31)
    for _ in range(30):
        g = random_graph(rng)
        if g.num_edges == 0:
            continue
        k = rng.below(g.num_edges + 1)
        state, active = reference_run(g, stop=k)
        state, active = reference_run(g, state=state, active=active, start=k)
        full_state, full_active = reference_run(g)
        assert active == full_active
        clusters, labels = canonical_partition(state, g.num_nodes)
        full_clusters, full_labels = canonical_partition(full_state, g.num_nodes)
        assert np.array_equal(clusters, full_clusters)
        assert labels == full_labels


# -------------------------------------------------------------------- run_mws


def test_mws_delegates_for_label_free_graphs():
    g = build_graph(3, 0, [(0, 1, "A", 0.9), (1, 2, "A", 0.8), (0, 2, "R", 0.85)])
    r = run_mws(g)
    s = run_smw(g)
    assert np.array_equal(r.node_cluster, s.node_cluster)
    # 0.9 merges {0,1}, 0.85 adds the mutex, 0.8 is rejected
    assert r.node_cluster.tolist() == [0, 0, 1]
    assert r.active.tolist() == [True, False, True]


def test_mws_rejects_multilabel_graphs():
    g = build_graph(2, 2, [(0, 0, "S", 0.5)])
    with pytest.raises(TooManyLabels):
        run_mws(g)


def test_mws_allows_single_label():
    g = build_graph(2, 1, [(0, 0, "S", 0.5)])
    r = run_mws(g)
    assert r.cluster_labels == (0, None)


def test_many_labels_fallback_storage():
    # label ids beyond the one-byte store exercise the list-backed path
    g = build_graph(
        3, 400,
        [(0, 399, "S", 0.9), (1, 0, "S", 0.8), (0, 1, "A", 0.7), (1, 2, "A", 0.6)],
    )
    r = run_smw(g)
    assert r.cluster_labels == (399, 0)
    assert r.node_cluster.tolist() == [0, 1, 1]
