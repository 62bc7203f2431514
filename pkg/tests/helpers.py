"""Independent reference implementations used as test oracles.

Nothing in here shares code with the hot paths it checks: the reference
driver goes through the public ClusterState methods one edge at a time, the
path enumerator walks simple paths explicitly, and the full brute force
scans every subset through the public constraint checkers.
"""

import itertools

import numpy as np

from smw import ClusterState, EdgeKind, dominant_weights, sort_edges
from smw import check_label_constraint, check_mutex_constraint


def reference_run(graph, state=None, active=None, start=0, stop=None):
    """Drive ClusterState through the edge rules, one edge at a time.

    Returns (state, active list). `start`/`stop` allow replaying a prefix
    and then resuming from the produced state.
    """
    order = sort_edges(graph).permutation.tolist()
    if state is None:
        state = ClusterState(graph.num_nodes)
    if active is None:
        active = [False] * graph.num_edges
    if stop is None:
        stop = len(order)
    for pos in range(start, stop):
        edge = graph.edge(order[pos])
        i = edge.u
        if edge.kind is EdgeKind.ATTRACTIVE:
            j = edge.v
            li, lj = state.class_of(i), state.class_of(j)
            labels_differ = li is not None and lj is not None and li != lj
            if not state.mutex(i, j) and not labels_differ:
                state.merge(i, j)
                active[edge.id] = True
        elif edge.kind is EdgeKind.REPULSIVE:
            j = edge.v
            if not state.connected(i, j):
                state.add_mutex(i, j)
                active[edge.id] = True
        else:
            label = edge.label
            if state.class_of(i) in (None, label):
                state.assign_class(i, label)
                active[edge.id] = True
    return state, active


def canonical_partition(state, num_nodes):
    """(node_cluster, cluster_labels) from a ClusterState, numbered by first
    node occurrence."""
    node_cluster = np.empty(num_nodes, np.int64)
    labels = []
    seen = {}
    for i in range(num_nodes):
        root = state.find(i)
        c = seen.get(root)
        if c is None:
            c = len(labels)
            seen[root] = c
            labels.append(state.labels.get(root))
        node_cluster[i] = c
    return node_cluster, tuple(labels)


def simple_paths(adjacency, start, goal):
    """All simple paths start -> goal as edge-index lists, by explicit DFS."""
    paths = []

    def walk(node, visited, used_edges):
        if node == goal:
            paths.append(list(used_edges))
            return
        for other, edge_index in adjacency.get(node, ()):
            if other in visited:
                continue
            visited.add(other)
            used_edges.append(edge_index)
            walk(other, visited, used_edges)
            used_edges.pop()
            visited.discard(other)

    walk(start, {start}, [])
    return paths


def path_with_one_repulsive_exists(active_edges, i, j):
    """Path-enumeration oracle for mutual exclusion: does a simple path from
    i to j over the active edges use exactly one repulsive edge?

    `active_edges` is a list of (u, v, kind) with kind 'A' or 'R'.
    """
    adjacency = {}
    for index, (u, v, _kind) in enumerate(active_edges):
        adjacency.setdefault(u, []).append((v, index))
        adjacency.setdefault(v, []).append((u, index))
    for path in simple_paths(adjacency, i, j):
        repulsive = sum(1 for index in path if active_edges[index][2] == "R")
        if repulsive == 1:
            return True
    return False


def terminal_path_exists(active_edges, node, terminal):
    """Path-enumeration oracle for labels: does a simple path connect `node`
    to `terminal` over active attractive and semantic edges?

    `active_edges` is a list of (u, v, kind) where semantic edges use the
    terminal as v; terminals must not collide with node ids.
    """
    adjacency = {}
    for index, (u, v, kind) in enumerate(active_edges):
        if kind == "R":
            continue
        adjacency.setdefault(u, []).append((v, index))
        adjacency.setdefault(v, []).append((u, index))
    return bool(simple_paths(adjacency, node, terminal))


def full_brute_force(graph):
    """Literal exhaustive maximizer: every subset, public checkers, running
    argmax under the dominant weights."""
    m = graph.num_edges
    weights = dominant_weights(graph)
    best_energy = -1
    best_active = None
    for included in itertools.product([False, True], repeat=m):
        active = np.asarray(included, bool)
        if not check_mutex_constraint(graph, active):
            continue
        if not check_label_constraint(graph, active):
            continue
        energy = sum(w for w, a in zip(weights, included) if a)
        if energy > best_energy:
            best_energy = energy
            best_active = active
    return best_active, best_energy


def random_feasible_active(graph, rng):
    """Random subset repaired to feasibility by dropping active edges;
    feasibility is downward closed, so the repair terminates."""
    m = graph.num_edges
    flags = np.asarray([rng.below(2) == 1 for _ in range(m)], bool)
    while not (check_mutex_constraint(graph, flags) and check_label_constraint(graph, flags)):
        on = np.nonzero(flags)[0]
        flags[on[rng.below(on.size)]] = False
    return flags
