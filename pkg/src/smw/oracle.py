"""Exact verification machinery for greedy partition-and-label runs.

Everything here is deliberately independent of the greedy implementation:
the constraint checkers and the exhaustive maximizer use their own plain
union-find, so an agreement between the two sides is meaningful.

Weights enter only through their rank. Each edge gets the exact integer
weight 2^rank (rank 0 = weakest edge in processing order), which makes
every weight strictly larger than the sum of all smaller ones
(2^k > 2^k - 1). Under such weights the feasible subset with maximum total
weight is unique, because distinct subsets of distinct powers of two have
distinct sums.
"""

from __future__ import annotations

import numpy as np

from .errors import InconsistentTransform, TooLargeForOracle
from .graph import (
    ATTRACTIVE_CODE,
    REPULSIVE_CODE,
    SEMANTIC_CODE,
    ExtendedGraph,
    sort_edges,
)

__all__ = [
    "ORACLE_MAX_EDGES",
    "dominant_weights",
    "check_mutex_constraint",
    "check_label_constraint",
    "brute_force_optimum",
    "active_to_cut",
    "check_smwc_polytope",
    "polytope_inputs",
    "induced_segmentation",
    "energy_equivalence",
]

ORACLE_MAX_EDGES = 18


def dominant_weights(graph: ExtendedGraph) -> list[int]:
    """Per-edge exact weights 2^rank(e), rank counted from the weakest edge.

    Strict dominance holds by the geometric identity
    sum_{j<k} 2^j = 2^k - 1 < 2^k.
    """
    order = sort_edges(graph).permutation
    m = graph.num_edges
    weights = [0] * m
    for pos, edge_id in enumerate(order.tolist()):
        weights[edge_id] = 1 << (m - 1 - pos)
    return weights


class _UnionFind:
    """Minimal union-find for the checkers; separate from the greedy state."""

    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def _as_flags(active, num_edges) -> np.ndarray:
    flags = np.asarray(active, dtype=bool)
    if flags.shape != (num_edges,):
        raise ValueError(f"expected {num_edges} activation flags, got shape {flags.shape}")
    return flags


def check_mutex_constraint(graph: ExtendedGraph, active) -> bool:
    """No active repulsive edge may connect nodes that are joined by active
    attractive edges (equivalently: no active cycle with exactly one
    repulsive edge)."""
    flags = _as_flags(active, graph.num_edges)
    uf = _UnionFind(graph.num_nodes)
    kind, u, v = graph.kind, graph.u, graph.v
    for e in np.nonzero(flags & (kind == ATTRACTIVE_CODE))[0]:
        uf.union(int(u[e]), int(v[e]))
    for e in np.nonzero(flags & (kind == REPULSIVE_CODE))[0]:
        if uf.find(int(u[e])) == uf.find(int(v[e])):
            return False
    return True


def check_label_constraint(graph: ExtendedGraph, active) -> bool:
    """No two distinct terminals may be connected through active attractive
    and semantic edges: each component touches at most one terminal."""
    flags = _as_flags(active, graph.num_edges)
    n = graph.num_nodes
    uf = _UnionFind(n + graph.num_labels)
    kind, u, v = graph.kind, graph.u, graph.v
    for e in np.nonzero(flags)[0]:
        k = int(kind[e])
        if k == ATTRACTIVE_CODE:
            uf.union(int(u[e]), int(v[e]))
        elif k == SEMANTIC_CODE:
            uf.union(int(u[e]), n + int(v[e]))
    roots = [uf.find(n + t) for t in range(graph.num_labels)]
    return len(roots) == len(set(roots))


def brute_force_optimum(graph: ExtendedGraph) -> tuple[np.ndarray, int]:
    """Feasible active set with maximum exact energy, by subset enumeration.

    Subsets are indexed by bitmasks whose bit i stands for the edge of rank
    i, so the exact energy of a subset equals its mask value. Enumerating
    masks in descending order and returning the first feasible one therefore
    yields the unique maximizer without visiting the remaining subsets; the
    test suite cross-checks this against a literal full scan.

    Raises `TooLargeForOracle` beyond 18 edges.
    """
    m = graph.num_edges
    if m > ORACLE_MAX_EDGES:
        raise TooLargeForOracle(f"{m} edges exceed the {ORACLE_MAX_EDGES}-edge enumeration cap")
    order = sort_edges(graph).permutation.tolist()
    # edge id carrying bit/rank i (weakest first)
    by_bit = [order[m - 1 - i] for i in range(m)]
    attr = []
    rep = []
    sem = []
    kind, u_arr, v_arr = graph.kind, graph.u, graph.v
    for bit, e in enumerate(by_bit):
        k = int(kind[e])
        entry = (bit, int(u_arr[e]), int(v_arr[e]))
        if k == ATTRACTIVE_CODE:
            attr.append(entry)
        elif k == REPULSIVE_CODE:
            rep.append(entry)
        else:
            sem.append(entry)

    n = graph.num_nodes
    best = 0
    for mask in range((1 << m) - 1, -1, -1):
        if _feasible_mask(mask, n, attr, rep, sem):
            best = mask
            break

    active = np.zeros(m, dtype=bool)
    for bit in range(m):
        if mask >> bit & 1:
            active[by_bit[bit]] = True
    return active, best


def _feasible_mask(mask, num_nodes, attr, rep, sem) -> bool:
    """Both feasibility constraints for the subset encoded by `mask`."""
    parent = list(range(num_nodes))
    for bit, a, b in attr:
        if mask >> bit & 1:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                parent[b] = a
    for bit, a, b in rep:
        if mask >> bit & 1:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                return False
    comp_label = {}
    for bit, a, lab in sem:
        if mask >> bit & 1:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            cur = comp_label.get(a)
            if cur is None:
                comp_label[a] = lab
            elif cur != lab:
                return False
    return True


def active_to_cut(graph: ExtendedGraph, active) -> np.ndarray:
    """Cut indicators from activation flags: a repulsive edge is cut when
    active, any other edge is cut when inactive."""
    flags = _as_flags(active, graph.num_edges)
    repulsive = graph.kind == REPULSIVE_CODE
    return np.where(repulsive, flags, ~flags).astype(np.uint8)


def check_smwc_polytope(graph: ExtendedGraph, cuts, unassigned_ok=frozenset()) -> bool:
    """Consistency of cut indicators with the multiway-cut polytope.

    Checks, in this order:
      1. no dangling cuts: a cut internal edge must have its endpoints in
         different components of the uncut internal edges;
      2. unique terminal assignment: every internal node keeps exactly one
         semantic edge uncut, where (node, label) pairs missing from the
         sparse graph count as cut; nodes in `unassigned_ok` may instead
         keep none (sparse-input exemption for unlabeled clusters);
      3. terminal consistency: the endpoints of an uncut internal edge must
         keep exactly the same terminals.
    """
    y = np.asarray(cuts, dtype=np.uint8)
    if y.shape != (graph.num_edges,):
        raise ValueError(f"expected {graph.num_edges} cut flags, got shape {y.shape}")
    kind, u_arr, v_arr = graph.kind, graph.u, graph.v
    internal = kind != SEMANTIC_CODE

    uf = _UnionFind(graph.num_nodes)
    for e in np.nonzero(internal & (y == 0))[0]:
        uf.union(int(u_arr[e]), int(v_arr[e]))
    for e in np.nonzero(internal & (y == 1))[0]:
        if uf.find(int(u_arr[e])) == uf.find(int(v_arr[e])):
            return False

    kept: dict[int, set[int]] = {}
    for e in np.nonzero((~internal) & (y == 0))[0]:
        kept.setdefault(int(u_arr[e]), set()).add(int(v_arr[e]))
    for node in range(graph.num_nodes):
        terminals = kept.get(node, ())
        if len(terminals) == 0 and node in unassigned_ok:
            continue
        if len(terminals) != 1:
            return False

    empty: set[int] = set()
    for e in np.nonzero(internal & (y == 0))[0]:
        if kept.get(int(u_arr[e]), empty) != kept.get(int(v_arr[e]), empty):
            return False
    return True


def polytope_inputs(graph: ExtendedGraph, result) -> tuple[ExtendedGraph, np.ndarray, frozenset]:
    """Densified graph and cut indicators implied by a segmentation.

    Appends a weight-0 semantic edge for every (node, label) pair absent
    from the sparse graph; a semantic edge is cut unless its label equals
    the node's final cluster label, internal edges keep the flags from
    `active_to_cut`. Returns the extended graph, its cut indicators, and
    the nodes of unlabeled clusters (exempt from the unique-assignment
    check).
    """
    y = active_to_cut(graph, result.active)
    node_label = result.node_labels(unlabeled=-1)

    present = set(
        zip(
            graph.u[graph.kind == SEMANTIC_CODE].tolist(),
            graph.v[graph.kind == SEMANTIC_CODE].tolist(),
        )
    )
    add_u = []
    add_label = []
    add_cut = []
    for node in range(graph.num_nodes):
        for lab in range(graph.num_labels):
            if (node, lab) not in present:
                add_u.append(node)
                add_label.append(lab)
                add_cut.append(0 if node_label[node] == lab else 1)

    k = len(add_u)
    dense = ExtendedGraph(
        graph.num_nodes,
        graph.num_labels,
        np.concatenate([graph.kind, np.full(k, SEMANTIC_CODE, np.uint8)]),
        np.concatenate([graph.u, np.asarray(add_u, np.int64)]),
        np.concatenate([graph.v, np.asarray(add_label, np.int64)]),
        np.concatenate([graph.weight, np.zeros(k)]),
        validate=False,
    )
    y_dense = np.concatenate([y, np.asarray(add_cut, np.uint8)])
    exempt = frozenset(np.nonzero(node_label < 0)[0].tolist())
    return dense, y_dense, exempt


def induced_segmentation(graph: ExtendedGraph, active) -> tuple[np.ndarray, tuple]:
    """Canonical (partition, labeling) induced by a feasible active set.

    Clusters are the components of the active attractive edges, numbered by
    first node occurrence; each cluster's label comes from its active
    semantic edges (unique for feasible sets) or None.
    """
    flags = _as_flags(active, graph.num_edges)
    uf = _UnionFind(graph.num_nodes)
    kind, u_arr, v_arr = graph.kind, graph.u, graph.v
    for e in np.nonzero(flags & (kind == ATTRACTIVE_CODE))[0]:
        uf.union(int(u_arr[e]), int(v_arr[e]))
    root_label: dict[int, int] = {}
    for e in np.nonzero(flags & (kind == SEMANTIC_CODE))[0]:
        root_label[uf.find(int(u_arr[e]))] = int(v_arr[e])

    node_cluster = np.empty(graph.num_nodes, np.int64)
    cluster_of_root: dict[int, int] = {}
    labels: list = []
    for i in range(graph.num_nodes):
        r = uf.find(i)
        c = cluster_of_root.get(r)
        if c is None:
            c = len(labels)
            cluster_of_root[r] = c
            labels.append(root_label.get(r))
        node_cluster[i] = c
    return node_cluster, tuple(labels)


def energy_equivalence(graph: ExtendedGraph, active, mode="exact"):
    """Evaluate the objective on both sides of the cut transform.

    `activeside` prices the kept edges directly; `cutside` prices the cut
    indicators (cut attractive and semantic edges cost their weight, cut
    repulsive edges are rewarded). With the constant
    ``C = sum of attractive + semantic weights`` the two satisfy
    ``cutside = C - activeside``; the identity is asserted bit-exactly in
    exact mode and to 1e-9 relative in float mode, and a violation raises
    `InconsistentTransform`. Returns ``(activeside, cutside, C)``.
    """
    flags = _as_flags(active, graph.num_edges)
    y = active_to_cut(graph, flags)
    kind = graph.kind
    repulsive = kind == REPULSIVE_CODE

    if mode == "exact":
        weights = dominant_weights(graph)
        activeside = sum(w for w, a in zip(weights, flags.tolist()) if a)
        cutside = 0
        constant = 0
        for w, rep, cut in zip(weights, repulsive.tolist(), y.tolist()):
            if rep:
                cutside -= w * cut
            else:
                cutside += w * cut
                constant += w
        if cutside != constant - activeside:
            raise InconsistentTransform(
                f"cutside {cutside} != constant {constant} - activeside {activeside}"
            )
    elif mode == "float":
        w = graph.weight
        activeside = float(w[flags].sum())
        signed = np.where(repulsive, -w, w)
        cutside = float((signed * y).sum())
        constant = float(w[~repulsive].sum())
        scale = max(abs(cutside), abs(constant - activeside), 1.0)
        if abs(cutside - (constant - activeside)) > 1e-9 * scale:
            raise InconsistentTransform(
                f"cutside {cutside} != constant {constant} - activeside {activeside}"
            )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return activeside, cutside, constant
