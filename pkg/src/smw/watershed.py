"""Greedy joint partitioning and labeling of extended graphs.

Edges are visited once, strongest first. An attractive edge merges its two
clusters unless they are mutually exclusive or carry different labels; a
repulsive edge makes its two clusters mutually exclusive unless they are
already merged; a semantic edge labels its cluster unless the cluster
already carries a different label. Every edge whose rule fires is recorded
as active, including redundant ones (an attractive edge inside an existing
cluster, a repulsive edge between already-excluded clusters, a semantic
edge re-confirming a label): they contribute to the energy exactly like the
exhaustive maximizer counts them.

The run is strictly sequential; each decision depends on all earlier ones.
Independent runs on different graphs can proceed in parallel.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

import numpy as np

from .errors import AlreadyConnected, LabelConflict, MutexViolation, TooManyLabels
from .graph import SEMANTIC_CODE, ExtendedGraph, sort_edges

__all__ = ["ClusterState", "SegmentationResult", "run_smw", "run_mws"]

_CHUNK = 1 << 14


class ClusterState:
    """Union-find forest over internal nodes with cluster-pair mutex
    relations and at most one label per cluster.

    Uses union by size with path halving; mutex partner sets are kept per
    root in a hash table and re-keyed to the surviving root on merge, with
    the set union running smaller-into-larger.
    """

    __slots__ = ("parent", "size", "mutex_sets", "labels")

    def __init__(self, num_nodes):
        self.parent = list(range(num_nodes))
        self.size = [1] * num_nodes
        self.mutex_sets: dict[int, set[int]] = {}
        self.labels: dict[int, int] = {}

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def connected(self, i, j):
        """True iff i and j were merged (directly or transitively)."""
        return self.find(i) == self.find(j)

    def mutex(self, i, j):
        """True iff the clusters of i and j are mutually exclusive."""
        ri = self.find(i)
        partners = self.mutex_sets.get(ri)
        return partners is not None and self.find(j) in partners

    def class_of(self, i):
        """Label id of i's cluster, or None while unlabeled."""
        return self.labels.get(self.find(i))

    def merge(self, i, j):
        """Merge the clusters of i and j.

        No-op if already merged. Raises `MutexViolation` if the clusters
        exclude each other and `LabelConflict` if both carry different
        labels; the greedy driver checks both conditions before calling.
        """
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        mutex_sets = self.mutex_sets
        partners = mutex_sets.get(ri)
        if partners is not None and rj in partners:
            raise MutexViolation(f"clusters of {i} and {j} are mutually exclusive")
        li, lj = self.labels.get(ri), self.labels.get(rj)
        if li is not None and lj is not None and li != lj:
            raise LabelConflict(f"clusters of {i} and {j} carry labels {li} and {lj}")
        size = self.size
        if size[ri] < size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        size[ri] += size[rj]
        dying = mutex_sets.pop(rj, None)
        if dying is not None:
            for p in dying:
                ps = mutex_sets[p]
                ps.discard(rj)
                ps.add(ri)
            keep = mutex_sets.get(ri)
            if keep is None:
                mutex_sets[ri] = dying
            elif len(keep) >= len(dying):
                keep |= dying
            else:
                dying |= keep
                mutex_sets[ri] = dying
        lj = self.labels.pop(rj, None)
        if lj is not None and ri not in self.labels:
            self.labels[ri] = lj

    def add_mutex(self, i, j):
        """Mark the clusters of i and j as mutually exclusive (idempotent).

        Raises `AlreadyConnected` if they are in the same cluster.
        """
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            raise AlreadyConnected(f"{i} and {j} are in the same cluster")
        self.mutex_sets.setdefault(ri, set()).add(rj)
        self.mutex_sets.setdefault(rj, set()).add(ri)

    def assign_class(self, i, label):
        """Label i's cluster (idempotent for the same label).

        Raises `LabelConflict` if the cluster already carries another label.
        """
        ri = self.find(i)
        cur = self.labels.get(ri)
        if cur is None:
            self.labels[ri] = label
        elif cur != label:
            raise LabelConflict(f"cluster of {i} already labeled {cur}, got {label}")


@dataclass
class SegmentationResult:
    """Final partition, labeling and per-edge activation of one run.

    `node_cluster[i]` is the cluster id of node i; ids are assigned by first
    occurrence in node order, so they are contiguous and deterministic.
    `cluster_labels[c]` is the label id of cluster c or None if it never
    received a semantic edge. `active[e]` flags the edges whose rule fired.
    `energy` is the float sum of active weights; `exact_energy`, when
    requested, is the arbitrary-precision sum of 2^rank(e) over active edges
    with rank counted from the weakest edge in processing order.
    """

    node_cluster: np.ndarray
    cluster_labels: tuple
    active: np.ndarray
    energy: float
    exact_energy: int | None = None

    @property
    def num_clusters(self):
        return len(self.cluster_labels)

    def node_labels(self, unlabeled=-1) -> np.ndarray:
        """Per-node label ids with `unlabeled` substituted for None."""
        table = np.asarray(
            [unlabeled if lab is None else lab for lab in self.cluster_labels],
            dtype=np.int64,
        )
        if table.size == 0:
            return np.full(self.node_cluster.shape, unlabeled, dtype=np.int64)
        return table[self.node_cluster]


def run_smw(graph: ExtendedGraph, exact_energy=False) -> SegmentationResult:
    """Run the semantic mutex watershed on `graph`.

    Deterministic: the same graph (same edge ids and weights) yields a
    bit-identical result. Never fails on a validated graph.

    The hot loop below inlines the union-find and mutex bookkeeping of
    `ClusterState` instead of calling its methods; the test suite pins the
    two implementations against each other.
    """
    order = sort_edges(graph).permutation
    num_nodes = graph.num_nodes
    num_edges = graph.num_edges

    # The state is kept deliberately compact so that it stays cache-resident
    # even for multi-million-edge volumes: the union-find forest and the
    # root-to-mutex-set mapping live in typed arrays (4 bytes per node),
    # labels in one byte per node where the label count allows. Cluster
    # labels are stored shifted by +1 with 0 meaning unlabeled; mutex set
    # ids likewise, with 0 meaning unconstrained.
    #
    # Partner storage per mutex set id is two inline slots (first_partner /
    # second_partner, 0 = empty) with a rarely allocated spill set for the
    # third partner onward; most constrained clusters never spill, which
    # keeps the exclusion relation in flat arrays instead of a heap of tiny
    # hash sets. A merge enumerates the side with fewer recorded partners,
    # removes the dying id from each partner's storage and links the
    # survivor instead. Slots of dead roots and dead set ids go stale or are
    # cleared and are never read again.
    wide = num_nodes >= 2**31
    parent = array("q" if wide else "i", range(num_nodes))
    size = array("q", [1]) * num_nodes
    if graph.num_labels < 255:
        labels = bytearray(num_nodes)
    else:
        labels = [0] * num_nodes
    sid_type = "q" if num_edges >= 2**31 else "i"
    mutex_id = array(sid_type, bytes(0))
    mutex_id.frombytes(bytes(mutex_id.itemsize * num_nodes))
    first_partner = array(sid_type, [0])  # sid 0 is the "none" sentinel
    second_partner = array(sid_type, [0])
    spill: list = [None]
    active = bytearray(num_edges)

    kind_arr, u_arr, v_arr = graph.kind, graph.u, graph.v
    for lo in range(0, num_edges, _CHUNK):
        ids = order[lo : lo + _CHUNK]
        for e, k, i, j in zip(
            ids.tolist(), kind_arr[ids].tobytes(), u_arr[ids].tolist(), v_arr[ids].tolist()
        ):
            ri = i
            while parent[ri] != ri:
                parent[ri] = parent[parent[ri]]
                ri = parent[ri]
            if k == 2:  # semantic: j is the label id
                cur = labels[ri]
                if cur == 0:
                    labels[ri] = j + 1
                    active[e] = 1
                elif cur == j + 1:
                    active[e] = 1
                continue
            rj = j
            while parent[rj] != rj:
                parent[rj] = parent[parent[rj]]
                rj = parent[rj]
            if k == 0:  # attractive
                if ri == rj:
                    active[e] = 1
                    continue
                sa = mutex_id[ri]
                sb = mutex_id[rj]
                if sa and sb:
                    if first_partner[sa] == sb or second_partner[sa] == sb:
                        continue
                    overflow = spill[sa]
                    if overflow is not None and sb in overflow:
                        continue
                li = labels[ri]
                lj = labels[rj]
                if li and lj and li != lj:
                    continue
                if size[ri] < size[rj]:
                    ri, rj = rj, ri
                    sa, sb = sb, sa
                    li, lj = lj, li
                parent[rj] = ri
                size[ri] += size[rj]
                if sb:
                    if not sa:
                        mutex_id[ri] = sb
                    else:
                        # migrate the side with fewer recorded partners
                        spill_a = spill[sa]
                        spill_b = spill[sb]
                        count_a = (first_partner[sa] != 0) + (second_partner[sa] != 0) + (
                            len(spill_a) if spill_a is not None else 0
                        )
                        count_b = (first_partner[sb] != 0) + (second_partner[sb] != 0) + (
                            len(spill_b) if spill_b is not None else 0
                        )
                        if count_a < count_b:
                            sa, sb = sb, sa
                            spill_b = spill_a
                            mutex_id[ri] = sa
                        dying = [first_partner[sb], second_partner[sb]]
                        if spill_b is not None:
                            dying.extend(spill_b)
                        first_partner[sb] = 0
                        second_partner[sb] = 0
                        spill[sb] = None
                        for q in dying:
                            if q == 0:
                                continue
                            # unlink the dying id from q
                            if first_partner[q] == sb:
                                first_partner[q] = 0
                            elif second_partner[q] == sb:
                                second_partner[q] = 0
                            else:
                                spill[q].discard(sb)
                            # link survivor and q both ways, without duplicates
                            if first_partner[q] != sa and second_partner[q] != sa:
                                overflow = spill[q]
                                if overflow is None or sa not in overflow:
                                    if first_partner[q] == 0:
                                        first_partner[q] = sa
                                    elif second_partner[q] == 0:
                                        second_partner[q] = sa
                                    elif overflow is None:
                                        spill[q] = {sa}
                                    else:
                                        overflow.add(sa)
                            if first_partner[sa] != q and second_partner[sa] != q:
                                overflow = spill[sa]
                                if overflow is None or q not in overflow:
                                    if first_partner[sa] == 0:
                                        first_partner[sa] = q
                                    elif second_partner[sa] == 0:
                                        second_partner[sa] = q
                                    elif overflow is None:
                                        spill[sa] = {q}
                                    else:
                                        overflow.add(q)
                if lj and not li:
                    labels[ri] = lj
                active[e] = 1
            else:  # repulsive
                if ri == rj:
                    continue
                sa = mutex_id[ri]
                if not sa:
                    sa = len(first_partner)
                    mutex_id[ri] = sa
                    first_partner.append(0)
                    second_partner.append(0)
                    spill.append(None)
                sb = mutex_id[rj]
                if not sb:
                    sb = len(first_partner)
                    mutex_id[rj] = sb
                    first_partner.append(0)
                    second_partner.append(0)
                    spill.append(None)
                if first_partner[sa] != sb and second_partner[sa] != sb:
                    overflow = spill[sa]
                    if overflow is None or sb not in overflow:
                        if first_partner[sa] == 0:
                            first_partner[sa] = sb
                        elif second_partner[sa] == 0:
                            second_partner[sa] = sb
                        elif overflow is None:
                            spill[sa] = {sb}
                        else:
                            overflow.add(sb)
                        if first_partner[sb] == 0:
                            first_partner[sb] = sa
                        elif second_partner[sb] == 0:
                            second_partner[sb] = sa
                        elif spill[sb] is None:
                            spill[sb] = {sa}
                        else:
                            spill[sb].add(sa)
                active[e] = 1

    # resolve every node's root by repeated squaring, then number clusters
    # by first node occurrence
    parent_arr = np.asarray(parent, dtype=np.int64)
    roots = parent_arr
    while True:
        hop = parent_arr[roots]
        if np.array_equal(hop, roots):
            break
        roots = hop
    unique_roots, first_index, inverse = np.unique(roots, return_index=True, return_inverse=True)
    by_occurrence = np.argsort(first_index, kind="stable")
    remap = np.empty(unique_roots.shape[0], np.int64)
    remap[by_occurrence] = np.arange(unique_roots.shape[0])
    node_cluster = remap[inverse]
    cluster_labels = []
    for root in unique_roots[by_occurrence].tolist():
        lab = labels[root]
        cluster_labels.append(lab - 1 if lab else None)

    active_np = np.frombuffer(bytes(active), dtype=np.uint8).astype(bool)
    energy = float(graph.weight[active_np].sum()) if num_edges else 0.0

    exact = None
    if exact_energy:
        rank = np.empty(num_edges, np.int64)
        rank[order] = np.arange(num_edges - 1, -1, -1)
        bits = bytearray((num_edges + 7) // 8)
        for r in rank[active_np].tolist():
            bits[r >> 3] |= 1 << (r & 7)
        exact = int.from_bytes(bytes(bits), "little")

    return SegmentationResult(
        node_cluster=node_cluster,
        cluster_labels=tuple(cluster_labels),
        active=active_np,
        energy=energy,
        exact_energy=exact,
    )


def run_mws(graph: ExtendedGraph, exact_energy=False) -> SegmentationResult:
    """Plain mutex watershed: the zero-or-one-label special case.

    Raises `TooManyLabels` for graphs with more than one label; otherwise
    delegates to `run_smw`, whose label machinery is inert here.
    """
    if graph.num_labels > 1:
        raise TooManyLabels(f"mutex watershed accepts at most 1 label, got {graph.num_labels}")
    return run_smw(graph, exact_energy=exact_energy)


def strip_semantic(graph: ExtendedGraph) -> tuple[ExtendedGraph, np.ndarray]:
    """Graph with all semantic edges removed, plus the kept original ids."""
    keep = np.nonzero(graph.kind != SEMANTIC_CODE)[0]
    stripped = ExtendedGraph(
        graph.num_nodes,
        graph.num_labels,
        graph.kind[keep],
        graph.u[keep],
        graph.v[keep],
        graph.weight[keep],
        validate=False,
    )
    return stripped, keep
