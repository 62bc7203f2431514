"""Separate-optimization baselines for head-to-head comparison.

Each baseline consumes the same inputs as the joint algorithm but decides
partitioning and labeling independently: `mws_max` partitions without
semantic edges and labels clusters afterwards; `cc_semantic` and
`cc_affinity` are plain connected-component segmenters over the class
argmax and over thresholded affinities.
"""

from __future__ import annotations

import numpy as np

from .errors import BadThreshold, ShapeMismatch
from .graph import SEMANTIC_CODE, EdgeKind, ExtendedGraph
from .grid import OffsetPattern, offset_pairs
from .metrics import PanopticLabelMap
from .watershed import SegmentationResult, run_smw, strip_semantic

__all__ = ["mws_max", "cc_semantic", "cc_affinity"]


def mws_max(graph: ExtendedGraph) -> SegmentationResult:
    """Mutex watershed partition followed by per-cluster label argmax.

    The partition comes from the greedy run on the graph with all semantic
    edges stripped (the shared code path). Each cluster is then labeled by
    the strongest semantic edge incident to any of its nodes, ties broken
    toward the lowest label id; clusters without any semantic edge stay
    unlabeled. The returned activation flags cover the original edge ids:
    internal edges as decided by the stripped run, plus the one winning
    semantic edge per labeled cluster. The energy is the float sum of those
    active weights (this baseline has no exact-energy guarantee).
    """
    stripped, kept_ids = strip_semantic(graph)
    partition = run_smw(stripped)

    best: dict[int, tuple] = {}
    semantic_ids = np.nonzero(graph.kind == SEMANTIC_CODE)[0]
    node_cluster = partition.node_cluster
    for e in semantic_ids.tolist():
        cluster = int(node_cluster[graph.u[e]])
        candidate = (-float(graph.weight[e]), int(graph.v[e]), e)
        if cluster not in best or candidate < best[cluster]:
            best[cluster] = candidate

    labels = [
        best[c][1] if c in best else None for c in range(partition.num_clusters)
    ]
    active = np.zeros(graph.num_edges, dtype=bool)
    active[kept_ids[partition.active]] = True
    for _neg_w, _label, e in best.values():
        active[e] = True
    energy = float(graph.weight[active].sum()) if graph.num_edges else 0.0

    return SegmentationResult(
        node_cluster=node_cluster,
        cluster_labels=tuple(labels),
        active=active,
        energy=energy,
    )


class _Components:
    """Union-find over flat pixel indices with first-occurrence numbering."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union_pairs(self, src, dst):
        for i, j in zip(src.tolist(), dst.tolist()):
            ri, rj = self.find(i), self.find(j)
            if ri != rj:
                self.parent[rj] = ri

    def component_ids(self) -> np.ndarray:
        n = len(self.parent)
        out = np.empty(n, np.int64)
        seen: dict[int, int] = {}
        for i in range(n):
            r = self.find(i)
            c = seen.get(r)
            if c is None:
                c = len(seen)
                seen[r] = c
            out[i] = c
        return out


def _instances_per_class(components: np.ndarray, classes: np.ndarray) -> np.ndarray:
    """Instance ids starting at 1, contiguous within each class, numbered by
    first pixel occurrence."""
    instances = np.empty_like(components)
    next_id: dict[int, int] = {}
    assigned: dict[int, int] = {}
    for i, (comp, cls) in enumerate(zip(components.tolist(), classes.ravel().tolist())):
        inst = assigned.get(comp)
        if inst is None:
            inst = next_id.get(cls, 0) + 1
            next_id[cls] = inst
            assigned[comp] = inst
        instances[i] = inst
    return instances


def cc_semantic(semantic, connectivity: OffsetPattern) -> PanopticLabelMap:
    """Connected components of the per-pixel class argmax.

    Ties in the argmax go to the lowest class id. Two neighbors (under the
    pattern's offsets; polarities are ignored here) join a component iff
    they share the argmax class, so every class, stuff or thing alike, is
    split into one segment per component. Stuff merging is an evaluation
    concern, not a segmentation one.
    """
    semantic = np.asarray(semantic)
    if semantic.ndim != connectivity.ndim + 1:
        raise ShapeMismatch(
            f"semantic tensor of shape {semantic.shape} does not match "
            f"rank-{connectivity.ndim} connectivity offsets"
        )
    shape = semantic.shape[1:]
    classes = np.argmax(semantic, axis=0).astype(np.int64)
    flat = classes.ravel()

    comps = _Components(flat.shape[0])
    for offset in connectivity.offsets:
        src, dst = offset_pairs(shape, offset)
        same = flat[src] == flat[dst]
        comps.union_pairs(src[same], dst[same])
    components = comps.component_ids()
    instances = _instances_per_class(components, flat)
    return PanopticLabelMap(classes=classes, instances=instances.reshape(shape))


def cc_affinity(affinities, pattern: OffsetPattern, threshold, semantic) -> PanopticLabelMap:
    """Connected components of thresholded attractive affinities, labeled by
    the majority class argmax within each component.

    Only the pattern's attractive offsets bind pixels; a pair is connected
    iff its affinity is at least `threshold`. Majority ties go to the lowest
    class id.
    """
    if not 0.0 < threshold < 1.0:
        raise BadThreshold(f"threshold must lie in (0, 1), got {threshold}")
    affinities = np.asarray(affinities)
    semantic = np.asarray(semantic)
    if affinities.ndim != pattern.ndim + 1 or affinities.shape[0] != len(pattern):
        raise ShapeMismatch(
            f"affinities of shape {affinities.shape} do not match {len(pattern)} offsets"
        )
    shape = affinities.shape[1:]
    if semantic.ndim != len(shape) + 1 or semantic.shape[1:] != shape:
        raise ShapeMismatch(
            f"semantic tensor of shape {semantic.shape} does not cover grid {shape}"
        )

    comps = _Components(int(np.prod(shape)))
    for channel, (offset, polarity) in enumerate(zip(pattern.offsets, pattern.polarities)):
        if polarity is not EdgeKind.ATTRACTIVE:
            continue
        src, dst = offset_pairs(shape, offset)
        bound = np.asarray(affinities[channel], dtype=np.float64).ravel()[src] >= threshold
        comps.union_pairs(src[bound], dst[bound])
    components = comps.component_ids()

    argmax = np.argmax(semantic, axis=0).astype(np.int64).ravel()
    votes: dict[int, dict[int, int]] = {}
    for comp, cls in zip(components.tolist(), argmax.tolist()):
        tally = votes.setdefault(comp, {})
        tally[cls] = tally.get(cls, 0) + 1
    winner = {
        comp: min(tally.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        for comp, tally in votes.items()
    }
    classes = np.asarray([winner[c] for c in components.tolist()], np.int64)
    instances = _instances_per_class(components, classes)
    return PanopticLabelMap(
        classes=classes.reshape(shape), instances=instances.reshape(shape)
    )
