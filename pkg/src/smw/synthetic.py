"""Deterministic synthetic inputs: random extended graphs for verification,
random affinity volumes for benchmarking, and constructed two-instance
scenes where joint and separate optimization measurably differ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import EdgeKind, ExtendedGraph, build_graph
from .grid import OffsetPattern, build_grid_graph
from .metrics import PanopticLabelMap
from .prng import Xoshiro256StarStar, float_array

__all__ = [
    "random_graph",
    "bench_pattern",
    "bench_volume_graph",
    "TouchingScene",
    "touching_instances_scene",
]


def random_graph(rng: Xoshiro256StarStar, max_nodes=8, max_labels=3, max_edges=18) -> ExtendedGraph:
    """Random extended graph: 1..max_nodes nodes, 0..max_labels labels,
    0..max_edges edges of mixed kinds.

    Weights are uniform in [0, 1); roughly a third are quantized to one
    decimal to exercise tie-breaking, and occasional exact zeros exercise
    the zero-weight path. Parallel edges are allowed.
    """
    n = 1 + rng.below(max_nodes)
    k = rng.below(max_labels + 1)
    target = rng.below(max_edges + 1)

    kinds = []
    if n >= 2:
        kinds += [EdgeKind.ATTRACTIVE, EdgeKind.REPULSIVE]
    if k >= 1:
        kinds.append(EdgeKind.SEMANTIC)

    edges = []
    if kinds:
        for _ in range(target):
            kind = kinds[rng.below(len(kinds))]
            w = rng.random()
            r = rng.below(20)
            if r == 0:
                w = 0.0
            elif r < 7:
                w = int(w * 10) / 10.0
            if kind is EdgeKind.SEMANTIC:
                edges.append((rng.below(n), rng.below(k), kind, w))
            else:
                u = rng.below(n)
                v = rng.below(n)
                while v == u:
                    v = rng.below(n)
                edges.append((u, v, kind, w))
    return build_graph(n, k, edges)


def bench_pattern() -> OffsetPattern:
    """Default 3D stencil for benchmark volumes: direct attractive
    neighbors plus one long-range repulsive channel."""
    return OffsetPattern(
        offsets=((1, 0, 0), (0, 1, 0), (0, 0, 1), (3, 3, 3)),
        polarities=("A", "A", "A", "R"),
    )


def bench_volume_graph(side, seed, num_labels=2) -> ExtendedGraph:
    """Random affinity volume of `side`^3 voxels turned into a graph.

    Affinity and semantic tensors are drawn from disjoint ranges of one
    splitmix64 counter stream, so the graph is a pure function of
    (side, seed, num_labels).
    """
    pattern = bench_pattern()
    shape = (side, side, side)
    voxels = side**3
    aff_count = len(pattern) * voxels
    affinities = (
        float_array(seed, aff_count).astype(np.float32).reshape((len(pattern),) + shape)
    )
    semantic = None
    if num_labels > 0:
        semantic = (
            float_array(seed, num_labels * voxels, start=aff_count)
            .astype(np.float32)
            .reshape((num_labels,) + shape)
        )
    return build_grid_graph(affinities, pattern, semantic)


@dataclass(frozen=True)
class TouchingScene:
    """Two touching instances of different classes with strong semantics."""

    graph: ExtendedGraph
    ground_truth: PanopticLabelMap
    shape: tuple
    with_repulsion: bool


def touching_instances_scene(rng: Xoshiro256StarStar, with_repulsion=False) -> TouchingScene:
    """One randomized variant of the two-instance scene.

    A grid is split by a wiggly vertical boundary into a left instance of
    class 0 and a right instance of class 1. Attractive affinities are
    strong inside each instance (0.75..0.95) and weaker but tempting across
    the boundary (0.45..0.70); semantic probabilities are strong and correct
    (0.80..0.98 for the true class, the complement for the other). Every
    semantic edge therefore outranks every cross-boundary pull, while the
    cross pulls would happily merge the instances on their own. Variants
    with `with_repulsion` additionally sample strong repulsive edges
    (0.75..0.95) across the boundary, which lets even the label-blind
    partitioner keep the instances apart.
    """
    h = 6 + rng.below(5)
    w = 6 + rng.below(7)
    base = w // 2 + rng.below(3) - 1
    boundary = np.empty(h, np.int64)
    for row in range(h):
        boundary[row] = min(max(base + rng.below(3) - 1, 2), w - 2)

    cols = np.arange(w)
    instance_of = (cols[None, :] >= boundary[:, None]).astype(np.int64)  # 0 left, 1 right

    def flat(r, c):
        return r * w + c

    edges = []
    for r in range(h):
        for c in range(w):
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 >= h or c2 >= w:
                    continue
                if instance_of[r, c] == instance_of[r2, c2]:
                    a = rng.uniform(0.75, 0.95)
                else:
                    a = rng.uniform(0.45, 0.70)
                edges.append((flat(r, c), flat(r2, c2), EdgeKind.ATTRACTIVE, a))
    for r in range(h):
        for c in range(w):
            true_class = int(instance_of[r, c])
            p = rng.uniform(0.80, 0.98)
            edges.append((flat(r, c), true_class, EdgeKind.SEMANTIC, p))
            edges.append((flat(r, c), 1 - true_class, EdgeKind.SEMANTIC, 1.0 - p))
    if with_repulsion:
        left = np.argwhere(instance_of == 0)
        right = np.argwhere(instance_of == 1)
        for _ in range(3 * h):
            lr, lc = left[rng.below(left.shape[0])]
            rr, rc = right[rng.below(right.shape[0])]
            edges.append(
                (flat(int(lr), int(lc)), flat(int(rr), int(rc)), EdgeKind.REPULSIVE,
                 rng.uniform(0.75, 0.95))
            )

    graph = build_graph(h * w, 2, edges)
    ground_truth = PanopticLabelMap(
        classes=instance_of.copy(),
        instances=np.ones((h, w), np.int64),
    )
    return TouchingScene(
        graph=graph, ground_truth=ground_truth, shape=(h, w), with_repulsion=with_repulsion
    )
