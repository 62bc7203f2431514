"""Graph construction from dense image or volume tensors.

Pixels (voxels) become internal nodes, numbered by their row-major index.
A stencil of integer offsets turns an affinity tensor of shape
``(len(offsets), *spatial)`` into internal edges: an attractive offset uses
the affinity directly as weight, a repulsive offset uses 1 - affinity.
Offset pairs leaving the grid are skipped; nothing is padded, since padding
would fabricate affinities that were never predicted.

Per-class probability maps of shape ``(num_classes, *spatial)`` become
semantic edges, one per (pixel, class) with the probability as weight.
Exact zeros are dropped by default (they can never be processed before any
positive edge and a zero weight contributes nothing to the energy); the
cutoff is configurable for more aggressive pruning.

Edge ids are deterministic regardless of internal vectorization: internal
edges offset-major then pixel row-major, followed by semantic edges
class-major then pixel row-major.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadThreshold, BothMasksEmpty, ShapeMismatch
from .graph import (
    ATTRACTIVE_CODE,
    REPULSIVE_CODE,
    SEMANTIC_CODE,
    EdgeKind,
    ExtendedGraph,
)
from .prng import Xoshiro256StarStar

__all__ = [
    "OffsetPattern",
    "SoftMask",
    "offset_pairs",
    "build_grid_graph",
    "stuff_affinity",
    "mask_affinity",
    "soft_iou_repulsion",
    "masks_to_edges",
    "split_thresholded_affinities",
]


@dataclass(frozen=True)
class OffsetPattern:
    """Neighbor stencil: one integer offset vector per affinity channel,
    each tagged attractive or repulsive."""

    offsets: tuple
    polarities: tuple

    def __post_init__(self):
        offsets = tuple(tuple(int(c) for c in off) for off in self.offsets)
        polarities = tuple(
            p if isinstance(p, EdgeKind) else EdgeKind(p) for p in self.polarities
        )
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "polarities", polarities)
        if len(offsets) != len(polarities):
            raise ShapeMismatch("one polarity per offset required")
        dims = {len(off) for off in offsets}
        if len(dims) > 1:
            raise ShapeMismatch("offsets must share one dimensionality")
        for off in offsets:
            if not any(off):
                raise ShapeMismatch("zero offset not allowed")
        for p in polarities:
            if p is EdgeKind.SEMANTIC:
                raise ShapeMismatch("offset polarity must be attractive or repulsive")

    @property
    def ndim(self):
        return len(self.offsets[0]) if self.offsets else 0

    def __len__(self):
        return len(self.offsets)


@dataclass(frozen=True)
class SoftMask:
    """Foreground probability map of one detected instance, with its
    classification score and class id."""

    probabilities: np.ndarray
    score: float
    class_id: int

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64)
        object.__setattr__(self, "probabilities", probs)
        if probs.size and (probs.min() < 0 or probs.max() > 1):
            raise ShapeMismatch("mask probabilities must lie in [0, 1]")
        if not 0 <= self.score <= 1:
            raise ShapeMismatch("classification score must lie in [0, 1]")


def offset_pairs(shape, offset):
    """Flat (source, destination) index arrays for all in-bounds pixel pairs
    ``p -> p + offset``, in row-major source order."""
    if len(offset) != len(shape):
        raise ShapeMismatch(f"offset {offset} does not match grid rank {len(shape)}")
    src_slices = []
    dst_slices = []
    for extent, step in zip(shape, offset):
        lo, hi = max(0, -step), extent - max(0, step)
        if lo >= hi:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        src_slices.append(slice(lo, hi))
        dst_slices.append(slice(lo + step, hi + step))
    index = np.arange(int(np.prod(shape)), dtype=np.int64).reshape(shape)
    return index[tuple(src_slices)].ravel(), index[tuple(dst_slices)].ravel()


def build_grid_graph(affinities, pattern: OffsetPattern, semantic=None, semantic_cutoff=0.0):
    """Extended graph of a pixel grid.

    `affinities` has one channel per pattern offset, indexed at the source
    pixel of each pair. `semantic`, when given, has one channel per class;
    its entries become semantic edge weights, keeping only values strictly
    above `semantic_cutoff` (pruning positive values changes the energy and
    is off by default).
    """
    affinities = np.asarray(affinities)
    if affinities.ndim != pattern.ndim + 1 or affinities.shape[0] != len(pattern):
        raise ShapeMismatch(
            f"affinities of shape {affinities.shape} do not match "
            f"{len(pattern)} offsets over a rank-{pattern.ndim} grid"
        )
    shape = affinities.shape[1:]
    num_nodes = int(np.prod(shape))

    kinds = []
    us = []
    vs = []
    ws = []
    for channel, (offset, polarity) in enumerate(zip(pattern.offsets, pattern.polarities)):
        src, dst = offset_pairs(shape, offset)
        a = np.asarray(affinities[channel], dtype=np.float64).ravel()[src]
        if polarity is EdgeKind.ATTRACTIVE:
            code, w = ATTRACTIVE_CODE, a
        else:
            code, w = REPULSIVE_CODE, 1.0 - a
        kinds.append(np.full(src.shape[0], code, np.uint8))
        us.append(src)
        vs.append(dst)
        ws.append(w)

    num_labels = 0
    if semantic is not None:
        semantic = np.asarray(semantic)
        if semantic.ndim != len(shape) + 1 or semantic.shape[1:] != shape:
            raise ShapeMismatch(
                f"semantic tensor of shape {semantic.shape} does not cover grid {shape}"
            )
        num_labels = semantic.shape[0]
        for cls in range(num_labels):
            probs = np.asarray(semantic[cls], dtype=np.float64).ravel()
            keep = np.nonzero(probs > semantic_cutoff)[0]
            kinds.append(np.full(keep.shape[0], SEMANTIC_CODE, np.uint8))
            us.append(keep)
            vs.append(np.full(keep.shape[0], cls, np.int64))
            ws.append(probs[keep])

    if kinds:
        kind = np.concatenate(kinds)
        u = np.concatenate(us)
        v = np.concatenate(vs)
        w = np.concatenate(ws)
    else:
        kind = np.empty(0, np.uint8)
        u = v = np.empty(0, np.int64)
        w = np.empty(0, np.float64)
    return ExtendedGraph(num_nodes, num_labels, kind, u, v, w)


def stuff_affinity(stuff_probabilities, i, j) -> float:
    """Attractive affinity of two pixels for one stuff class: the joint
    probability p(i) * p(j)."""
    p = np.asarray(stuff_probabilities, dtype=np.float64).ravel()
    return float(p[i] * p[j])


def mask_affinity(mask: SoftMask, i, j) -> float:
    """Attractive affinity of two pixels under one soft mask: the joint
    foreground probability weighted by the classification score."""
    p = mask.probabilities.ravel()
    return float(mask.score * p[i] * p[j])


def soft_iou_repulsion(mask_a: SoftMask, mask_b: SoftMask) -> float:
    """Repulsion between two soft masks: one minus their soft IoU,
    ``1 - sum(p_a * p_b) / sum(max(p_a, p_b))``.

    0 for identical masks, 1 for disjoint ones. Two all-zero masks have an
    undefined ratio; that case warns (`BothMasksEmpty`) and returns 0, the
    identical-masks value.
    """
    pa = mask_a.probabilities.ravel()
    pb = mask_b.probabilities.ravel()
    if pa.shape != pb.shape:
        raise ShapeMismatch("masks must share one grid")
    denominator = float(np.maximum(pa, pb).sum())
    if denominator == 0.0:
        warnings.warn("soft IoU of two empty masks; repulsion set to 0", BothMasksEmpty)
        return 0.0
    return 1.0 - float((pa * pb).sum()) / denominator


def masks_to_edges(masks, samples_per_pair, seed, intra_pairs_per_mask=None, scale=1.0):
    """Sampled edges from a set of soft masks.

    Within each mask, `intra_pairs_per_mask` random pixel pairs (default:
    `samples_per_pair`) become attractive edges weighted by `mask_affinity`.
    Between every two distinct masks, `samples_per_pair` random pixel pairs
    become repulsive edges, all weighted by `scale` times the pair's soft
    IoU repulsion. Pixels are drawn uniformly from each mask's support
    (probability > 0). Fully deterministic given `seed`.

    Returns ``(u, v, kind, weight)`` tuples ready for `build_graph`.
    """
    if intra_pairs_per_mask is None:
        intra_pairs_per_mask = samples_per_pair
    rng = Xoshiro256StarStar(seed)
    supports = [np.flatnonzero(m.probabilities.ravel() > 0) for m in masks]
    edges = []

    for mask, support in zip(masks, supports):
        if support.size < 2:
            continue
        for _ in range(intra_pairs_per_mask):
            i = int(support[rng.below(support.size)])
            j = int(support[rng.below(support.size)])
            attempts = 0
            while j == i and attempts < 16:
                j = int(support[rng.below(support.size)])
                attempts += 1
            if j == i:
                continue
            edges.append((i, j, EdgeKind.ATTRACTIVE, mask_affinity(mask, i, j)))

    for a in range(len(masks)):
        for b in range(a + 1, len(masks)):
            if supports[a].size == 0 or supports[b].size == 0:
                continue
            weight = scale * soft_iou_repulsion(masks[a], masks[b])
            for _ in range(samples_per_pair):
                i = int(supports[a][rng.below(supports[a].size)])
                j = int(supports[b][rng.below(supports[b].size)])
                if i == j:
                    continue
                edges.append((i, j, EdgeKind.REPULSIVE, weight))
    return edges


def split_thresholded_affinities(affinities, threshold):
    """Split one affinity tensor at a threshold into attractive and
    repulsive weight tensors.

    Values at or above the threshold map to attractive weights
    ``(a - t) / (1 - t)``; values below map to repulsive weights
    ``(t - a) / t``. Each returned tensor is zero where the other side
    applies.
    """
    if not 0.0 < threshold < 1.0:
        raise BadThreshold(f"threshold must lie in (0, 1), got {threshold}")
    a = np.asarray(affinities, dtype=np.float64)
    attractive = np.where(a >= threshold, (a - threshold) / (1.0 - threshold), 0.0)
    repulsive = np.where(a < threshold, (threshold - a) / threshold, 0.0)
    return attractive, repulsive
