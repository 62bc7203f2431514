"""Semantic mutex watershed: joint partitioning and labeling of weighted
graphs by greedy edge processing, with an exhaustive optimality oracle,
grid graph construction, baselines and panoptic quality evaluation."""

from .baselines import cc_affinity, cc_semantic, mws_max
from .graph import Edge, EdgeKind, EdgeOrder, ExtendedGraph, build_graph, sort_edges
from .grid import (
    OffsetPattern,
    SoftMask,
    build_grid_graph,
    mask_affinity,
    masks_to_edges,
    soft_iou_repulsion,
    split_thresholded_affinities,
    stuff_affinity,
)
from .metrics import (
    PanopticLabelMap,
    PQReport,
    label_map_from_segmentation,
    panoptic_quality,
)
from .oracle import (
    ORACLE_MAX_EDGES,
    active_to_cut,
    brute_force_optimum,
    check_label_constraint,
    check_mutex_constraint,
    check_smwc_polytope,
    dominant_weights,
    energy_equivalence,
    induced_segmentation,
    polytope_inputs,
)
from .watershed import ClusterState, SegmentationResult, run_mws, run_smw

__version__ = "0.1.0"

__all__ = [
    "Edge",
    "EdgeKind",
    "EdgeOrder",
    "ExtendedGraph",
    "build_graph",
    "sort_edges",
    "ClusterState",
    "SegmentationResult",
    "run_smw",
    "run_mws",
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
    "OffsetPattern",
    "SoftMask",
    "build_grid_graph",
    "stuff_affinity",
    "mask_affinity",
    "soft_iou_repulsion",
    "masks_to_edges",
    "split_thresholded_affinities",
    "mws_max",
    "cc_semantic",
    "cc_affinity",
    "PanopticLabelMap",
    "PQReport",
    "panoptic_quality",
    "label_map_from_segmentation",
    "__version__",
]
