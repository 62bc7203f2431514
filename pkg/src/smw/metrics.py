"""Panoptic quality evaluation.

A prediction and a ground truth are compared segment-by-segment within each
class. Thing classes contribute one segment per (class, instance) pair;
stuff classes are merged into a single segment per class regardless of
instance ids. Class -1 marks void pixels; pixels whose class is in neither
set are treated as void as well.

Segments of the same class match iff their IoU exceeds 0.5, with prediction
pixels that fall on ground-truth void excluded from the union. The 0.5 rule
makes the matching a partial bijection, so no assignment procedure is
needed. Per class,

    PQ = sum of matched IoUs / (TP + FP/2 + FN/2)

and the aggregate PQ values are unweighted means over the classes present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import OverlappingClassSets, ShapeMismatch

__all__ = [
    "VOID",
    "PanopticLabelMap",
    "ClassStats",
    "PQReport",
    "panoptic_quality",
    "label_map_from_segmentation",
]

VOID = -1


@dataclass(frozen=True)
class PanopticLabelMap:
    """Per-pixel (class id, instance id) pair tensors of equal shape.

    Instance ids are meaningful within a class; id 0 is conventionally the
    single merged segment of a stuff class. Class -1 is void.
    """

    classes: np.ndarray
    instances: np.ndarray

    def __post_init__(self):
        classes = np.asarray(self.classes)
        instances = np.asarray(self.instances)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "instances", instances)
        if classes.shape != instances.shape:
            raise ShapeMismatch(
                f"class shape {classes.shape} != instance shape {instances.shape}"
            )

    @property
    def shape(self):
        return self.classes.shape


@dataclass
class ClassStats:
    iou_sum: float = 0.0
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def pq(self) -> float:
        denominator = self.tp + 0.5 * self.fp + 0.5 * self.fn
        return self.iou_sum / denominator if denominator > 0 else 0.0


@dataclass
class PQReport:
    """Per-class statistics plus the three aggregate means.

    Aggregates over empty class selections are NaN.
    """

    per_class: dict = field(default_factory=dict)
    pq: float = float("nan")
    pq_things: float = float("nan")
    pq_stuff: float = float("nan")

    def to_text(self) -> str:
        lines = []
        for cls in sorted(self.per_class):
            s = self.per_class[cls]
            lines.append(
                f"class.{cls}.iou_sum={s.iou_sum!r} class.{cls}.tp={s.tp} "
                f"class.{cls}.fp={s.fp} class.{cls}.fn={s.fn} class.{cls}.pq={s.pq!r}"
            )
        lines.append(f"pq={self.pq!r}")
        lines.append(f"pq_things={self.pq_things!r}")
        lines.append(f"pq_stuff={self.pq_stuff!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "per_class": {
                str(cls): {"iou_sum": s.iou_sum, "tp": s.tp, "fp": s.fp, "fn": s.fn, "pq": s.pq}
                for cls, s in sorted(self.per_class.items())
            },
            "pq": self.pq,
            "pq_things": self.pq_things,
            "pq_stuff": self.pq_stuff,
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _segment_ids(label_map: PanopticLabelMap, things, stuffs):
    """Encode each pixel's segment as an integer, -1 for void.

    Returns the encoding plus a table segment_code -> (class, instance).
    """
    classes = label_map.classes.ravel()
    instances = label_map.instances.ravel()
    keys = {}
    codes = np.full(classes.shape, -1, np.int64)
    thing_mask = np.isin(classes, list(things)) if things else np.zeros(classes.shape, bool)
    stuff_mask = np.isin(classes, list(stuffs)) if stuffs else np.zeros(classes.shape, bool)

    pair = np.stack([classes, np.where(stuff_mask, 0, instances)], axis=1)
    valid = thing_mask | stuff_mask
    uniq, inverse = np.unique(pair[valid], axis=0, return_inverse=True)
    codes[valid] = inverse
    for code, (cls, inst) in enumerate(uniq.tolist()):
        keys[code] = (int(cls), int(inst))
    return codes, keys


def panoptic_quality(
    pred: PanopticLabelMap,
    gt: PanopticLabelMap,
    thing_classes,
    stuff_classes,
    include_pred_only_classes=True,
) -> PQReport:
    """Panoptic quality of `pred` against `gt`.

    `thing_classes` and `stuff_classes` must be disjoint; together they
    define the evaluated classes. By default a class that appears only in
    the prediction still enters the report (and the means) through its
    false positives; pass ``include_pred_only_classes=False`` to restrict
    the means to classes present in the ground truth.
    """
    things = set(thing_classes)
    stuffs = set(stuff_classes)
    if things & stuffs:
        raise OverlappingClassSets(f"classes {sorted(things & stuffs)} are in both sets")
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"prediction shape {pred.shape} != ground truth shape {gt.shape}")

    pred_codes, pred_keys = _segment_ids(pred, things, stuffs)
    gt_codes, gt_keys = _segment_ids(gt, things, stuffs)

    pred_areas = dict(zip(*np.unique(pred_codes[pred_codes >= 0], return_counts=True)))
    gt_areas = dict(zip(*np.unique(gt_codes[gt_codes >= 0], return_counts=True)))

    # overlap counting over (pred segment, gt segment) pixel pairs;
    # gt void overlaps are tracked separately to exclude them from unions
    both = (pred_codes >= 0) & (gt_codes >= 0)
    num_gt_segments = len(gt_keys)
    pair_code = pred_codes[both] * num_gt_segments + gt_codes[both]
    pairs, counts = np.unique(pair_code, return_counts=True)
    overlaps = {
        (int(p // num_gt_segments), int(p % num_gt_segments)): int(c)
        for p, c in zip(pairs, counts)
    }
    on_void = (pred_codes >= 0) & (gt_codes < 0)
    void_codes, void_counts = np.unique(pred_codes[on_void], return_counts=True)
    pred_void_overlap = dict(zip(void_codes.tolist(), void_counts.tolist()))

    stats: dict[int, ClassStats] = {}
    matched_pred = set()
    matched_gt = set()
    for (p_code, g_code), inter in overlaps.items():
        if pred_keys[p_code][0] != gt_keys[g_code][0]:
            continue
        union = (
            int(pred_areas[p_code])
            + int(gt_areas[g_code])
            - inter
            - pred_void_overlap.get(p_code, 0)
        )
        iou = inter / union
        if iou > 0.5:
            cls = pred_keys[p_code][0]
            s = stats.setdefault(cls, ClassStats())
            s.tp += 1
            s.iou_sum += iou
            matched_pred.add(p_code)
            matched_gt.add(g_code)

    gt_classes_present = set()
    for g_code, (cls, _inst) in gt_keys.items():
        gt_classes_present.add(cls)
        if g_code not in matched_gt:
            stats.setdefault(cls, ClassStats()).fn += 1
    pred_classes_present = set()
    for p_code, (cls, _inst) in pred_keys.items():
        pred_classes_present.add(cls)
        if p_code not in matched_pred:
            stats.setdefault(cls, ClassStats()).fp += 1

    scored = set(gt_classes_present)
    if include_pred_only_classes:
        scored |= pred_classes_present

    def _mean(class_ids):
        values = [stats[c].pq for c in class_ids if c in stats]
        return float(np.mean(values)) if values else float("nan")

    report = PQReport(per_class={c: stats[c] for c in scored if c in stats})
    report.pq = _mean(scored)
    report.pq_things = _mean(scored & things)
    report.pq_stuff = _mean(scored & stuffs)
    return report


def label_map_from_segmentation(result, shape) -> PanopticLabelMap:
    """Panoptic label map of a segmentation over a pixel grid.

    Cluster labels become class ids (-1 for unlabeled clusters) and cluster
    ids, shifted by one to keep 0 free, become instance ids.
    """
    n = int(np.prod(shape))
    if result.node_cluster.shape[0] != n:
        raise ShapeMismatch(
            f"segmentation covers {result.node_cluster.shape[0]} nodes, grid has {n}"
        )
    classes = result.node_labels(unlabeled=VOID).reshape(shape)
    instances = (result.node_cluster + 1).reshape(shape)
    return PanopticLabelMap(classes=classes.astype(np.int64), instances=instances)
