"""File formats: the SMWG graph text format, raw tensors, offset patterns,
class configurations and result files.

SMWG v1 grammar (ASCII, one record per line, `#` starts a comment):

    SMWG v1 <num_nodes> <num_labels>
    A <u> <v> <weight>      # attractive internal edge
    R <u> <v> <weight>      # repulsive internal edge
    S <u> <label> <weight>  # semantic edge

Weights are decimal floats written with `repr`, which round-trips every
float64 bit-exactly.

Tensors are stored as a `<base>.json` header (dtype "f32" or "i32", shape,
row-major order, little-endian) next to a `<base>.bin` raw payload.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import ParseError, ShapeMismatch
from .grid import OffsetPattern
from .graph import ExtendedGraph, build_graph
from .metrics import PanopticLabelMap

__all__ = [
    "read_graph",
    "write_graph",
    "load_tensor",
    "save_tensor",
    "load_offsets",
    "save_offsets",
    "load_class_config",
    "write_node_assignments",
    "write_label_map",
    "read_label_map",
]

_DTYPES = {"f32": np.dtype("<f4"), "i32": np.dtype("<i4")}
_KIND_LETTERS = {0: "A", 1: "R", 2: "S"}


def read_graph(path) -> ExtendedGraph:
    """Parse an SMWG v1 file; raises `ParseError` with the line number."""
    edges = []
    header = None
    with open(path, "r", encoding="ascii") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if header is None:
                if len(tokens) != 4 or tokens[0] != "SMWG" or tokens[1] != "v1":
                    raise ParseError(lineno, "expected header 'SMWG v1 <num_nodes> <num_labels>'")
                try:
                    header = (int(tokens[2]), int(tokens[3]))
                except ValueError:
                    raise ParseError(lineno, "node and label counts must be integers") from None
                continue
            if len(tokens) != 4 or tokens[0] not in ("A", "R", "S"):
                raise ParseError(lineno, f"expected 'A|R|S u v w', got {line!r}")
            try:
                u, v = int(tokens[1]), int(tokens[2])
                w = float(tokens[3])
            except ValueError:
                raise ParseError(lineno, f"malformed edge fields in {line!r}") from None
            edges.append((u, v, tokens[0], w))
    if header is None:
        raise ParseError(0, "empty file: missing SMWG v1 header")
    try:
        return build_graph(header[0], header[1], edges)
    except Exception as exc:
        raise ParseError(0, f"invalid graph: {exc}") from exc


def write_graph(path, graph: ExtendedGraph):
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"SMWG v1 {graph.num_nodes} {graph.num_labels}\n")
        kinds = graph.kind.tolist()
        us = graph.u.tolist()
        vs = graph.v.tolist()
        ws = graph.weight.tolist()
        for k, u, v, w in zip(kinds, us, vs, ws):
            handle.write(f"{_KIND_LETTERS[k]} {u} {v} {w!r}\n")


def _paths(base):
    base = str(base)
    if base.endswith(".json"):
        base = base[:-5]
    return base + ".json", base + ".bin"


def save_tensor(base, array):
    """Write `array` (float32 or int32) as header + raw payload."""
    array = np.ascontiguousarray(array)
    for name, dtype in _DTYPES.items():
        if array.dtype == dtype or array.dtype == dtype.newbyteorder(">"):
            code = name
            break
    else:
        raise ShapeMismatch(f"tensor format stores f32 or i32, got dtype {array.dtype}")
    header_path, payload_path = _paths(base)
    header = {
        "dtype": code,
        "shape": list(array.shape),
        "order": "C",
        "endian": "LE",
    }
    with open(header_path, "w", encoding="ascii") as handle:
        json.dump(header, handle, sort_keys=True)
        handle.write("\n")
    array.astype(_DTYPES[code], copy=False).tofile(payload_path)


def load_tensor(base) -> np.ndarray:
    header_path, payload_path = _paths(base)
    with open(header_path, "r", encoding="ascii") as handle:
        header = json.load(handle)
    if header.get("order") != "C" or header.get("endian") != "LE":
        raise ShapeMismatch(f"unsupported tensor layout in {header_path}")
    dtype = _DTYPES.get(header.get("dtype"))
    if dtype is None:
        raise ShapeMismatch(f"unsupported dtype {header.get('dtype')!r} in {header_path}")
    shape = tuple(int(s) for s in header["shape"])
    expected = int(np.prod(shape)) * dtype.itemsize
    actual = os.path.getsize(payload_path)
    if actual != expected:
        raise ShapeMismatch(
            f"{payload_path}: payload is {actual} bytes, header implies {expected}"
        )
    return np.fromfile(payload_path, dtype=dtype).reshape(shape)


def load_offsets(path) -> OffsetPattern:
    """Offset pattern from JSON: {"offsets": [[...], ...], "polarities": [...]}."""
    with open(path, "r", encoding="ascii") as handle:
        payload = json.load(handle)
    try:
        return OffsetPattern(
            offsets=tuple(tuple(o) for o in payload["offsets"]),
            polarities=tuple(payload["polarities"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"invalid offsets file {path}: {exc}") from exc


def save_offsets(path, pattern: OffsetPattern):
    payload = {
        "offsets": [list(o) for o in pattern.offsets],
        "polarities": [p.value for p in pattern.polarities],
    }
    with open(path, "w", encoding="ascii") as handle:
        json.dump(payload, handle, sort_keys=True)
        handle.write("\n")


def load_class_config(path):
    """Thing and stuff class id sets from JSON {"things": [...], "stuffs": [...]}."""
    with open(path, "r", encoding="ascii") as handle:
        payload = json.load(handle)
    return set(payload.get("things", [])), set(payload.get("stuffs", []))


def write_node_assignments(path, result):
    """One `node cluster label` line per node, -1 for unlabeled clusters."""
    labels = result.node_labels(unlabeled=-1).tolist()
    clusters = result.node_cluster.tolist()
    with open(path, "w", encoding="ascii") as handle:
        for node, (cluster, label) in enumerate(zip(clusters, labels)):
            handle.write(f"{node} {cluster} {label}\n")


def write_label_map(classes_base, instances_base, label_map: PanopticLabelMap):
    save_tensor(classes_base, np.asarray(label_map.classes, dtype=np.int32))
    save_tensor(instances_base, np.asarray(label_map.instances, dtype=np.int32))


def read_label_map(classes_base, instances_base) -> PanopticLabelMap:
    return PanopticLabelMap(
        classes=load_tensor(classes_base).astype(np.int64),
        instances=load_tensor(instances_base).astype(np.int64),
    )
