"""Extended weighted graphs: internal nodes plus one terminal per label.

Attractive and repulsive edges connect pairs of internal nodes and carry
evidence for merging or separating them. A semantic edge ties an internal
node to the terminal of one label and carries evidence for that label. All
weights are finite, non-negative floats; larger means stronger evidence.

Semantic edges are stored sparsely: only the (node, label) pairs that were
actually provided exist. A missing semantic edge behaves like a weight-0
edge that is never processed, so clusters that never receive one stay
unlabeled.

Graphs are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import LabelOutOfRange, NegativeOrNonFiniteWeight, OutOfRangeEndpoint

__all__ = [
    "EdgeKind",
    "Edge",
    "ExtendedGraph",
    "EdgeOrder",
    "build_graph",
    "sort_edges",
]

# integer codes used in the columnar edge arrays and in hot loops
ATTRACTIVE_CODE = 0
REPULSIVE_CODE = 1
SEMANTIC_CODE = 2


class EdgeKind(Enum):
    ATTRACTIVE = "A"
    REPULSIVE = "R"
    SEMANTIC = "S"

    @property
    def code(self):
        return _KIND_TO_CODE[self]


_KIND_TO_CODE = {
    EdgeKind.ATTRACTIVE: ATTRACTIVE_CODE,
    EdgeKind.REPULSIVE: REPULSIVE_CODE,
    EdgeKind.SEMANTIC: SEMANTIC_CODE,
}
_CODE_TO_KIND = {code: kind for kind, code in _KIND_TO_CODE.items()}
_NAME_TO_KIND = {kind.value: kind for kind in EdgeKind}


@dataclass(frozen=True)
class Edge:
    """One edge of an extended graph.

    For attractive and repulsive edges, `u` and `v` are the two internal
    endpoints. For semantic edges, `u` is the internal endpoint and `v`
    holds the label id of the terminal (exposed as `label`).
    """

    id: int
    u: int
    v: int
    kind: EdgeKind
    weight: float

    @property
    def label(self):
        if self.kind is not EdgeKind.SEMANTIC:
            raise ValueError("only semantic edges carry a label")
        return self.v


class ExtendedGraph:
    """Immutable edge list over `num_nodes` internal nodes and
    `num_labels` terminals, stored columnar for bulk processing.

    Edge ids are 0..num_edges-1 in construction order. Parallel edges
    between the same pair are allowed; each keeps its own id and its own
    activation flag in results.
    """

    __slots__ = ("num_nodes", "num_labels", "kind", "u", "v", "weight")

    def __init__(self, num_nodes, num_labels, kind, u, v, weight, validate=True):
        self.num_nodes = int(num_nodes)
        self.num_labels = int(num_labels)
        self.kind = np.ascontiguousarray(kind, dtype=np.uint8)
        self.u = np.ascontiguousarray(u, dtype=np.int64)
        self.v = np.ascontiguousarray(v, dtype=np.int64)
        self.weight = np.ascontiguousarray(weight, dtype=np.float64)
        if validate:
            self._validate()
        for arr in (self.kind, self.u, self.v, self.weight):
            arr.setflags(write=False)

    def _validate(self):
        if self.num_nodes < 0 or self.num_labels < 0:
            raise OutOfRangeEndpoint("node and label counts must be >= 0")
        m = self.kind.shape[0]
        if not (self.u.shape[0] == self.v.shape[0] == self.weight.shape[0] == m):
            raise OutOfRangeEndpoint("edge columns have inconsistent lengths")
        if m == 0:
            return
        if not np.all(np.isfinite(self.weight)) or np.any(self.weight < 0):
            raise NegativeOrNonFiniteWeight("edge weights must be finite and >= 0")
        internal = self.kind != SEMANTIC_CODE
        semantic = ~internal
        if np.any(self.kind > SEMANTIC_CODE):
            raise OutOfRangeEndpoint("unknown edge kind code")
        u, v = self.u, self.v
        bad_u = (u < 0) | (u >= self.num_nodes)
        if np.any(bad_u):
            raise OutOfRangeEndpoint(f"edge endpoint out of range (first at id {int(np.argmax(bad_u))})")
        bad_v = internal & ((v < 0) | (v >= self.num_nodes))
        if np.any(bad_v):
            raise OutOfRangeEndpoint(f"edge endpoint out of range (first at id {int(np.argmax(bad_v))})")
        loops = internal & (u == v)
        if np.any(loops):
            raise OutOfRangeEndpoint(f"self-loop not allowed (first at id {int(np.argmax(loops))})")
        bad_label = semantic & ((v < 0) | (v >= self.num_labels))
        if np.any(bad_label):
            raise LabelOutOfRange(f"semantic label out of range (first at id {int(np.argmax(bad_label))})")

    @property
    def num_edges(self):
        return self.kind.shape[0]

    def edge(self, edge_id) -> Edge:
        return Edge(
            id=int(edge_id),
            u=int(self.u[edge_id]),
            v=int(self.v[edge_id]),
            kind=_CODE_TO_KIND[int(self.kind[edge_id])],
            weight=float(self.weight[edge_id]),
        )

    def __iter__(self):
        return (self.edge(i) for i in range(self.num_edges))

    def __eq__(self, other):
        if not isinstance(other, ExtendedGraph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.num_labels == other.num_labels
            and np.array_equal(self.kind, other.kind)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.weight, other.weight)
        )

    def __repr__(self):
        return (
            f"ExtendedGraph(num_nodes={self.num_nodes}, num_labels={self.num_labels}, "
            f"num_edges={self.num_edges})"
        )


def _coerce_kind(kind) -> EdgeKind:
    if isinstance(kind, EdgeKind):
        return kind
    try:
        return _NAME_TO_KIND[kind]
    except (KeyError, TypeError):
        raise OutOfRangeEndpoint(f"unknown edge kind {kind!r}") from None


def build_graph(num_nodes, num_labels, edges) -> ExtendedGraph:
    """Build a validated graph from ``(u, v_or_label, kind, weight)`` tuples.

    `kind` may be an `EdgeKind` or one of the letters "A", "R", "S". For
    semantic edges the second element is the label id. Edge ids are assigned
    in input order.
    """
    rows = list(edges)
    m = len(rows)
    kind = np.empty(m, np.uint8)
    u = np.empty(m, np.int64)
    v = np.empty(m, np.int64)
    weight = np.empty(m, np.float64)
    for i, (a, b, k, w) in enumerate(rows):
        kind[i] = _coerce_kind(k).code
        u[i] = a
        v[i] = b
        try:
            weight[i] = float(w)
        except (TypeError, ValueError):
            raise NegativeOrNonFiniteWeight(f"edge {i}: weight {w!r} is not a number") from None
    return ExtendedGraph(num_nodes, num_labels, kind, u, v, weight)


@dataclass(frozen=True)
class EdgeOrder:
    """Processing order: edge ids by weight descending, ties by ascending id."""

    permutation: np.ndarray


def sort_edges(graph: ExtendedGraph) -> EdgeOrder:
    """Deterministic processing order for the greedy pass.

    A stable sort on the negated weights yields strictly descending weights
    with ties broken by ascending edge id; any fixed tie order corresponds to
    an infinitesimal perturbation that restores unique weights.
    """
    perm = np.argsort(-graph.weight, kind="stable")
    return EdgeOrder(permutation=perm)
