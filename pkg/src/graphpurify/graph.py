"""Immutable undirected graph in CSR form plus the classic algorithms the
purification pipeline relies on (connected components, Prim's MST).

Edges have a single identity throughout the package: the canonical edge
list, i.e. all pairs (u, v) with u < v sorted lexicographically.  Scores,
deletions and MST results are always expressed against that ordering.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import (
    DisconnectedError,
    IndexOutOfRangeError,
    MissingEdgeError,
    SelfLoopError,
)


def _as_edge_array(edges) -> np.ndarray:
    """Coerce any iterable of index pairs into an (m, 2) int64 array."""
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edge list must have shape (m, 2), got {arr.shape}")
    return arr


def canonicalize_edges(edges) -> np.ndarray:
    """Return edges as unique (u, v) pairs with u < v, sorted lexicographically."""
    arr = _as_edge_array(edges)
    if arr.shape[0] == 0:
        return arr
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted graph stored as a symmetric CSR structure.

    Each undirected edge appears twice in ``col_indices`` (once per
    endpoint); neighbor lists are sorted ascending, contain no self-loops
    and no duplicates.  Instances are immutable: every mutation in this
    module returns a new graph.
    """

    num_nodes: int
    row_offsets: np.ndarray
    col_indices: np.ndarray

    @property
    def num_edges(self) -> int:
        """Undirected edge count K (CSR stores 2K entries)."""
        return int(self.row_offsets[-1]) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def neighbors(self, u: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[u] : self.row_offsets[u + 1]]

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Canonical edge list: (K, 2) pairs with u < v, lex-sorted."""
        rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees)
        mask = rows < self.col_indices
        return np.stack([rows[mask], self.col_indices[mask]], axis=1)

    @cached_property
    def _edge_keys(self) -> np.ndarray:
        e = self.edge_array
        return e[:, 0] * self.num_nodes + e[:, 1]

    def edge_indices(self, edges) -> np.ndarray:
        """Canonical edge indices for a set of (u, v) pairs.

        Input pairs are deduplicated and canonicalized first, so the result
        is sorted ascending.  Raises MissingEdgeError if any pair is absent.
        """
        arr = canonicalize_edges(edges)
        if arr.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if len(self._edge_keys) == 0:
            u, v = arr[0]
            raise MissingEdgeError(f"edge ({u}, {v}) is not in the graph")
        keys = arr[:, 0] * self.num_nodes + arr[:, 1]
        pos = np.searchsorted(self._edge_keys, keys)
        pos_clipped = np.minimum(pos, len(self._edge_keys) - 1)
        bad = np.flatnonzero(self._edge_keys[pos_clipped] != keys)
        if len(bad):
            u, v = arr[bad[0]]
            raise MissingEdgeError(f"edge ({u}, {v}) is not in the graph")
        return pos

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v

    def adjacency(self) -> sp.csr_matrix:
        """Scipy CSR view of the symmetric 0/1 adjacency matrix."""
        data = np.ones(len(self.col_indices), dtype=np.float64)
        return sp.csr_matrix(
            (data, self.col_indices.copy(), self.row_offsets.copy()),
            shape=(self.num_nodes, self.num_nodes),
        )


@dataclass(frozen=True)
class WeightedGraph:
    """A graph plus real weights aligned to its canonical edge list."""

    graph: Graph
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.graph.num_edges,):
            raise ValueError(
                f"need one weight per canonical edge: {w.shape} vs {self.graph.num_edges}"
            )
        if w.size and not np.all(np.isfinite(w)):
            raise ValueError("edge weights must be finite")
        object.__setattr__(self, "weights", w)


def _from_canonical(num_nodes: int, canon: np.ndarray) -> Graph:
    """Build the CSR structure from an already canonical edge array."""
    sym = np.concatenate([canon, canon[:, ::-1]], axis=0)
    order = np.lexsort((sym[:, 1], sym[:, 0]))
    sym = sym[order]
    counts = np.bincount(sym[:, 0], minlength=num_nodes)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return Graph(num_nodes=num_nodes, row_offsets=offsets, col_indices=sym[:, 1].copy())


def build_graph(num_nodes: int, edges) -> Graph:
    """Construct a canonical Graph from possibly unordered/duplicated pairs.

    Raises
    ------
    IndexOutOfRangeError
        if an endpoint is outside [0, num_nodes).
    SelfLoopError
        if a pair connects a node to itself.
    """
    if num_nodes < 1:
        raise IndexOutOfRangeError(f"num_nodes must be positive, got {num_nodes}")
    arr = _as_edge_array(edges)
    if arr.shape[0]:
        if arr.min() < 0 or arr.max() >= num_nodes:
            raise IndexOutOfRangeError(
                f"edge endpoint outside [0, {num_nodes}): "
                f"min {arr.min()}, max {arr.max()}"
            )
        loops = arr[:, 0] == arr[:, 1]
        if np.any(loops):
            u = int(arr[np.argmax(loops), 0])
            raise SelfLoopError(f"self-loop at node {u}")
    return _from_canonical(num_nodes, canonicalize_edges(arr))


def connected_components(g: Graph) -> tuple[np.ndarray, int]:
    """Label nodes by connected component.

    Returns (labels, count) with component ids dense in [0, count),
    numbered in order of each component's lowest node index.
    """
    parent = np.arange(g.num_nodes, dtype=np.int64)

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:  # path compression
            parent[i], i = root, parent[i]
        return root

    for u, v in g.edge_array:
        ru, rv = find(u), find(v)
        if ru != rv:
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv

    labels = np.empty(g.num_nodes, dtype=np.int64)
    remap: dict[int, int] = {}
    for i in range(g.num_nodes):
        root = find(i)
        if root not in remap:
            remap[root] = len(remap)
        labels[i] = remap[root]
    return labels, len(remap)


def induced_subgraph(g: Graph, nodes: np.ndarray) -> tuple[Graph, np.ndarray]:
    """Subgraph induced on ``nodes`` (sorted ascending), with old node ids.

    Returns (subgraph, node_index_map) where node_index_map[new] == old.
    """
    keep = np.zeros(g.num_nodes, dtype=bool)
    keep[nodes] = True
    node_map = np.flatnonzero(keep)
    new_id = np.full(g.num_nodes, -1, dtype=np.int64)
    new_id[node_map] = np.arange(len(node_map))
    e = g.edge_array
    inside = keep[e[:, 0]] & keep[e[:, 1]]
    sub_edges = new_id[e[inside]]
    return _from_canonical(len(node_map), canonicalize_edges(sub_edges)), node_map


def _prim_forest(g: Graph, edge_weights: np.ndarray) -> np.ndarray:
    """Minimum spanning forest edge ids via Prim, one run per component.

    Deterministic: heap entries are keyed by (weight, canonical edge id),
    so weight ties resolve to the lowest canonical edge index, and tree
    roots are visited in ascending node order.
    """
    # Canonical edge id for every directed CSR slot, so neighbor scans can
    # push (weight, id, target) without a dict lookup.
    e = g.edge_array
    keys = g._edge_keys
    rows = np.repeat(np.arange(g.num_nodes, dtype=np.int64), g.degrees)
    slot_keys = (
        np.minimum(rows, g.col_indices) * g.num_nodes
        + np.maximum(rows, g.col_indices)
    )
    slot_eid = np.searchsorted(keys, slot_keys) if len(keys) else slot_keys

    in_tree = np.zeros(g.num_nodes, dtype=bool)
    chosen: list[int] = []
    for root in range(g.num_nodes):
        if in_tree[root]:
            continue
        in_tree[root] = True
        heap: list[tuple[float, int, int]] = []
        for s in range(g.row_offsets[root], g.row_offsets[root + 1]):
            eid = int(slot_eid[s])
            heapq.heappush(heap, (edge_weights[eid], eid, int(g.col_indices[s])))
        while heap:
            w, eid, v = heapq.heappop(heap)
            if in_tree[v]:
                continue
            in_tree[v] = True
            chosen.append(eid)
            for s in range(g.row_offsets[v], g.row_offsets[v + 1]):
                t = int(g.col_indices[s])
                if not in_tree[t]:
                    te = int(slot_eid[s])
                    heapq.heappush(heap, (edge_weights[te], te, t))
    return np.array(sorted(chosen), dtype=np.int64)


def minimum_spanning_tree(wg: WeightedGraph) -> np.ndarray:
    """Prim MST of a connected weighted graph as a canonical edge list.

    Raises DisconnectedError when the graph has more than one component.
    """
    g = wg.graph
    eids = _prim_forest(g, wg.weights)
    if len(eids) != g.num_nodes - 1:
        raise DisconnectedError(
            f"graph has {g.num_nodes - len(eids)} components; "
            "a spanning tree needs exactly one"
        )
    return g.edge_array[eids]


def remove_edges(g: Graph, to_delete) -> Graph:
    """New graph with ``to_delete`` removed; the input graph is untouched.

    Raises MissingEdgeError when any pair is absent from the graph.
    """
    arr = canonicalize_edges(to_delete)
    if arr.shape[0] == 0:
        return g
    drop = g.edge_indices(arr)  # raises on missing edges
    keep = np.ones(g.num_edges, dtype=bool)
    keep[drop] = False
    return _from_canonical(g.num_nodes, g.edge_array[keep])
