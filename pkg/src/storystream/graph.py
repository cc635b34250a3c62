"""Weighted similarity graph over document vectors.

Every article is a node; edge weights come from cosine similarity pushed
through a configurable non-negative transform. The graph maintains per-node
weighted degrees and the total edge weight m incrementally so nodes can be
added (mid-window arrivals) and removed (window evictions) cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, Iterator, Mapping, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateNodeError,
    UnknownNodeError,
    ZeroVectorError,
)

TRANSFORM_KINDS = ("clamp", "shift")


@dataclass(frozen=True)
class WeightTransform:
    """Maps a raw cosine similarity to a non-negative edge weight.

    clamp: w = max(0, cos). shift: w = (cos + 1) / 2. A pair becomes an
    edge only when its transformed weight is strictly above epsilon.
    """

    kind: str = "clamp"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown weight transform {self.kind!r}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")

    def apply(self, cos_sim: float) -> float:
        if self.kind == "clamp":
            return max(0.0, cos_sim)
        return (cos_sim + 1.0) / 2.0


def cosine(u, v) -> float:
    """Cosine similarity of two equal-dimension nonzero vectors, in [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"dimensions differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine undefined for zero-norm vector")
    value = float(np.dot(u, v)) / (nu * nv)
    return min(1.0, max(-1.0, value))


class WeightedGraph:
    """Undirected weighted graph without self-edges.

    Stored weights are always > 0; absent pairs mean weight 0. Single-writer:
    mutate from one thread at a time, read freely between mutations.
    """

    def __init__(self):
        self._adj: Dict[Hashable, Dict[Hashable, float]] = {}
        self._degree: Dict[Hashable, float] = {}
        self._m = 0.0

    def __contains__(self, node) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    @property
    def nodes(self):
        return self._adj.keys()

    @property
    def m(self) -> float:
        """Total edge weight (each edge counted once)."""
        return self._m

    def degree(self, node) -> float:
        try:
            return self._degree[node]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node!r}") from None

    def neighbors(self, node) -> Mapping[Hashable, float]:
        """Neighbor -> weight mapping. Treat as read-only."""
        try:
            return self._adj[node]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node!r}") from None

    def edge_weight(self, u, v) -> float:
        return self._adj.get(u, {}).get(v, 0.0)

    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def edges(self) -> Iterator[Tuple[Hashable, Hashable, float]]:
        """Each undirected edge exactly once, in insertion order."""
        order = {node: i for i, node in enumerate(self._adj)}
        for u, nbrs in self._adj.items():
            for v, w in nbrs.items():
                if order[u] < order[v]:
                    yield u, v, w

    def insert_node(self, node, weights: Mapping[Hashable, float]) -> None:
        """Add a node with edges to existing nodes; weights must be > 0."""
        if node in self._adj:
            raise DuplicateNodeError(f"node {node!r} already in graph")
        for other in weights:
            if other not in self._adj:
                raise UnknownNodeError(f"cannot link new node to unknown node {other!r}")
        self._adj[node] = {}
        self._degree[node] = 0.0
        for other, w in weights.items():
            self._adj[node][other] = w
            self._adj[other][node] = w
            self._degree[node] += w
            self._degree[other] += w
            self._m += w

    def remove(self, ids: Iterable[Hashable]) -> None:
        ids = list(ids)
        for node in ids:
            if node not in self._adj:
                raise UnknownNodeError(f"unknown node {node!r}")
        for node in ids:
            for other, w in self._adj[node].items():
                del self._adj[other][node]
                self._degree[other] -= w
                self._m -= w
            del self._adj[node]
            del self._degree[node]
        if not self._adj:
            self._m = 0.0

    def consistency_error(self) -> float:
        """Max deviation of maintained degrees/m from a fresh recount."""
        worst = 0.0
        total = 0.0
        for node, nbrs in self._adj.items():
            fresh = sum(nbrs.values())
            worst = max(worst, abs(fresh - self._degree[node]))
            total += fresh
        worst = max(worst, abs(total / 2.0 - self._m))
        return worst


def _as_matrix(vectors: Mapping[Hashable, np.ndarray]):
    ids = list(vectors)
    dim = None
    rows = []
    for node in ids:
        vec = np.asarray(vectors[node], dtype=np.float64)
        if vec.ndim != 1:
            raise DimensionMismatchError(f"vector for {node!r} is not 1-dimensional")
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise DimensionMismatchError(
                f"vector for {node!r} has dimension {vec.shape[0]}, expected {dim}"
            )
        rows.append(vec)
    return ids, np.vstack(rows)


def _edge_weights(normed_new, normed_others, other_ids, transform):
    weights = {}
    if len(other_ids) == 0:
        return weights
    sims = normed_others @ normed_new
    for node, sim in zip(other_ids, sims):
        w = transform.apply(min(1.0, max(-1.0, float(sim))))
        if w > transform.epsilon:
            weights[node] = w
    return weights


def build_graph(
    vectors: Mapping[Hashable, np.ndarray],
    transform: WeightTransform | None = None,
    *,
    skip_zero_norm: bool = False,
) -> WeightedGraph:
    """Graph with one node per vector and transformed-cosine edge weights.

    With skip_zero_norm, zero-norm vectors become isolated nodes instead of
    raising ZeroVectorError (used for story graphs where a vector sum can
    degenerate).
    """
    if not vectors:
        raise ValueError("at least one vector is required")
    transform = transform or WeightTransform()
    ids, mat = _as_matrix(vectors)
    norms = np.linalg.norm(mat, axis=1)
    zero = norms == 0.0
    if np.any(zero) and not skip_zero_norm:
        bad = ids[int(np.argmax(zero))]
        raise ZeroVectorError(f"vector for {bad!r} has zero norm")
    safe = np.where(zero, 1.0, norms)
    normed = mat / safe[:, None]
    graph = WeightedGraph()
    for i, node in enumerate(ids):
        if zero[i]:
            graph.insert_node(node, {})
            continue
        live = [j for j in range(i) if not zero[j]]
        weights = _edge_weights(normed[i], normed[live], [ids[j] for j in live], transform)
        graph.insert_node(node, weights)
    return graph


def add_node(
    graph: WeightedGraph,
    node,
    vector,
    others: Mapping[Hashable, np.ndarray],
    transform: WeightTransform | None = None,
) -> WeightedGraph:
    """Insert one node, linking it to every existing node per the transform.

    others must hold the vectors of exactly the graph's current nodes.
    """
    if node in graph:
        raise DuplicateNodeError(f"node {node!r} already in graph")
    if set(others) != set(graph.nodes):
        raise ValueError("others must cover exactly the graph's current nodes")
    transform = transform or WeightTransform()
    vec = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroVectorError(f"vector for {node!r} has zero norm")
    if others:
        ids, mat = _as_matrix({n: others[n] for n in graph.nodes})
        if mat.shape[1] != vec.shape[0]:
            raise DimensionMismatchError(
                f"vector for {node!r} has dimension {vec.shape[0]}, expected {mat.shape[1]}"
            )
        norms = np.linalg.norm(mat, axis=1)
        if np.any(norms == 0.0):
            bad = ids[int(np.argmax(norms == 0.0))]
            raise ZeroVectorError(f"vector for {bad!r} has zero norm")
        weights = _edge_weights(vec / norm, mat / norms[:, None], ids, transform)
    else:
        weights = {}
    graph.insert_node(node, weights)
    return graph


def remove_nodes(graph: WeightedGraph, ids: Iterable[Hashable]) -> WeightedGraph:
    """Remove nodes and their incident edges."""
    graph.remove(ids)
    return graph
