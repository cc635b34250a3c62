"""Weighted modularity and deterministic Louvain community detection.

Also implements the single-node on-the-fly assignment used while a window
inches forward between full re-clusterings: the newcomer is scored against
every existing community plus a fresh singleton, and the placement with the
highest whole-graph modularity wins.

Determinism contract: nodes are visited in ascending id order, community
labels are canonical (0..k-1 ordered by smallest member), and ties prefer
the singleton and then the lowest community id. Running twice on the same
graph and config yields identical output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Hashable, List, Tuple

from .errors import EmptyGraphError, PartitionMismatchError, UnknownNodeError
from .graph import WeightedGraph

# node id -> community id
Partition = Dict[Hashable, int]


@dataclass(frozen=True)
class LouvainConfig:
    """Resolution, minimum move gain, and (implicitly) fixed visit order."""

    gamma: float = 1.0
    min_gain: float = 1e-7

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.min_gain <= 0.0:
            raise ValueError(f"min_gain must be > 0, got {self.min_gain}")


@dataclass(frozen=True)
class Hierarchy:
    """Partitions found per pass, finest first, with their modularities."""

    levels: Tuple[Partition, ...]
    modularities: Tuple[float, ...]

    @property
    def final(self) -> Partition:
        return self.levels[-1]

    @property
    def final_modularity(self) -> float:
        return self.modularities[-1]


def _check_partition(graph: WeightedGraph, partition: Partition) -> None:
    if len(partition) != len(graph):
        raise PartitionMismatchError(
            f"partition covers {len(partition)} nodes, graph has {len(graph)}"
        )
    for node in graph.nodes:
        if node not in partition:
            raise PartitionMismatchError(f"node {node!r} missing from partition")


def modularity(graph: WeightedGraph, partition: Partition, gamma: float = 1.0) -> float:
    """Newman-Girvan weighted modularity of a partition.

    Q = sum over communities of [w_in/m - gamma * (K/(2m))^2] where w_in is
    the intra-community edge weight, K the summed member degree, and m the
    total edge weight. Returns 0 for edgeless graphs.
    """
    _check_partition(graph, partition)
    m = graph.m
    if m <= 0.0:
        return 0.0
    deg: Dict[int, float] = {}
    for node in graph.nodes:
        comm = partition[node]
        deg[comm] = deg.get(comm, 0.0) + graph.degree(node)
    intra: Dict[int, float] = {}
    for u, v, w in graph.edges():
        cu = partition[u]
        if cu == partition[v]:
            intra[cu] = intra.get(cu, 0.0) + w
    two_m = 2.0 * m
    q = 0.0
    for comm, k_sum in deg.items():
        q += intra.get(comm, 0.0) / m - gamma * (k_sum / two_m) ** 2
    return q


def _local_move(
    adj: List[Dict[int, float]],
    deg: List[float],
    m: float,
    gamma: float,
    min_gain: float,
) -> List[int]:
    """One local-moving phase; returns canonical community labels per node."""
    n = len(adj)
    comm = list(range(n))
    com_tot = list(deg)
    while True:
        moved = False
        for i in range(n):
            ci = comm[i]
            k_in: Dict[int, float] = {}
            for j, w in adj[i].items():
                cj = comm[j]
                k_in[cj] = k_in.get(cj, 0.0) + w
            di = deg[i]
            com_tot[ci] -= di
            base = k_in.get(ci, 0.0) - gamma * com_tot[ci] * di / (2.0 * m)
            best_comm = ci
            best_gain = min_gain
            for cj in sorted(k_in):
                if cj == ci:
                    continue
                gain = (k_in[cj] - gamma * com_tot[cj] * di / (2.0 * m) - base) / m
                if gain > best_gain:
                    best_comm = cj
                    best_gain = gain
            com_tot[best_comm] += di
            if best_comm != ci:
                comm[i] = best_comm
                moved = True
        if not moved:
            break
    relabel: Dict[int, int] = {}
    out = []
    for c in comm:
        if c not in relabel:
            relabel[c] = len(relabel)
        out.append(relabel[c])
    return out


def _aggregate(
    adj: List[Dict[int, float]],
    deg: List[float],
    comm: List[int],
    n_comms: int,
) -> Tuple[List[Dict[int, float]], List[float]]:
    """Collapse communities into super-nodes; intra weight folds into degree."""
    new_deg = [0.0] * n_comms
    for i, di in enumerate(deg):
        new_deg[comm[i]] += di
    new_adj: List[Dict[int, float]] = [{} for _ in range(n_comms)]
    for i in range(len(adj)):
        ci = comm[i]
        for j, w in adj[i].items():
            if j <= i:
                continue
            cj = comm[j]
            if ci == cj:
                continue
            new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
            new_adj[cj][ci] = new_adj[cj].get(ci, 0.0) + w
    new_adj = [dict(sorted(nbrs.items())) for nbrs in new_adj]
    return new_adj, new_deg


def louvain(graph: WeightedGraph, config: LouvainConfig | None = None) -> Hierarchy:
    """Hierarchical Louvain: local moving then aggregation until no merge.

    Per-pass partitions are projected onto the original nodes, so later
    levels are always unions of earlier ones and modularity never decreases.
    """
    config = config or LouvainConfig()
    n = len(graph)
    if n == 0:
        raise EmptyGraphError("cannot cluster an empty graph")
    nodes_sorted = sorted(graph.nodes)
    index_of = {node: i for i, node in enumerate(nodes_sorted)}
    adj: List[Dict[int, float]] = [dict() for _ in range(n)]
    for node in nodes_sorted:
        i = index_of[node]
        adj[i] = dict(sorted((index_of[v], w) for v, w in graph.neighbors(node).items()))
    deg = [sum(nbrs.values()) for nbrs in adj]
    m = sum(deg) / 2.0
    if m <= 0.0:
        part = {node: i for i, node in enumerate(nodes_sorted)}
        return Hierarchy((part,), (0.0,))

    membership = list(range(n))
    levels: List[Partition] = []
    mods: List[float] = []
    while True:
        comm = _local_move(adj, deg, m, config.gamma, config.min_gain)
        n_comms = max(comm) + 1
        merged = n_comms < len(adj)
        if levels and not merged:
            break
        membership = [comm[membership[i]] for i in range(n)]
        part = {nodes_sorted[i]: membership[i] for i in range(n)}
        levels.append(part)
        mods.append(modularity(graph, part, config.gamma))
        if not merged:
            break
        adj, deg = _aggregate(adj, deg, comm, n_comms)
    return Hierarchy(tuple(levels), tuple(mods))


def assign_on_the_fly(
    graph: WeightedGraph,
    partition: Partition,
    new_node,
    gamma: float = 1.0,
) -> int:
    """Community for a newcomer by whole-graph modularity comparison.

    The graph already contains new_node; partition covers every other node.
    Each existing community is scored with the newcomer inside it, plus one
    candidate where the newcomer forms a fresh singleton community. Ties
    favor the singleton, then the lowest community id. The result matches
    argmax over from-scratch modularity() evaluation of every candidate.
    """
    if new_node not in graph:
        raise UnknownNodeError(f"new node {new_node!r} missing from graph")
    rest = [node for node in graph.nodes if node != new_node]
    if len(partition) != len(rest):
        raise PartitionMismatchError(
            f"partition covers {len(partition)} nodes, expected {len(rest)}"
        )
    for node in rest:
        if node not in partition:
            raise PartitionMismatchError(f"node {node!r} missing from partition")

    deg_sum: Dict[int, float] = {}
    for node in rest:
        comm = partition[node]
        deg_sum[comm] = deg_sum.get(comm, 0.0) + graph.degree(node)
    intra: Dict[int, float] = {}
    for u, v, w in graph.edges():
        if u == new_node or v == new_node:
            continue
        cu = partition[u]
        if cu == partition[v]:
            intra[cu] = intra.get(cu, 0.0) + w
    k_new_in: Dict[int, float] = {}
    for v, w in graph.neighbors(new_node).items():
        cv = partition[v]
        k_new_in[cv] = k_new_in.get(cv, 0.0) + w
    k_new = graph.degree(new_node)

    labels = sorted(deg_sum)
    fresh = (max(labels) + 1) if labels else 0
    m = graph.m
    if m <= 0.0:
        return fresh
    two_m = 2.0 * m

    def candidate_q(target: int) -> float:
        q = 0.0
        for comm in labels:
            w_in = intra.get(comm, 0.0)
            k_sum = deg_sum[comm]
            if comm == target:
                w_in += k_new_in.get(comm, 0.0)
                k_sum += k_new
            q += w_in / m - gamma * (k_sum / two_m) ** 2
        if target == fresh:
            q -= gamma * (k_new / two_m) ** 2
        return q

    best = fresh
    best_q = candidate_q(fresh)
    for comm in labels:
        q = candidate_q(comm)
        if q > best_q:
            best = comm
            best_q = q
    return best
