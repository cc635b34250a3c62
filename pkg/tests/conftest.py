"""Shared test helpers: independent oracles and deterministic generators.

The oracles here deliberately avoid the production code paths: modularity is
evaluated from the raw double-sum definition, pair F1 by enumerating article
pairs, and partitions by exhaustive recursion. Production results are checked
against these, never against themselves.
"""

import itertools
import json
import random
from pathlib import Path

import numpy as np
import pytest

from storystream.graph import WeightedGraph

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "storystream" / "data"


# --- independent oracles ----------------------------------------------------

def modularity_definition(graph, partition, gamma=1.0):
    """Q from the raw (1/2m) sum over ordered node pairs; no shared code."""
    nodes = list(graph.nodes)
    degree = {u: sum(graph.neighbors(u).values()) for u in nodes}
    m = sum(degree.values()) / 2.0
    if m == 0:
        return 0.0
    total = 0.0
    for u in nodes:
        for v in nodes:
            if partition[u] != partition[v]:
                continue
            a_uv = graph.edge_weight(u, v) if u != v else 0.0
            total += a_uv - gamma * degree[u] * degree[v] / (2.0 * m)
    return total / (2.0 * m)


def pairwise_f1_bruteforce(pred, gold):
    """Pair enumeration with the 0/0 -> 0 conventions."""
    ids = sorted(pred)
    tp = pred_pairs = gold_pairs = 0
    for a, b in itertools.combinations(ids, 2):
        same_pred = pred[a] == pred[b]
        same_gold = gold[a] == gold[b]
        if same_pred:
            pred_pairs += 1
        if same_gold:
            gold_pairs += 1
        if same_pred and same_gold:
            tp += 1
    precision = tp / pred_pairs if pred_pairs else 0.0
    recall = tp / gold_pairs if gold_pairs else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def set_partitions(items):
    """Every partition of items, as a list of lists."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield part + [[first]]


def blocks_to_labeling(blocks):
    return {item: idx for idx, block in enumerate(blocks) for item in block}


# --- deterministic generators -----------------------------------------------

def random_graph(seed, n, edge_prob=0.6):
    """Random weighted graph on n string nodes, weights uniform in (0, 1]."""
    rng = random.Random(seed)
    graph = WeightedGraph()
    ids = [f"n{i:02d}" for i in range(n)]
    for i, u in enumerate(ids):
        weights = {}
        for v in ids[:i]:
            if rng.random() < edge_prob:
                w = rng.random()
                if w > 0.0:
                    weights[v] = w
        graph.insert_node(u, weights)
    return graph


def triangle_pair_graph():
    """Two disjoint triangles with unit weights; the classic Q = 0.5 case."""
    edges = {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}
    graph = WeightedGraph()
    for i in range(6):
        weights = {f"t{j}": 1.0 for j in range(i) if (j, i) in edges}
        graph.insert_node(f"t{i}", weights)
    return graph


def planted_vectors(rng, centers, counts, noise=0.05):
    """Unit vectors scattered around the given centers; returns (vecs, labels)."""
    vectors = {}
    labels = {}
    k = 0
    for c_idx, count in enumerate(counts):
        for _ in range(count):
            v = centers[c_idx] + rng.normal(0.0, noise, size=centers.shape[1])
            v = v / np.linalg.norm(v)
            name = f"d{k:04d}"
            vectors[name] = v
            labels[name] = str(c_idx)
            k += 1
    return vectors, labels


def separated_centers(n_centers, dim, pairwise_cos=-0.2):
    """Unit centers with the given pairwise cosine (slightly negative keeps
    unrelated clusters from sharing clamped edges)."""
    t = pairwise_cos
    gram = (1 - t) * np.eye(n_centers) + t * np.ones((n_centers, n_centers))
    vals, vecs = np.linalg.eigh(gram)
    base = vecs @ np.diag(np.sqrt(np.maximum(vals, 0.0)))
    centers = np.zeros((n_centers, dim))
    centers[:, :n_centers] = base
    return centers


# --- fixtures ----------------------------------------------------------------

@pytest.fixture(scope="session")
def mini_corpus_path():
    return DATA_DIR / "mini_corpus.jsonl"


@pytest.fixture(scope="session")
def mini_labels_path():
    return DATA_DIR / "mini_corpus_labels.jsonl"


@pytest.fixture(scope="session")
def mini_corpus(mini_corpus_path):
    records = []
    with open(mini_corpus_path) as fh:
        for line in fh:
            records.append(json.loads(line))
    return records


@pytest.fixture(scope="session")
def mini_labels(mini_labels_path):
    labels = {}
    with open(mini_labels_path) as fh:
        for line in fh:
            rec = json.loads(line)
            labels[rec["id"]] = rec["label"]
    return labels
