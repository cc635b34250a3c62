"""storystream: cluster a chronological news stream into persistent stories.

Articles arrive as vectors (precomputed or hashed from text), get grouped
into topics by Louvain community detection over a cosine-similarity graph
inside a batch-then-inch sliding window, and topics are merged into
long-lived, vector-summed stories.
"""

__version__ = "0.1.0"

from .embedding import VectorSource, embed_fallback, load_vectors
from .graph import WeightTransform, WeightedGraph, add_node, build_graph, cosine, remove_nodes
from .louvain import Hierarchy, LouvainConfig, assign_on_the_fly, louvain, modularity
from .metrics import load_labels, nmi, pairwise_f1
from .pipeline import StoryPipeline
from .storynet import Story, StoryNetwork, Topic
from .window import (
    Article,
    InchingWindow,
    TemporaryAssignment,
    TopicsEmitted,
    WindowConfig,
    WindowSlid,
)

__all__ = [
    "__version__",
    "Article",
    "Hierarchy",
    "InchingWindow",
    "LouvainConfig",
    "Story",
    "StoryNetwork",
    "StoryPipeline",
    "TemporaryAssignment",
    "Topic",
    "TopicsEmitted",
    "VectorSource",
    "WeightTransform",
    "WeightedGraph",
    "WindowConfig",
    "WindowSlid",
    "add_node",
    "assign_on_the_fly",
    "build_graph",
    "cosine",
    "embed_fallback",
    "load_labels",
    "load_vectors",
    "louvain",
    "modularity",
    "nmi",
    "pairwise_f1",
    "remove_nodes",
]
