"""scikit-learn style wrappers so the clustering core composes with pipelines.

Three estimators cover the fit/transform/predict-shaped parts of the system:
text hashing to vectors, one-shot Louvain clustering of a vector batch, and
the full streaming story clusterer applied to a finite chronological batch.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array

from .embedding import embed_fallback
from .graph import WeightTransform, build_graph
from .louvain import LouvainConfig, louvain
from .pipeline import StoryPipeline
from .window import MS_PER_DAY, Article, WindowConfig


class HashingDocumentEmbedder(TransformerMixin, BaseEstimator):
    """Stateless transformer: iterable of texts -> (n, dim) hashed vectors."""

    def __init__(self, dim: int = 64, seed: int = 7):
        self.dim = dim
        self.seed = seed

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([embed_fallback(text, self.dim, self.seed) for text in X])


class CosineLouvainClusterer(ClusterMixin, BaseEstimator):
    """Louvain communities over the transformed-cosine graph of row vectors.

    After fit: labels_, n_communities_, modularity_, hierarchy_.
    """

    def __init__(
        self,
        weight_kind: str = "clamp",
        epsilon: float = 0.0,
        gamma: float = 1.0,
        min_gain: float = 1e-7,
    ):
        self.weight_kind = weight_kind
        self.epsilon = epsilon
        self.gamma = gamma
        self.min_gain = min_gain

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        transform = WeightTransform(kind=self.weight_kind, epsilon=self.epsilon)
        config = LouvainConfig(gamma=self.gamma, min_gain=self.min_gain)
        vectors = {i: X[i] for i in range(X.shape[0])}
        graph = build_graph(vectors, transform)
        hierarchy = louvain(graph, config)
        final = hierarchy.final
        self.labels_ = np.array([final[i] for i in range(X.shape[0])], dtype=np.int64)
        self.n_communities_ = int(self.labels_.max()) + 1
        self.modularity_ = hierarchy.final_modularity
        self.hierarchy_ = hierarchy
        return self


class StoryStreamClusterer(ClusterMixin, BaseEstimator):
    """Streaming story construction applied to one chronological batch.

    X holds document vectors row by row in stream order; timestamps (in
    days, float) default to one row per day. After fit: labels_ are dense
    story indices, story_ids_ the underlying story ids, and network_ the
    full story network for inspection.
    """

    def __init__(
        self,
        window_span: float = 4.0,
        inch_interval: float = 1.0,
        lateness: float = 0.0,
        weight_kind: str = "clamp",
        epsilon: float = 0.0,
        gamma: float = 1.0,
        min_gain: float = 1e-7,
    ):
        self.window_span = window_span
        self.inch_interval = inch_interval
        self.lateness = lateness
        self.weight_kind = weight_kind
        self.epsilon = epsilon
        self.gamma = gamma
        self.min_gain = min_gain

    def fit(self, X, y=None, timestamps=None):
        X = check_array(X, dtype=np.float64)
        n = X.shape[0]
        if timestamps is None:
            timestamps = np.arange(n, dtype=np.float64)
        timestamps = np.asarray(timestamps, dtype=np.float64)
        if timestamps.shape != (n,):
            raise ValueError(f"timestamps must have shape ({n},), got {timestamps.shape}")
        pipeline = StoryPipeline(
            WindowConfig.from_days(self.window_span, self.inch_interval, self.lateness),
            transform=WeightTransform(kind=self.weight_kind, epsilon=self.epsilon),
            louvain_config=LouvainConfig(gamma=self.gamma, min_gain=self.min_gain),
        )
        width = len(str(max(n - 1, 1)))
        ids = [f"{i:0{width}d}" for i in range(n)]
        for i in range(n):
            pipeline.process(
                Article(
                    article_id=ids[i],
                    timestamp_ms=round(float(timestamps[i]) * MS_PER_DAY),
                    vector=X[i],
                )
            )
        pipeline.finish()
        assignments = pipeline.network.assignments()
        story_ids = np.array([assignments[a] for a in ids], dtype=np.int64)
        unique = {}
        labels = np.empty(n, dtype=np.int64)
        for i, sid in enumerate(story_ids):
            labels[i] = unique.setdefault(int(sid), len(unique))
        self.labels_ = labels
        self.story_ids_ = story_ids
        self.network_ = pipeline.network
        return self

    def fit_predict(self, X, y=None, timestamps=None):
        return self.fit(X, y=y, timestamps=timestamps).labels_


__all__ = [
    "HashingDocumentEmbedder",
    "CosineLouvainClusterer",
    "StoryStreamClusterer",
]
