import numpy as np
import pytest
from sklearn.metrics import normalized_mutual_info_score
from sklearn.pipeline import make_pipeline

from storystream.estimators import (
    CosineLouvainClusterer,
    HashingDocumentEmbedder,
    StoryStreamClusterer,
)

from conftest import separated_centers


def planted_matrix(seed=0, per_cluster=10, clusters=3, dim=12):
    rng = np.random.RandomState(seed)
    centers = separated_centers(clusters, dim=dim)
    rows, labels = [], []
    for c in range(clusters):
        for _ in range(per_cluster):
            v = centers[c] + rng.normal(0, 0.05, size=dim)
            rows.append(v / np.linalg.norm(v))
            labels.append(c)
    order = rng.permutation(len(rows))
    X = np.vstack(rows)[order]
    y = np.asarray(labels)[order]
    return X, y


class TestHashingDocumentEmbedder:
    def test_transform_shape_and_determinism(self):
        embedder = HashingDocumentEmbedder(dim=32, seed=5)
        X = embedder.fit_transform(["alpha beta", "gamma delta", "alpha beta"])
        assert X.shape == (3, 32)
        assert np.array_equal(X[0], X[2])
        assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-9)

    def test_get_params_roundtrip(self):
        embedder = HashingDocumentEmbedder(dim=16, seed=9)
        params = embedder.get_params()
        assert params == {"dim": 16, "seed": 9}
        embedder.set_params(dim=8)
        assert embedder.transform(["x"]).shape == (1, 8)


class TestCosineLouvainClusterer:
    def test_recovers_planted_clusters(self):
        X, y = planted_matrix()
        clusterer = CosineLouvainClusterer()
        labels = clusterer.fit_predict(X)
        assert normalized_mutual_info_score(y, labels) == pytest.approx(1.0, abs=0)
        assert clusterer.n_communities_ == 3
        assert clusterer.modularity_ > 0.3

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            CosineLouvainClusterer().fit(np.empty((0, 4)))
        with pytest.raises(ValueError):
            CosineLouvainClusterer().fit([[np.nan, 1.0]])

    def test_pipeline_composition(self):
        texts = [
            "stock market rally continues today",
            "market stocks rally big gains",
            "heavy rain floods the coastal town",
            "flood rain storm damages town",
        ]
        pipe = make_pipeline(HashingDocumentEmbedder(dim=64), CosineLouvainClusterer())
        labels = pipe.fit_predict(texts)
        assert labels.shape == (4,)


class TestStoryStreamClusterer:
    def test_streaming_fit_recovers_stories(self):
        X, y = planted_matrix(seed=3, per_cluster=8)
        timestamps = np.arange(len(X)) * 0.25
        clusterer = StoryStreamClusterer(window_span=3.0, inch_interval=1.0)
        labels = clusterer.fit_predict(X, timestamps=timestamps)
        assert normalized_mutual_info_score(y, labels) == pytest.approx(1.0, abs=0)
        assert len(clusterer.network_.stories) == 3
        assert labels.min() == 0

    def test_default_timestamps(self):
        X, _ = planted_matrix(seed=4, per_cluster=4)
        labels = StoryStreamClusterer(window_span=2.0).fit_predict(X)
        assert labels.shape == (len(X),)

    def test_timestamp_shape_checked(self):
        X, _ = planted_matrix(per_cluster=2)
        with pytest.raises(ValueError):
            StoryStreamClusterer().fit(X, timestamps=np.zeros(3))

    def test_rows_must_be_in_stream_order(self):
        from storystream.errors import OutOfOrderError

        X, _ = planted_matrix(per_cluster=2)
        backwards = np.arange(len(X))[::-1].astype(float)
        with pytest.raises(OutOfOrderError):
            StoryStreamClusterer().fit(X, timestamps=backwards)

    def test_sklearn_param_interface(self):
        clusterer = StoryStreamClusterer(gamma=1.5)
        assert clusterer.get_params()["gamma"] == 1.5
        clone_params = StoryStreamClusterer(**clusterer.get_params()).get_params()
        assert clone_params == clusterer.get_params()
