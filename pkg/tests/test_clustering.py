"""Neuron clustering: k-means, mean shift, and the cluster edit operations."""

from __future__ import annotations

import math

import numpy as np
import pytest

from convscope import cluster_layer, move_neuron, resize_cluster_view
from convscope.clustering import (
    default_k,
    filter_by_classes,
    kmeans,
    meanshift,
    median_pairwise_distance,
    select_representatives,
)
from convscope.errors import (
    CountUnderflow,
    EmptyClassSet,
    InvalidK,
    NonPositiveBandwidth,
    UnknownNeuron,
    UnknownTargetCluster,
)
from convscope.oracles import best_partition_sse


def _sse(vectors: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for lbl in np.unique(labels):
        pts = vectors[labels == lbl]
        total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


class TestKMeans:
    def test_never_beats_exhaustive_partition(self):
        # the global optimum over all label assignments is a hard lower bound
        rng = np.random.default_rng(0)
        for _ in range(15):
            n = int(rng.integers(3, 7))
            k = int(rng.integers(2, min(3, n) + 1))
            vectors = rng.normal(size=(n, 2))
            labels, sse, _ = kmeans(vectors, k, seed=0)
            best, _ = best_partition_sse(vectors, k)
            assert sse >= best - 1e-9
            assert abs(_sse(vectors, labels) - sse) < 1e-9

    def test_finds_optimum_on_separated_blobs(self):
        rng = np.random.default_rng(1)
        for trial in range(10):
            a = rng.normal(size=(3, 2)) * 0.05
            b = rng.normal(size=(3, 2)) * 0.05 + 50.0
            vectors = np.vstack([a, b])
            labels, sse, _ = kmeans(vectors, 2, seed=trial)
            best, _ = best_partition_sse(vectors, 2)
            assert abs(sse - best) < 1e-9
            assert len(set(labels[:3])) == 1 and len(set(labels[3:])) == 1

    def test_history_is_non_increasing(self):
        rng = np.random.default_rng(2)
        vectors = rng.normal(size=(40, 3))
        _, _, history = kmeans(vectors, 5, seed=3)
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(3)
        vectors = rng.normal(size=(30, 4))
        a = kmeans(vectors, 4, seed=7)
        b = kmeans(vectors, 4, seed=7)
        np.testing.assert_array_equal(a[0], b[0])
        assert a[1] == b[1]

    def test_k_bounds(self):
        vectors = np.zeros((3, 2))
        with pytest.raises(InvalidK):
            kmeans(vectors, 0)
        with pytest.raises(InvalidK):
            kmeans(vectors, 4)

    def test_default_k_rule(self):
        for n in (1, 2, 3, 8, 50, 128):
            assert default_k(n) == max(1, math.ceil(math.sqrt(n / 2.0)))


class TestMeanShift:
    def test_two_separated_modes(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(8, 2)) * 0.1
        b = rng.normal(size=(8, 2)) * 0.1 + 10.0
        labels = meanshift(np.vstack([a, b]), bandwidth=2.0)
        assert len(set(labels)) == 2
        assert len(set(labels[:8])) == 1 and len(set(labels[8:])) == 1

    def test_default_bandwidth_separates_unbalanced_blobs(self):
        # with most pairs inside the big blob the median pairwise distance
        # stays well below the blob separation
        rng = np.random.default_rng(40)
        a = rng.normal(size=(12, 2)) * 0.1
        b = rng.normal(size=(4, 2)) * 0.1 + 10.0
        pts = np.vstack([a, b])
        assert median_pairwise_distance(pts) < 5.0
        labels = meanshift(pts)
        assert len(set(labels)) == 2
        assert len(set(labels[:12])) == 1 and len(set(labels[12:])) == 1

    def test_single_blob_is_one_cluster(self):
        rng = np.random.default_rng(5)
        labels = meanshift(rng.normal(size=(10, 2)) * 0.01, bandwidth=1.0)
        assert len(set(labels)) == 1

    def test_bandwidth_must_be_positive(self):
        with pytest.raises(NonPositiveBandwidth):
            meanshift(np.zeros((3, 2)), bandwidth=0.0)

    def test_median_pairwise_distance(self):
        pts = np.array([[0.0], [1.0], [3.0]])  # pairwise distances 1, 2, 3
        assert median_pairwise_distance(pts) == 2.0


class TestRepresentatives:
    def test_closest_to_centroid_in_order(self):
        rng = np.random.default_rng(6)
        members = [f"n{i}" for i in range(10)]
        vectors = {m: rng.normal(size=3) for m in members}
        centroid = rng.normal(size=3)
        reps = select_representatives(members, vectors, centroid, 4)
        ranked = sorted(members, key=lambda m: float(((vectors[m] - centroid) ** 2).sum()))
        assert list(reps) == ranked[:4]

    def test_equidistant_members_by_lower_id(self):
        vectors = {"b": np.array([1.0, 0.0]), "a": np.array([-1.0, 0.0]),
                   "c": np.array([0.0, 5.0])}
        reps = select_representatives(["b", "a", "c"], vectors, np.zeros(2), 2)
        assert reps == ("a", "b")


class TestClusterLayer:
    def test_partition_covers_layer(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer)
        seen = [m for c in clustering.clusters for m in c.members]
        assert sorted(seen) == sorted(small_snapshot.layer_by_name[layer].neurons)
        assert len(seen) == len(set(seen))

    def test_centroid_is_member_mean(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer, method="kmeans", k=3, seed=1)
        for c in clustering.clusters:
            mean = np.mean([small_snapshot.activations[m] for m in c.members], axis=0)
            np.testing.assert_allclose(np.asarray(c.centroid), mean, atol=1e-12)

    def test_representatives_subset_of_members(self, small_snapshot):
        layer = small_snapshot.display_layers[1]
        clustering = cluster_layer(small_snapshot, layer, repr_count=3)
        for c in clustering.clusters:
            assert set(c.representatives) <= set(c.members)
            assert len(c.representatives) == min(3, len(c.members))


class TestMoveNeuron:
    def _clustering(self, snapshot):
        layer = snapshot.display_layers[0]
        return layer, cluster_layer(snapshot, layer, method="kmeans", k=2, seed=0)

    def test_membership_transfer(self, small_snapshot):
        layer, clustering = self._clustering(small_snapshot)
        src = max(clustering.clusters, key=lambda c: len(c.members))
        dst = next(c for c in clustering.clusters if c.id != src.id)
        neuron = src.members[0]
        moved = move_neuron(small_snapshot, clustering, neuron, dst.id)
        by_id = {c.id: c for c in moved.clusters}
        assert neuron not in by_id[src.id].members
        assert neuron in by_id[dst.id].members

    def test_moved_centroids_recomputed(self, small_snapshot):
        layer, clustering = self._clustering(small_snapshot)
        src = max(clustering.clusters, key=lambda c: len(c.members))
        dst = next(c for c in clustering.clusters if c.id != src.id)
        moved = move_neuron(small_snapshot, clustering, src.members[0], dst.id)
        for c in moved.clusters:
            mean = np.mean([small_snapshot.activations[m] for m in c.members], axis=0)
            np.testing.assert_allclose(np.asarray(c.centroid), mean, atol=1e-12)

    def test_emptied_source_disappears(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer, method="kmeans", k=2, seed=0)
        lone = min(clustering.clusters, key=lambda c: len(c.members))
        while len(lone.members) > 1:
            other = next(c for c in clustering.clusters if c.id != lone.id)
            clustering = move_neuron(small_snapshot, clustering, lone.members[0], other.id)
            lone = next(c for c in clustering.clusters if c.id == lone.id)
        other = next(c for c in clustering.clusters if c.id != lone.id)
        final = move_neuron(small_snapshot, clustering, lone.members[0], other.id)
        assert lone.id not in {c.id for c in final.clusters}

    def test_move_to_new_cluster(self, small_snapshot):
        layer, clustering = self._clustering(small_snapshot)
        src = max(clustering.clusters, key=lambda c: len(c.members))
        neuron = src.members[0]
        moved = move_neuron(small_snapshot, clustering, neuron, "new")
        fresh = [c for c in moved.clusters if c.id not in {x.id for x in clustering.clusters}]
        assert len(fresh) == 1 and fresh[0].members == (neuron,)
        assert moved.next_index == clustering.next_index + 1

    def test_unknown_ids_rejected(self, small_snapshot):
        layer, clustering = self._clustering(small_snapshot)
        with pytest.raises(UnknownNeuron):
            move_neuron(small_snapshot, clustering, "ghost", clustering.clusters[0].id)
        with pytest.raises(UnknownTargetCluster):
            move_neuron(small_snapshot, clustering, clustering.clusters[0].members[0], "ghost")

    def test_move_to_own_cluster_is_identity(self, small_snapshot):
        layer, clustering = self._clustering(small_snapshot)
        c0 = clustering.clusters[0]
        moved = move_neuron(small_snapshot, clustering, c0.members[0], c0.id)
        assert moved == clustering


class TestResize:
    def test_prefix_property(self, small_snapshot):
        # shrinking the view keeps a prefix of the larger view's rank order
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer, method="kmeans", k=1, seed=0)
        cid = clustering.clusters[0].id
        big = resize_cluster_view(small_snapshot, clustering, cid, 6)
        small = resize_cluster_view(small_snapshot, clustering, cid, 3)
        big_reps = next(c for c in big.clusters if c.id == cid).representatives
        small_reps = next(c for c in small.clusters if c.id == cid).representatives
        assert small_reps == big_reps[:3]

    def test_clamped_to_member_count(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer, method="kmeans", k=1, seed=0)
        c = clustering.clusters[0]
        resized = resize_cluster_view(small_snapshot, clustering, c.id, len(c.members) + 50)
        assert len(resized.clusters[0].representatives) == len(c.members)

    def test_count_underflow(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        clustering = cluster_layer(small_snapshot, layer, method="kmeans", k=1, seed=0)
        with pytest.raises(CountUnderflow):
            resize_cluster_view(small_snapshot, clustering, clustering.clusters[0].id, 0)


class TestClassFilter:
    def _oracle(self, snapshot, layer, class_indices, quantile):
        neurons = snapshot.layer_by_name[layer].neurons
        matrix = snapshot.activation_matrix(layer)
        cols = class_indices if class_indices is not None else range(len(snapshot.classes))
        scores = {n: max(matrix[i, c] for c in cols) for i, n in enumerate(neurons)}
        keep = max(1, math.ceil(quantile * len(neurons)))
        cut = sorted(scores.values(), reverse=True)[keep - 1]
        hi = tuple(n for n in neurons if scores[n] >= cut)
        return hi, tuple(n for n in neurons if n not in hi)

    def test_matches_sort_and_cut(self, small_snapshot):
        rng = np.random.default_rng(7)
        layer = small_snapshot.display_layers[0]
        m = len(small_snapshot.classes)
        for _ in range(20):
            q = float(rng.uniform(0.05, 1.0))
            classes = sorted(rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False))
            got = filter_by_classes(small_snapshot, layer, [int(c) for c in classes], q)
            want = self._oracle(small_snapshot, layer, classes, q)
            assert got == want

    def test_full_quantile_keeps_everything(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        hi, lo = filter_by_classes(small_snapshot, layer, None, 1.0)
        assert lo == () and len(hi) == len(small_snapshot.layer_by_name[layer].neurons)

    def test_empty_class_set_rejected(self, small_snapshot):
        with pytest.raises(EmptyClassSet):
            filter_by_classes(small_snapshot, small_snapshot.display_layers[0], [], 1.0)

    def test_quantile_range_checked(self, small_snapshot):
        with pytest.raises(ValueError):
            filter_by_classes(small_snapshot, small_snapshot.display_layers[0], None, 1.5)
