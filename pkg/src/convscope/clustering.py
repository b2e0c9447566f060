"""Neuron clustering over per-class activation vectors.

Each display layer's neurons are described by their activation vector (mean
activation per class) and grouped with either k-means or flat-kernel mean
shift. Clusters expose a ranked representative list; interactive edits
(moving a neuron, resizing the representative view) produce new clustering
values, leaving the old ones untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CountUnderflow,
    EmptyClass,
    EmptyClassSet,
    InvalidK,
    NonPositiveBandwidth,
    UnknownNeuron,
    UnknownTargetCluster,
)
from .snapshot import NetworkSnapshot


def average_activation(
    per_sample: np.ndarray, class_of: np.ndarray, n_classes: int
) -> np.ndarray:
    """Per-class means of per-sample neuron activations.

    `per_sample` is (n_neurons, n_samples); the result is
    (n_neurons, n_classes). numpy's pairwise summation keeps the means
    deterministic for a fixed sample order.
    """
    per_sample = np.asarray(per_sample, dtype=np.float64)
    class_of = np.asarray(class_of)
    out = np.zeros((per_sample.shape[0], n_classes))
    for c in range(n_classes):
        mask = class_of == c
        if not np.any(mask):
            raise EmptyClass(f"class index {c} has no samples")
        out[:, c] = per_sample[:, mask].mean(axis=1)
    return out


def default_k(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n / 2.0)))


def kmeans(
    vectors: np.ndarray, k: int, seed: int = 0, max_iter: int = 300
) -> tuple[np.ndarray, float, list[float]]:
    """Lloyd's algorithm with k-means++ seeding.

    Returns (labels, sse, sse_history). Deterministic for a given seed;
    assignment ties go to the lowest center index; an emptied cluster is
    reseeded at the point farthest from its current center.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside [1, {n}]")
    rng = np.random.default_rng(seed)

    centers = np.empty((k, vectors.shape[1]))
    centers[0] = vectors[int(rng.integers(n))]
    d2 = ((vectors - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass is on already-chosen points
            idx = int(np.argmax(d2 == d2.max()))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = vectors[idx]
        d2 = np.minimum(d2, ((vectors - centers[j]) ** 2).sum(axis=1))

    labels = np.full(n, -1)
    history: list[float] = []
    for _ in range(max_iter):
        dist2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist2.argmin(axis=1)
        for j in range(k):
            if not np.any(new_labels == j):
                # reseed the empty cluster at the worst-served point
                worst = int(np.argmax(dist2[np.arange(n), new_labels]))
                centers[j] = vectors[worst]
                new_labels[worst] = j
                dist2[worst] = ((vectors[worst] - centers) ** 2).sum(axis=1)
        history.append(float(dist2[np.arange(n), new_labels].sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centers[j] = vectors[labels == j].mean(axis=0)
    sse = float(((vectors - centers[labels]) ** 2).sum())
    return labels, sse, history


def median_pairwise_distance(vectors: np.ndarray) -> float:
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if n < 2:
        return 1.0
    dists = np.sqrt(((vectors[:, None, :] - vectors[None, :, :]) ** 2).sum(axis=2))
    iu = np.triu_indices(n, k=1)
    return float(np.median(dists[iu]))


def meanshift(
    vectors: np.ndarray, bandwidth: float | None = None, max_iter: int = 500, tol: float = 1e-7
) -> np.ndarray:
    """Flat-kernel mean shift; modes within bandwidth/2 merge into one label.

    The default bandwidth is the median pairwise distance (falling back to
    the smallest positive distance when the median degenerates to zero).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    if bandwidth is None:
        bandwidth = median_pairwise_distance(vectors)
        if bandwidth <= 0.0:
            dists = np.sqrt(((vectors[:, None, :] - vectors[None, :, :]) ** 2).sum(axis=2))
            positive = dists[dists > 0.0]
            if positive.size == 0:
                return np.zeros(n, dtype=int)  # all points identical
            bandwidth = float(positive.min())
    if bandwidth <= 0.0:
        raise NonPositiveBandwidth(f"bandwidth must be > 0, got {bandwidth}")

    modes = vectors.copy()
    for _ in range(max_iter):
        dist2 = ((modes[:, None, :] - vectors[None, :, :]) ** 2).sum(axis=2)
        within = dist2 <= bandwidth * bandwidth
        new_modes = np.stack([vectors[w].mean(axis=0) for w in within])
        shift = np.sqrt(((new_modes - modes) ** 2).sum(axis=1)).max()
        modes = new_modes
        if shift < tol:
            break

    labels = np.full(n, -1, dtype=int)
    centers: list[np.ndarray] = []
    half = bandwidth / 2.0
    for i in range(n):
        for c, center in enumerate(centers):
            if np.sqrt(((modes[i] - center) ** 2).sum()) <= half:
                labels[i] = c
                break
        else:
            centers.append(modes[i])
            labels[i] = len(centers) - 1
    return labels


@dataclass(frozen=True)
class NeuronCluster:
    id: str
    members: tuple[str, ...]          # sorted by layer position
    representatives: tuple[str, ...]  # ranked by distance to centroid
    centroid: tuple[float, ...]
    repr_count: int


@dataclass(frozen=True)
class LayerClustering:
    layer: str
    clusters: tuple[NeuronCluster, ...]
    next_index: int
    default_repr_count: int


def select_representatives(
    members: list[str], vectors: dict[str, np.ndarray], centroid: np.ndarray,
    count: int,
) -> tuple[str, ...]:
    """Members closest to the centroid, equidistant ones by lower id."""
    ranked = sorted(
        members,
        key=lambda m: (float(((vectors[m] - centroid) ** 2).sum()), m),
    )
    return tuple(ranked[: max(0, count)])


def _build_cluster(
    cid: str, members: list[str], vectors: dict[str, np.ndarray],
    repr_count: int, order_of: dict[str, int],
) -> NeuronCluster:
    members = sorted(members, key=lambda m: order_of[m])
    centroid = np.mean([vectors[m] for m in members], axis=0)
    count = min(repr_count, len(members))
    reps = select_representatives(members, vectors, centroid, count)
    return NeuronCluster(cid, tuple(members), reps, tuple(float(v) for v in centroid), count)


def cluster_layer(
    snapshot: NetworkSnapshot,
    layer_name: str,
    method: str = "meanshift",
    k: int | None = None,
    bandwidth: float | None = None,
    seed: int = 0,
    repr_count: int = 9,
) -> LayerClustering:
    """Cluster one display layer's neurons by activation vector."""
    layer = snapshot.layer_by_name[layer_name]
    matrix = snapshot.activation_matrix(layer_name)
    n = len(layer.neurons)
    if method == "kmeans":
        kk = k if k is not None else default_k(n)
        labels, _, _ = kmeans(matrix, kk, seed=seed)
    elif method == "meanshift":
        labels = meanshift(matrix, bandwidth)
    else:
        raise ValueError(f"unknown clustering method {method!r}")

    order_of = {nid: i for i, nid in enumerate(layer.neurons)}
    vectors = {nid: matrix[i] for i, nid in enumerate(layer.neurons)}
    by_label: dict[int, list[str]] = {}
    for nid, lab in zip(layer.neurons, labels):
        by_label.setdefault(int(lab), []).append(nid)
    groups = sorted(by_label.values(), key=lambda ms: min(order_of[m] for m in ms))
    clusters = tuple(
        _build_cluster(f"{layer_name}/c{i}", ms, vectors, repr_count, order_of)
        for i, ms in enumerate(groups)
    )
    return LayerClustering(layer_name, clusters, len(groups), repr_count)


def _layer_vectors(snapshot: NetworkSnapshot, layer_name: str):
    layer = snapshot.layer_by_name[layer_name]
    matrix = snapshot.activation_matrix(layer_name)
    order_of = {nid: i for i, nid in enumerate(layer.neurons)}
    vectors = {nid: matrix[i] for i, nid in enumerate(layer.neurons)}
    return order_of, vectors


def move_neuron(
    snapshot: NetworkSnapshot,
    clustering: LayerClustering,
    neuron: str,
    target: str,
) -> LayerClustering:
    """Move a neuron to another cluster or to a fresh one (target 'new').

    Only the affected clusters' centroids and representatives are
    recomputed; an emptied source cluster disappears.
    """
    order_of, vectors = _layer_vectors(snapshot, clustering.layer)
    if neuron not in order_of:
        raise UnknownNeuron(f"neuron {neuron!r} is not in layer {clustering.layer!r}")
    source = next((c for c in clustering.clusters if neuron in c.members), None)
    if source is None:
        raise UnknownNeuron(f"neuron {neuron!r} has no cluster in layer {clustering.layer!r}")

    next_index = clustering.next_index
    if target == "new":
        target_id = f"{clustering.layer}/c{next_index}"
        next_index += 1
        target_members: list[str] = []
        target_repr = clustering.default_repr_count
    else:
        tc = next((c for c in clustering.clusters if c.id == target), None)
        if tc is None:
            raise UnknownTargetCluster(f"no cluster {target!r} in layer {clustering.layer!r}")
        if tc.id == source.id:
            return replace(clustering)
        target_id = tc.id
        target_members = list(tc.members)
        target_repr = tc.repr_count

    new_clusters: list[NeuronCluster] = []
    for c in clustering.clusters:
        if c.id == source.id:
            remaining = [m for m in c.members if m != neuron]
            if remaining:
                new_clusters.append(
                    _build_cluster(c.id, remaining, vectors, c.repr_count, order_of)
                )
        elif c.id == target_id:
            new_clusters.append(
                _build_cluster(c.id, target_members + [neuron], vectors, c.repr_count, order_of)
            )
        else:
            new_clusters.append(c)
    if target == "new":
        new_clusters.append(
            _build_cluster(target_id, [neuron], vectors, target_repr, order_of)
        )
    return LayerClustering(
        clustering.layer, tuple(new_clusters), next_index, clustering.default_repr_count
    )


def filter_by_classes(
    snapshot: NetworkSnapshot,
    layer_name: str,
    class_indices: list[int] | None,
    quantile: float = 1.0,
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Split a layer's neurons into (highlighted, translucent).

    A neuron's score is its maximum activation over the selected classes;
    the top ceil(q * n) scores stay highlighted, ties included. q = 1 keeps
    everything, q -> 0 keeps only the argmax neurons.
    """
    layer = snapshot.layer_by_name[layer_name]
    matrix = snapshot.activation_matrix(layer_name)
    if class_indices is None:
        class_indices = list(range(len(snapshot.classes)))
    if len(class_indices) == 0:
        raise EmptyClassSet("class selection is empty")
    if not 0.0 <= quantile <= 1.0:
        raise ValueError(f"quantile must be in [0, 1], got {quantile}")
    scores = matrix[:, class_indices].max(axis=1)
    n = len(layer.neurons)
    keep = max(1, math.ceil(quantile * n))
    threshold = np.sort(scores)[::-1][keep - 1]
    highlighted = tuple(nid for nid, s in zip(layer.neurons, scores) if s >= threshold)
    translucent = tuple(nid for nid, s in zip(layer.neurons, scores) if s < threshold)
    return highlighted, translucent


def resize_cluster_view(
    snapshot: NetworkSnapshot, clustering: LayerClustering, cluster_id: str, count: int
) -> LayerClustering:
    """Set a cluster's representative count; clamped to the member count."""
    _, vectors = _layer_vectors(snapshot, clustering.layer)
    tc = next((c for c in clustering.clusters if c.id == cluster_id), None)
    if tc is None:
        raise UnknownTargetCluster(f"no cluster {cluster_id!r} in layer {clustering.layer!r}")
    if count < 1:
        raise CountUnderflow(f"representative count must be >= 1, got {count}")
    count = min(count, len(tc.members))
    centroid = np.asarray(tc.centroid)
    reps = select_representatives(list(tc.members), vectors, centroid, count)
    new_cluster = replace(tc, representatives=reps, repr_count=count)
    clusters = tuple(new_cluster if c.id == cluster_id else c for c in clustering.clusters)
    return replace(clustering, clusters=clusters)
