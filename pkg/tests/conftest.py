"""Shared fixtures for the test suite.

Snapshots are built once per session from seeded fixture nets; individual
tests treat them as read-only. Hand-built two-display-layer snapshots (for
edge-level tests) are constructed per test via `two_layer_snapshot`.
"""

from __future__ import annotations

import numpy as np
import pytest

from convscope import (
    NetworkSnapshot,
    emit_snapshot,
    fixture_net,
    make_dataset,
    parse_snapshot,
)
from convscope.clustering import LayerClustering, NeuronCluster


@pytest.fixture(scope="session")
def small_snapshot() -> NetworkSnapshot:
    """Two conv groups, 3 classes, ~70 neurons; fast enough for every test."""
    net = fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)
    data = make_dataset(net, images_per_class=3, seed=1)
    return emit_snapshot(net, data, "test-small")


@pytest.fixture(scope="session")
def hinge_snapshot() -> NetworkSnapshot:
    net = fixture_net(seed=5, conv_channels=(4,), input_side=8, n_classes=2, loss="hinge")
    data = make_dataset(net, images_per_class=3, seed=5)
    return emit_snapshot(net, data, "test-hinge")


def two_layer_snapshot(
    edge_weights: dict[tuple[int, int], float],
    n_left: int,
    n_right: int,
    seed: int = 11,
) -> NetworkSnapshot:
    """Hand-built snapshot with display layers L* -> R* and explicit weights."""
    left = [f"L{i}" for i in range(n_left)]
    right = [f"R{i}" for i in range(n_right)]
    rng = np.random.default_rng(seed)
    acts = {n: [float(abs(v)) for v in rng.normal(1.0, 0.5, size=2)] for n in left + right}
    doc = {
        "version": 1,
        "id": "two-layer",
        "classes": ["a", "b"],
        "layers": [
            {"name": "conv1", "kind": "conv", "neurons": [f"p{i}" for i in range(n_left)]},
            {"name": "relu1", "kind": "activation", "neurons": left},
            {"name": "fc1", "kind": "fully-connected", "neurons": right},
        ],
        "edges": [
            {"id": f"e{i}:{j}", "source": left[i], "target": right[j], "weight": w}
            for (i, j), w in sorted(edge_weights.items())
        ],
        "activations": [
            {"layer": "conv1", "neurons": [f"p{i}" for i in range(n_left)],
             "values": [acts[left[i]] for i in range(n_left)]},
            {"layer": "relu1", "neurons": left, "values": [acts[n] for n in left]},
            {"layer": "fc1", "neurons": right, "values": [acts[n] for n in right]},
        ],
    }
    return parse_snapshot(doc)


def singleton_clustering(layer: str, neurons: list[str], snapshot) -> LayerClustering:
    """One cluster per neuron, in the given order."""
    clusters = []
    for i, n in enumerate(neurons):
        vec = tuple(float(v) for v in snapshot.activations[n])
        clusters.append(NeuronCluster(f"{layer}/c{i}", (n,), (n,), vec, 1))
    return LayerClustering(layer, tuple(clusters), len(clusters), 9)
