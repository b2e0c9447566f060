"""End-to-end acceptance gate.

One test per release criterion, at full volume: exact seriation and packing
against brute-force enumeration, bicluster extraction against maximal
cross-product enumeration, per-class aggregation and gradients against
per-sample recomputation, the dead-ReLU diagnostic signature, incremental
interaction updates against full reassembly, and a complete document build
on a deep fixture. Budgets are wall-clock seconds on one core.
"""

from __future__ import annotations

import itertools
import time

import numpy as np
from click.testing import CliRunner

from convscope import (
    SessionState,
    apply_interaction,
    assemble,
    backward,
    emit_snapshot,
    extract_biclusters,
    finite_difference,
    forward,
    make_dataset,
    pack_cluster,
    pack_exact,
    parse_snapshot,
    random_net,
    serialize_document,
)
from convscope.bundling import ClusterEdge
from convscope.cli import main
from convscope.layout import debug_series
from convscope.modularity import similarity_matrix
from convscope.oracles import (
    best_path_exhaustive,
    biclusters_brute,
    class_mean_brute,
    min_area_brute,
    packing_violations,
)
from convscope.packing import quantize_sizes
from convscope.seriation import held_karp_order, path_objective
from convscope.tinynet import (
    ConvSpec,
    DenseSpec,
    OutputSpec,
    PoolSpec,
    ReluSpec,
    TinyNet,
    emitted_layers,
    neuron_scalars,
)


def _random_vectors(rng) -> np.ndarray:
    """A cluster's activation rows, with occasional zero and duplicate rows."""
    n = int(rng.integers(2, 10))
    d = int(rng.integers(2, 7))
    vectors = rng.normal(size=(n, d))
    if rng.random() < 0.1:
        vectors[int(rng.integers(n))] = 0.0
    if n >= 3 and rng.random() < 0.1:
        vectors[int(rng.integers(n))] = vectors[int(rng.integers(n))]
    return vectors


def _exhaustive_objective(sim: np.ndarray) -> float:
    """Best path objective over every permutation, vectorized."""
    n = sim.shape[0]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    return float(sim[perms[:, :-1], perms[:, 1:]].sum(axis=1).max())


def test_seriation_matches_exhaustive_optimum():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    # the vectorized enumerator must agree with the reference one first
    for _ in range(20):
        sim = similarity_matrix(rng.normal(size=(int(rng.integers(2, 7)), 4)))
        _, want = best_path_exhaustive(sim)
        assert abs(_exhaustive_objective(sim) - want) <= 1e-12

    for _ in range(200):
        sim = similarity_matrix(_random_vectors(rng))
        order, objective = held_karp_order(sim)
        assert abs(objective - _exhaustive_objective(sim)) <= 1e-12
        assert abs(path_objective(sim, order) - objective) <= 1e-12
    assert time.perf_counter() - t0 < 10.0


def test_packing_minimal_area_and_invariants(small_snapshot):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    for _ in range(100):
        importances = rng.uniform(0.0, 1.0, size=int(rng.integers(1, 7)))
        sides = quantize_sizes(importances)
        items = [(f"n{i}", int(s)) for i, s in enumerate(sides)]
        packing = pack_exact(items)
        assert packing.width * packing.height == min_area_brute([s for _, s in items])
        assert packing_violations(packing) == []

    layers = small_snapshot.display_layers
    n_classes = len(small_snapshot.classes)
    for _ in range(1000):
        layer = str(rng.choice(layers))
        pool = list(small_snapshot.layer_by_name[layer].neurons)
        members = list(rng.choice(pool, size=int(rng.integers(1, len(pool) + 1)),
                                  replace=False))
        classes = None
        if rng.random() < 0.3:
            k = int(rng.integers(1, n_classes + 1))
            classes = sorted(int(c) for c in rng.choice(n_classes, size=k, replace=False))
        packing = pack_cluster(
            small_snapshot, members,
            mode=str(rng.choice(["avg", "max"])),
            class_indices=classes,
            n_pack=int(rng.integers(1, 13)),
        )
        assert packing_violations(packing) == []
        assert sorted(r.neuron for r in packing.rects) == sorted(members)
    assert time.perf_counter() - t0 < 60.0


def _random_cluster_edges(rng) -> list[ClusterEdge]:
    n_left, n_right = int(rng.integers(2, 6)), int(rng.integers(2, 6))
    pairs = [(f"L{i}", f"R{j}") for i in range(n_left) for j in range(n_right)]
    rng.shuffle(pairs)
    edges = []
    for s, t in pairs[: int(rng.integers(1, 13))]:
        w_pos = float(rng.uniform(0.05, 1.0)) if rng.random() < 0.7 else 0.0
        w_neg = -float(rng.uniform(0.05, 1.0)) if rng.random() < 0.5 else 0.0
        if w_pos == 0.0 and w_neg == 0.0:
            w_pos = float(rng.uniform(0.05, 1.0))
        edges.append(
            ClusterEdge(s, t, w_pos, w_neg, int(w_pos > 0), int(w_neg < 0), ())
        )
    return edges


def test_biclusters_match_brute_force_enumeration():
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    for _ in range(200):
        edges = _random_cluster_edges(rng)
        got = {
            (b.sign, b.inputs, b.outputs, tuple(sorted(b.owned)))
            for b in extract_biclusters(edges).biclusters
        }
        want = {
            (sign, inputs, outputs, tuple(sorted(owned)))
            for sign, inputs, outputs, owned in biclusters_brute(edges)
        }
        assert got == want
    assert time.perf_counter() - t0 < 30.0


def test_class_means_match_per_sample_average():
    for seed in range(50):
        net = random_net(seed=seed)
        data = make_dataset(net, images_per_class=2, seed=seed)
        snapshot = emit_snapshot(net, data, "agg", include_gradients=False,
                                 include_prev_weights=False, include_patches=False)

        layers = emitted_layers(net)
        neuron_ids = [n for l in layers for n in l.neurons]
        per_sample = np.zeros((len(neuron_ids), len(data)))
        for j, (image, _) in enumerate(data):
            scalars = neuron_scalars(net, forward(net, image))
            per_sample[:, j] = np.concatenate([scalars[l.name] for l in layers])
        labels = np.array([label for _, label in data])
        want = class_mean_brute(per_sample, labels, len(net.classes))

        got = np.stack([snapshot.activations[n] for n in neuron_ids])
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_gradients_match_finite_differences():
    for seed in range(100, 120):
        net = random_net(seed=seed, max_weights=500)
        assert net.n_weights() <= 500
        rng = np.random.default_rng(seed)
        data = make_dataset(net, images_per_class=1, seed=seed)
        image, label = data[int(rng.integers(len(data)))]
        grads, _ = backward(net, image, label)
        numeric = finite_difference(net, image, label, h=1e-5)
        for name, g in grads.items():
            rel = np.abs(g - numeric[name]) / np.maximum.reduce(
                [np.abs(g), np.abs(numeric[name]), np.full_like(g, 1e-4)]
            )
            assert float(rel.max()) < 1e-4, name


def test_dead_relu_signature(tmp_path):
    path = tmp_path / "dead.json"
    result = CliRunner().invoke(
        main, ["gen-fixture", "--dead-relu", "--out", str(path)]
    )
    assert result.exit_code == 0
    snapshot = parse_snapshot(path.read_text())

    def zero_fraction(layer: str) -> float:
        neurons = snapshot.layer_by_name[layer].neurons
        dead = sum(1 for n in neurons if np.all(snapshot.activations[n] == 0.0))
        return dead / len(neurons)

    display = list(snapshot.display_layers)
    first_dead = next(l for l in display if zero_fraction(l) >= 0.5)
    beyond = display[display.index(first_dead) + 1:]
    assert beyond

    series = debug_series(snapshot, "avgRelChange")
    value = {entry["layer"]: entry["value"] for entry in series}
    head = series[0]["value"]
    assert head > 0.0
    for layer in beyond:
        assert value[layer] < 0.01 * head

    dead = sum(zero_fraction(l) * len(snapshot.layer_by_name[l].neurons) for l in beyond)
    total = sum(len(snapshot.layer_by_name[l].neurons) for l in beyond)
    assert dead / total >= 0.80


def test_incremental_updates_equal_full_reassembly(small_snapshot):
    rng = np.random.default_rng(17)
    for _ in range(100):
        state = SessionState.create(small_snapshot)
        for _ in range(int(rng.integers(1, 5))):
            layer = str(rng.choice(small_snapshot.display_layers))
            clustering = state.clusterings[layer]
            donor = max(clustering.clusters, key=lambda c: len(c.members))
            neuron = donor.members[int(rng.integers(len(donor.members)))]
            others = [c.id for c in clustering.clusters if c.id != donor.id] + ["new"]
            target = str(others[int(rng.integers(len(others)))])
            incremental = apply_interaction(
                state, {"type": "moveNeuron", "neuron": neuron, "target": target}
            )
            full = assemble(
                small_snapshot,
                state.params,
                state.facet_state,
                {l: state.clusterings[l] for l in state.clusterings},
            )
            assert serialize_document(incremental) == serialize_document(full)


def _deep_fixture_net(seed: int = 0) -> TinyNet:
    # three 64-channel conv groups (sides 18 -> 8 -> 3 -> 1), a 64-unit
    # hidden dense layer, and a 10-way softmax head: display layers are
    # relu1..relu4 at 64 neurons each plus the output row
    rng = np.random.default_rng(seed)
    specs = []
    in_ch, side = 1, 18
    for g, k in enumerate((3, 3, 2), start=1):
        sigma = 0.9 / np.sqrt(in_ch * k * k)
        w = rng.normal(0.0, sigma, size=(in_ch, 64, k, k))
        specs += [ConvSpec(f"conv{g}", w), ReluSpec(f"relu{g}"), PoolSpec(f"pool{g}")]
        in_ch, side = 64, (side - k + 1) // 2
    n_features = in_ch * side * side
    specs.append(DenseSpec("fc1", rng.normal(0.0, 0.9 / np.sqrt(n_features),
                                             size=(64, n_features))))
    specs.append(ReluSpec("relu4"))
    specs.append(DenseSpec("fc2", rng.normal(0.0, 0.9 / np.sqrt(64), size=(10, 64))))
    specs.append(OutputSpec("out", "softmax"))
    classes = tuple(f"c{i}" for i in range(10))
    return TinyNet((18, 18), specs, "cross-entropy", classes)


def test_deep_fixture_document_and_verify():
    net = _deep_fixture_net()
    data = make_dataset(net, images_per_class=2, seed=0)
    snapshot = emit_snapshot(net, data, "deep")
    assert snapshot.display_layers == ("relu1", "relu2", "relu3", "relu4", "out")
    assert all(len(snapshot.layer_by_name[l].neurons) == 64
               for l in snapshot.display_layers[:-1])
    assert len(snapshot.classes) == 10

    t0 = time.perf_counter()
    document = assemble(snapshot)
    raw = serialize_document(document)
    assert time.perf_counter() - t0 < 5.0

    assert set(document) == {
        "schema", "snapshot", "classes", "params", "facetState", "columns",
        "clusterNodes", "gaps", "highlight", "debugSeries",
    }
    assert document["schema"] == "layout.v1"
    assert [c["layer"] for c in document["columns"]] == list(snapshot.display_layers)
    for column in document["columns"]:
        members = [
            n for cid in column["clusters"]
            for n in document["clusterNodes"][cid]["members"]
        ]
        assert sorted(members) == sorted(snapshot.layer_by_name[column["layer"]].neurons)
    for payload in document["clusterNodes"].values():
        assert payload["packing"]["rects"]
        assert payload["matrix"]["rows"]
    assert len(document["gaps"]) == len(snapshot.display_layers) - 1
    for gap in document["gaps"]:
        assert gap["curves"] or not gap["biclusters"]
    assert document["debugSeries"] is not None
    assert raw == serialize_document(document)

    result = CliRunner().invoke(main, ["verify"])
    assert result.exit_code == 0, result.output
