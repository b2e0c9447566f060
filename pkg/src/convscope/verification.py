"""Cross-check suite behind the `verify` CLI command.

Each check pits one computed result against an independent oracle from
`oracles` (or a hand-derived expected value) and raises AssertionError on
disagreement. The suite is the fast in-process variant of the test suite's
acceptance runs; volumes are kept small so the whole list finishes in
seconds.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import oracles, packing, seriation, tinynet
from .bundling import ClusterEdge, aggregate_connections, edge_facet, extract_biclusters
from .clustering import (
    NeuronCluster,
    LayerClustering,
    average_activation,
    cluster_layer,
    filter_by_classes,
    kmeans,
    meanshift,
    move_neuron,
    resize_cluster_view,
    select_representatives,
)
from .layout import (
    Assembler,
    FacetState,
    LayoutParams,
    SessionState,
    apply_interaction,
    assemble,
    debug_series,
    initial_clusterings,
    serialize_document,
)
from .modularity import split_tree
from .snapshot import parse_snapshot, serialize_snapshot
from .server import Session


# --- shared fixtures ---------------------------------------------------------


@lru_cache(maxsize=None)
def _small_net():
    return tinynet.fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)


@lru_cache(maxsize=None)
def _small_snapshot():
    net = _small_net()
    data = tinynet.make_dataset(net, images_per_class=3, seed=1)
    return tinynet.emit_snapshot(net, data, "verify-small")


@lru_cache(maxsize=None)
def _dead_snapshot():
    net = tinynet.dead_relu_net(seed=0)
    data = tinynet.make_dataset(net, images_per_class=4, seed=2)
    return tinynet.emit_snapshot(net, data, "verify-dead")


def two_layer_snapshot(edge_weights: dict[tuple[int, int], float], n_left: int, n_right: int):
    """Hand-built two-display-layer snapshot for edge-level checks."""
    left = [f"L{i}" for i in range(n_left)]
    right = [f"R{i}" for i in range(n_right)]
    rng = np.random.default_rng(11)
    acts = {}
    for i, n in enumerate(left + right):
        acts[n] = [float(abs(v)) for v in rng.normal(1.0, 0.5, size=2)]
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


def _singleton_clustering(layer: str, neurons: list[str], snapshot) -> LayerClustering:
    clusters = []
    for i, n in enumerate(neurons):
        vec = tuple(float(v) for v in snapshot.activations[n])
        clusters.append(NeuronCluster(f"{layer}/c{i}", (n,), (n,), vec, 1))
    return LayerClustering(layer, tuple(clusters), len(clusters), 9)


# --- snapshot-core -----------------------------------------------------------


def check_snapshot_roundtrip():
    snap = _small_snapshot()
    again = parse_snapshot(serialize_snapshot(snap))
    assert again == snap, "parse(serialize(s)) differs from s"
    # the terminal fully-connected + output pair must merge into one group
    last = snap.groups[-1]
    assert last.member_layers[-1] == "out" and last.display_layer == "out"


# --- fixture-cnn -------------------------------------------------------------


def check_conv_brute():
    rng = np.random.default_rng(5)
    grid = rng.normal(size=(6, 6))
    window = rng.normal(size=(3, 3))
    got = tinynet.convolve(grid, window)
    want = oracles.conv_valid_brute(grid[None], window[None, None])[0]
    assert np.abs(got - want).max() < 1e-12, "convolve deviates from per-pixel sums"

    net = _small_net()
    img = rng.uniform(0.0, 1.0, size=net.input_shape)
    outputs = tinynet.forward(net, img)
    conv = net.specs[0]
    want = oracles.conv_valid_brute(img[None], conv.weights.transpose(1, 0, 2, 3))
    assert np.abs(outputs[conv.name] - want).max() < 1e-12, "multi-channel conv deviates"


def check_pool_brute():
    rng = np.random.default_rng(6)
    grid = rng.normal(size=(3, 8, 8))
    got = tinynet.max_pool(grid)
    want = oracles.max_pool_brute(grid, 2)
    assert np.array_equal(got, want), "max_pool deviates from window maxima"


def _max_rel_err(a: np.ndarray, b: np.ndarray, floor: float = 1e-4) -> float:
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / scale).max())


def check_softmax_gradient_fd():
    net = _small_net()
    rng = np.random.default_rng(7)
    img = rng.uniform(0.0, 1.0, size=net.input_shape)
    grads, _ = tinynet.backward(net, img, label=1)
    fd = tinynet.finite_difference(net, img, label=1, h=1e-6)
    worst = max(_max_rel_err(grads[k], fd[k]) for k in fd)
    assert worst < 1e-4, f"analytic vs central-difference gradients: rel err {worst}"


def check_hand_one_layer():
    w = np.ones((1, 1, 1, 1))
    specs = [
        tinynet.ConvSpec("conv1", w),
        tinynet.ReluSpec("relu1"),
        tinynet.PoolSpec("pool1"),
        tinynet.DenseSpec("fc1", np.array([[2.0]])),
        tinynet.OutputSpec("out", "identity"),
    ]
    net = tinynet.TinyNet((2, 2), specs, "hinge", ("c0", "c1"))
    img = np.array([[1.0, 2.0], [3.0, 4.0]])
    outputs = tinynet.forward(net, img)
    # identity 1x1 conv keeps the image; pooling takes the 4-cell max
    assert np.array_equal(outputs["conv1"][0], img)
    assert float(outputs["pool1"][0, 0, 0]) == 4.0
    assert float(outputs["out"][0]) == 8.0
    assert tinynet.loss_value(net, img, 0) == 0.0  # margin 8 >= 1
    assert tinynet.loss_value(net, img, 1) == 9.0  # 1 - (-1)*8


def check_dense_fd():
    rng = np.random.default_rng(8)
    specs = [
        tinynet.DenseSpec("fc1", rng.normal(0.0, 0.7, size=(5, 6))),
        tinynet.ReluSpec("relu_fc1"),
        tinynet.DenseSpec("fc2", rng.normal(0.0, 0.7, size=(3, 5))),
        tinynet.OutputSpec("out", "softmax"),
    ]
    net = tinynet.TinyNet((2, 3), specs, "cross-entropy", ("a", "b", "c"))
    img = rng.uniform(0.2, 1.0, size=(2, 3))
    grads, _ = tinynet.backward(net, img, label=2)
    fd = tinynet.finite_difference(net, img, label=2, h=1e-5)
    worst = max(_max_rel_err(grads[k], fd[k]) for k in fd)
    assert worst < 1e-4, f"dense-net gradients vs finite differences: rel err {worst}"


# --- cluster-engine ----------------------------------------------------------


def check_class_mean_brute():
    rng = np.random.default_rng(9)
    table = rng.normal(size=(7, 12))
    class_of = rng.integers(0, 3, size=12)
    for c in range(3):
        if not np.any(class_of == c):
            class_of[c] = c
    got = average_activation(table, class_of, 3)
    want = oracles.class_mean_brute(table, class_of, 3)
    assert np.abs(got - want).max() < 1e-12, "per-class means deviate from double loop"


def check_kmeans_exhaustive():
    vectors = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.9]])
    labels, sse, history = kmeans(vectors, 2, seed=0)
    best_sse, best_groups = oracles.best_partition_sse(vectors, 2)
    got_groups = tuple(
        sorted((frozenset(np.flatnonzero(labels == g)) for g in set(labels)), key=min)
    )
    assert got_groups == best_groups, f"partition {got_groups} is not SSE-optimal"
    assert abs(sse - best_sse) < 1e-12
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:])), "SSE increased"


def check_meanshift_modes():
    vectors = np.array([[0.0], [0.1], [10.0], [10.1]])
    labels = meanshift(vectors, bandwidth=1.0)
    assert labels[0] == labels[1] and labels[2] == labels[3] and labels[0] != labels[2]
    assert len(set(labels.tolist())) == 2


def check_representatives_oracle():
    rng = np.random.default_rng(10)
    members = [f"n{i}" for i in range(12)]
    vectors = {m: rng.normal(size=4) for m in members}
    centroid = np.mean(list(vectors.values()), axis=0)
    got = select_representatives(members, vectors, centroid, 5)
    ranked = sorted(members, key=lambda m: (float(((vectors[m] - centroid) ** 2).sum()), m))
    assert got == tuple(ranked[:5]), "representative prefix deviates from full sort"


def check_move_centroid():
    snap = _small_snapshot()
    layer = snap.display_layers[0]
    clustering = cluster_layer(snap, layer, method="kmeans", k=2, seed=0)
    neuron = clustering.clusters[0].members[0]
    target = clustering.clusters[1].id
    moved = move_neuron(snap, clustering, neuron, target)
    tc = next(c for c in moved.clusters if c.id == target)
    want = np.mean([snap.activations[m] for m in tc.members], axis=0)
    assert np.abs(np.asarray(tc.centroid) - want).max() < 1e-12, "moved centroid is off"
    total = sum(len(c.members) for c in moved.clusters)
    assert total == sum(len(c.members) for c in clustering.clusters)


def check_filter_oracle():
    snap = _small_snapshot()
    layer = snap.display_layers[0]
    hi, lo = filter_by_classes(snap, layer, [0, 2], quantile=0.4)
    matrix = snap.activation_matrix(layer)
    neurons = snap.layer_by_name[layer].neurons
    scores = {n: max(matrix[i][0], matrix[i][2]) for i, n in enumerate(neurons)}
    keep = max(1, math.ceil(0.4 * len(neurons)))
    cut = sorted(scores.values(), reverse=True)[keep - 1]
    want_hi = {n for n in neurons if scores[n] >= cut}
    assert set(hi) == want_hi and set(lo) == set(neurons) - want_hi


def check_resize_prefix():
    snap = _small_snapshot()
    layer = snap.display_layers[0]
    clustering = cluster_layer(snap, layer, method="kmeans", k=1, seed=0)
    cid = clustering.clusters[0].id
    grown = resize_cluster_view(snap, clustering, cid, 6)
    shrunk = resize_cluster_view(snap, grown, cid, 3)
    a = next(c for c in grown.clusters if c.id == cid).representatives
    b = next(c for c in shrunk.clusters if c.id == cid).representatives
    assert b == a[:3], "shrunken representative list is not a prefix"


# --- rect-pack ---------------------------------------------------------------


def check_quantize_monotone():
    rng = np.random.default_rng(12)
    for _ in range(20):
        imp = rng.uniform(0.0, 5.0, size=rng.integers(1, 15))
        sides = packing.quantize_sizes(imp)
        for i in range(len(imp)):
            for j in range(len(imp)):
                if imp[i] > imp[j]:
                    assert sides[i] >= sides[j], "importance order violated by sizes"


def check_split_blobs():
    rng = np.random.default_rng(13)
    blob_a = rng.normal(0.0, 0.01, size=(3, 3)) + np.array([1.0, 0.0, 0.0])
    blob_b = rng.normal(0.0, 0.01, size=(3, 3)) + np.array([0.0, 1.0, 0.0])
    vectors = np.vstack([blob_a, blob_b])
    tree = split_tree(tuple(range(6)), vectors, threshold=4)
    leaves = [set(leaf.members) for leaf in tree.leaves()]
    assert {0, 1, 2} in leaves and {3, 4, 5} in leaves, f"blobs were split as {leaves}"


def check_treemap_tiling():
    rng = np.random.default_rng(14)
    snap = _small_snapshot()
    layer = snap.display_layers[0]
    neurons = list(snap.layer_by_name[layer].neurons)
    for trial in range(5):
        chosen = [neurons[i] for i in rng.permutation(len(neurons))]
        packed = packing.pack_cluster(snap, chosen, n_pack=3)
        assert not oracles.packing_violations(packed), "pack_cluster geometry defect"


def check_pack_exact_brute():
    rng = np.random.default_rng(15)
    for _ in range(8):
        sides = [int(s) for s in rng.integers(1, 4, size=rng.integers(1, 7))]
        items = [(f"n{i}", s) for i, s in enumerate(sides)]
        packed = packing.pack_exact(items)
        want = oracles.min_area_brute(sides)
        got = packed.width * packed.height
        assert got == want, f"area {got} vs brute-force {want} for sides {sides}"
        assert not oracles.packing_violations(packed)


def check_pack_forty():
    snap = _big_snapshot()
    layer = snap.display_layers[0]
    neurons = list(snap.layer_by_name[layer].neurons)[:40]
    packed = packing.pack_cluster(snap, neurons)
    assert not oracles.packing_violations(packed), "40-patch packing has defects"


@lru_cache(maxsize=None)
def _big_snapshot():
    net = tinynet.fixture_net(seed=4, conv_channels=(48, 16), input_side=14, n_classes=4)
    data = tinynet.make_dataset(net, images_per_class=3, seed=3)
    return tinynet.emit_snapshot(net, data, "verify-big")


# --- matrix-order ------------------------------------------------------------


def check_held_karp_hand():
    sim = np.array([[0.0, 0.9, 0.1], [0.9, 0.0, 0.8], [0.1, 0.8, 0.0]])
    order, objective = seriation.held_karp_order(sim)
    assert list(order) == [0, 1, 2], f"order {order}"
    assert abs(objective - 1.7) < 1e-12


def check_held_karp_exhaustive():
    rng = np.random.default_rng(16)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        sim = rng.uniform(0.0, 1.0, size=(n, n))
        sim = (sim + sim.T) / 2.0
        np.fill_diagonal(sim, 0.0)
        _, got = seriation.held_karp_order(sim)
        _, want = oracles.best_path_exhaustive(sim)
        assert abs(got - want) < 1e-12, f"objective {got} vs exhaustive {want}"


def check_dnc_junction():
    angles = np.deg2rad([0, 5, 10, 60, 65, 70])
    vectors = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    order, got = seriation.dnc_order(vectors, hk_limit=3)
    sims = vectors @ vectors.T
    np.fill_diagonal(sims, 0.0)
    _, want = oracles.best_path_exhaustive(sims)
    assert abs(got - want) < 1e-12, f"junction pick lost value: {got} vs {want}"


def check_dnc_beats_input_order():
    rng = np.random.default_rng(17)
    for _ in range(5):
        vectors = rng.normal(size=(12, 4))
        order, got = seriation.dnc_order(vectors, hk_limit=6)
        from .modularity import similarity_matrix

        sims = similarity_matrix(vectors)
        np.fill_diagonal(sims, 0.0)
        base = seriation.path_objective(sims, list(range(12)))
        assert got >= base - 1e-12, "ordered objective below the input order"


def check_matrix_cells():
    snap = _small_snapshot()
    layer = snap.display_layers[0]
    members = list(snap.layer_by_name[layer].neurons)
    matrix = seriation.build_matrix(snap, members)
    rng = np.random.default_rng(18)
    for _ in range(10):
        i = int(rng.integers(0, len(matrix.rows)))
        j = int(rng.integers(0, len(matrix.cols)))
        assert matrix.values[i][j] == float(snap.activations[matrix.rows[i]][j])


# --- edge-bicluster ----------------------------------------------------------


def check_aggregate_means():
    rng = np.random.default_rng(19)
    weights = {}
    for i in range(4):
        for j in range(3):
            if rng.random() < 0.8:
                w = float(rng.normal())
                weights[(i, j)] = 0.0 if rng.random() < 0.15 else w
    snap = two_layer_snapshot(weights, 4, 3)
    left = _singleton_clustering("relu1", [f"L{i}" for i in range(4)], snap)
    right = _singleton_clustering("fc1", [f"R{j}" for j in range(3)], snap)
    got = aggregate_connections(snap, 0, left, right)
    rows = [(f"relu1/c{i}", f"fc1/c{j}", w) for (i, j), w in weights.items()]
    want = oracles.group_mean_brute(rows)
    assert len(got) == len(want)
    for e in got:
        w_pos, w_neg, n_pos, n_neg = want[(e.source, e.target)]
        assert abs(e.w_pos - w_pos) < 1e-12 and abs(e.w_neg - w_neg) < 1e-12
        assert (e.n_pos, e.n_neg) == (n_pos, n_neg)


def check_bicluster_hand():
    edges = [
        ClusterEdge("A", "X", 0.5, 0.0, 1, 0, ("e1",)),
        ClusterEdge("A", "Y", 0.5, 0.0, 1, 0, ("e2",)),
        ClusterEdge("B", "X", 0.5, 0.0, 1, 0, ("e3",)),
        ClusterEdge("B", "Y", 0.5, 0.0, 1, 0, ("e4",)),
    ]
    bundle = extract_biclusters(edges, tau=0.1)
    assert len(bundle.biclusters) == 1
    b = bundle.biclusters[0]
    assert b.inputs == ("A", "B") and b.outputs == ("X", "Y") and b.sign == "positive"
    want = oracles.biclusters_brute(edges, tau=0.1)
    got = [(b.sign, b.inputs, b.outputs, b.owned) for b in bundle.biclusters]
    assert got == want, f"{got} vs brute-force {want}"


def check_gradient_facet():
    snap = _small_snapshot()
    per_edge = _recomputed_edge_gradients()
    for gap in range(len(snap.gap_edges)):
        got = edge_facet(snap, gap, "gradient")
        for e in snap.gap_edges[gap]:
            assert abs(got[e.id] - abs(per_edge[e.id])) < 1e-9, f"gradient facet off at {e.id}"


@lru_cache(maxsize=None)
def _recomputed_edge_gradients() -> dict[str, float]:
    """Per-edge mean loss gradients rebuilt with plain loops."""
    net = _small_net()
    data = tinynet.make_dataset(net, images_per_class=3, seed=1)
    sums: dict[str, np.ndarray] = {}
    for img, label in data:
        grads, _ = tinynet.backward(net, img, label)
        for name, g in grads.items():
            sums[name] = sums.get(name, 0.0) + g
    means = {name: g / len(data) for name, g in sums.items()}

    snap = _small_snapshot()
    out: dict[str, float] = {}
    for gap, edges in enumerate(snap.gap_edges):
        for e in edges:
            parts = e.id.split(":")
            i, o = int(parts[1]), int(parts[2])
            g = means[_gap_weighted_layer(net, snap, gap)]
            if g.ndim == 4:
                out[e.id] = float(g[i, o].mean())
            else:
                block = _dense_block(net, snap, gap, g)
                out[e.id] = float(block[i, o])
    return out


def _gap_weighted_layer(net, snap, gap: int) -> str:
    target_display = snap.display_layers[gap + 1]
    group = snap.groups[gap + 1]
    by_name = {s.name: s for s in net.specs}
    for name in group.member_layers:
        spec = by_name.get(name)
        if spec is not None and getattr(spec, "kind", None) in ("conv", "fully-connected"):
            return name
    raise AssertionError(f"no weighted layer feeds {target_display}")


def _dense_block(net, snap, gap: int, g: np.ndarray) -> np.ndarray:
    # (out_units, in_features) -> per (source neuron, target unit) means over
    # each source channel's spatial positions
    n_src = len(snap.layer_by_name[snap.display_layers[gap]].neurons)
    per_channel = g.reshape(g.shape[0], n_src, -1).mean(axis=2)
    return per_channel.T


def check_debug_series_brute():
    snap = _small_snapshot()
    per_edge = _recomputed_edge_gradients()
    series = debug_series(snap, "avgGradient")
    for gap, entry in enumerate(series):
        edges = snap.gap_edges[gap]
        want = sum(abs(per_edge[e.id]) for e in edges) / len(edges)
        assert abs(entry["value"] - want) < 1e-9, f"series at {entry['layer']} is off"


# --- layout ------------------------------------------------------------------


def check_barycenter_uncrossing():
    weights = {(0, 1): 1.0, (1, 0): 1.0}
    snap = two_layer_snapshot(weights, 2, 2)
    left = _singleton_clustering("relu1", ["L0", "L1"], snap)
    right = _singleton_clustering("fc1", ["R0", "R1"], snap)
    assembler = Assembler(snap)
    order = assembler._vertical_order({"relu1": left, "fc1": right})
    edges = [("relu1/c0", "fc1/c1"), ("relu1/c1", "fc1/c0")]
    before = oracles.crossing_count(
        edges, {"relu1/c0": 0, "relu1/c1": 1}, {"fc1/c0": 0, "fc1/c1": 1}
    )
    left_pos = {cid: i for i, cid in enumerate(order["relu1"])}
    right_pos = {cid: i for i, cid in enumerate(order["fc1"])}
    after = oracles.crossing_count(edges, left_pos, right_pos)
    assert before == 1 and after == 0, f"sweep left {after} crossings"


def check_dead_relu_series():
    snap = _dead_snapshot()
    series = debug_series(snap, "avgRelChange")
    values = [entry["value"] for entry in series]
    zero_fraction = _zero_fractions(snap)
    dead_layers = [layer for layer, frac in zero_fraction.items() if frac >= 0.5]
    assert dead_layers, "construction produced no mostly-dead display layer"
    first_dead = min(snap.display_index(layer) for layer in dead_layers)
    beyond = [v for entry, v in zip(series, values) if snap.display_index(entry["layer"]) > first_dead]
    assert beyond, "no display layers beyond the first dead one"
    assert all(v < 0.01 * values[0] for v in beyond), (
        f"relative-change series did not collapse: {values} (first dead index {first_dead})"
    )
    pooled = [
        frac
        for layer, frac in zero_fraction.items()
        if snap.display_index(layer) > first_dead
    ]
    neurons_beyond = sum(
        len(snap.layer_by_name[layer].neurons)
        for layer in zero_fraction
        if snap.display_index(layer) > first_dead
    )
    zeros_beyond = sum(
        frac * len(snap.layer_by_name[layer].neurons)
        for layer, frac in zero_fraction.items()
        if snap.display_index(layer) > first_dead
    )
    assert zeros_beyond / neurons_beyond >= 0.8, (
        f"only {zeros_beyond / neurons_beyond:.2%} of deep neurons are silent"
    )


def _zero_fractions(snap) -> dict[str, float]:
    out = {}
    for layer in snap.display_layers:
        matrix = snap.activation_matrix(layer)
        out[layer] = float(np.mean(np.all(matrix == 0.0, axis=1)))
    return out


def check_incremental_equals_full():
    snap = _small_snapshot()
    state = SessionState.create(snap)
    layer = snap.display_layers[0]
    clustering = state.clusterings[layer]
    neuron = clustering.clusters[0].members[0]
    doc_inc = apply_interaction(
        state, {"type": "moveNeuron", "neuron": neuron, "target": "new"}
    )
    doc_full = assemble(snap, state.params, state.facet_state, clusterings=state.clusterings)
    assert serialize_document(doc_inc) == serialize_document(doc_full), (
        "incremental document deviates from full reassembly"
    )


def check_undo_replay():
    snap = _small_snapshot()
    session = Session("verify", snap.id, snap)
    before = serialize_document(session.state.document())
    layer = snap.display_layers[0]
    neuron = session.state.clusterings[layer].clusters[0].members[0]
    session.apply({"type": "moveNeuron", "neuron": neuron, "target": "new"})
    session.undo()
    after = serialize_document(session.state.document())
    assert session.version == 2, f"version {session.version} after command + undo"
    assert before == after, "undo did not restore the previous document"


def check_golden_layout():
    from importlib import resources

    snap = golden_snapshot()
    doc = assemble(snap)
    got = serialize_document(doc)
    ref = resources.files("convscope").joinpath("golden/layout_fixture.json")
    want = ref.read_bytes()
    assert got == want, "fixture layout deviates from the golden document"


@lru_cache(maxsize=None)
def golden_snapshot():
    net = tinynet.fixture_net(seed=7, conv_channels=(8, 8), input_side=10, n_classes=4)
    data = tinynet.make_dataset(net, images_per_class=3, seed=7)
    return tinynet.emit_snapshot(net, data, "golden", patch_pixels=True)


def check_assemble_deterministic():
    snap = _small_snapshot()
    a = serialize_document(assemble(snap))
    b = serialize_document(assemble(snap))
    assert a == b, "assemble is not reproducible"


CHECKS: list[tuple[str, callable]] = [
    ("snapshot.roundtrip", check_snapshot_roundtrip),
    ("tinynet.conv-vs-double-loop", check_conv_brute),
    ("tinynet.pool-vs-window-max", check_pool_brute),
    ("tinynet.softmax-gradient-vs-fd", check_softmax_gradient_fd),
    ("tinynet.one-layer-hand-values", check_hand_one_layer),
    ("tinynet.dense-gradient-vs-fd", check_dense_fd),
    ("clustering.class-means-vs-double-loop", check_class_mean_brute),
    ("clustering.kmeans-vs-exhaustive", check_kmeans_exhaustive),
    ("clustering.meanshift-two-modes", check_meanshift_modes),
    ("clustering.representatives-vs-sort", check_representatives_oracle),
    ("clustering.move-centroid-mean", check_move_centroid),
    ("clustering.filter-vs-sort-and-cut", check_filter_oracle),
    ("clustering.resize-prefix", check_resize_prefix),
    ("packing.quantize-monotone", check_quantize_monotone),
    ("packing.split-separates-blobs", check_split_blobs),
    ("packing.treemap-regions-tile", check_treemap_tiling),
    ("packing.exact-vs-brute-force", check_pack_exact_brute),
    ("packing.forty-patches-no-overlap", check_pack_forty),
    ("seriation.three-node-hand-case", check_held_karp_hand),
    ("seriation.held-karp-vs-exhaustive", check_held_karp_exhaustive),
    ("seriation.junction-orientation", check_dnc_junction),
    ("seriation.beats-input-order", check_dnc_beats_input_order),
    ("seriation.matrix-cell-lookup", check_matrix_cells),
    ("bundling.aggregate-vs-group-mean", check_aggregate_means),
    ("bundling.two-by-two-bicluster", check_bicluster_hand),
    ("bundling.gradient-facet-vs-backward", check_gradient_facet),
    ("layout.debug-series-vs-brute-force", check_debug_series_brute),
    ("layout.barycenter-uncrossing", check_barycenter_uncrossing),
    ("layout.dead-relu-collapse", check_dead_relu_series),
    ("layout.incremental-equals-full", check_incremental_equals_full),
    ("server.undo-replay", check_undo_replay),
    ("server.golden-layout", check_golden_layout),
    ("layout.deterministic", check_assemble_deterministic),
]


def run_checks(report=print) -> int:
    """Run every check; returns 0 (all pass), 1 (failures), 2 (crash)."""
    failures = 0
    crashes = 0
    for name, fn in CHECKS:
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            report(f"FAIL {name}: {exc}")
        except Exception as exc:  # unexpected breakage, not a failed check
            crashes += 1
            report(f"ERROR {name}: {type(exc).__name__}: {exc}")
        else:
            report(f"PASS {name}")
    if crashes:
        return 2
    return 1 if failures else 0
