"""Cluster-edge aggregation, bicluster mining, and bundle geometry."""

from __future__ import annotations

import numpy as np
import pytest

from convscope import aggregate_connections, extract_biclusters
from convscope.bundling import (
    NODE_SPACING,
    ClusterEdge,
    NodeBox,
    bundle_geometry,
    closed_concepts,
    edge_facet,
)
from convscope.clustering import LayerClustering, NeuronCluster
from convscope.errors import MissingFacetData, MissingPosition
from convscope.oracles import biclusters_brute, group_mean_brute, maximal_cross_products

from conftest import singleton_clustering, two_layer_snapshot


def _pair_clustering(layer: str, groups: dict[str, list[str]], snapshot) -> LayerClustering:
    clusters = []
    for cid, members in groups.items():
        vec = tuple(np.mean([snapshot.activations[m] for m in members], axis=0))
        clusters.append(NeuronCluster(cid, tuple(members), tuple(members), vec, len(members)))
    return LayerClustering(layer, tuple(clusters), len(clusters), 9)


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


def _as_set(bundle_set):
    return {
        (b.sign, b.inputs, b.outputs, tuple(sorted(b.owned)))
        for b in bundle_set.biclusters
    }


class TestAggregation:
    def test_matches_group_means(self):
        rng = np.random.default_rng(0)
        weights = {
            (i, j): float(rng.normal())
            for i in range(4)
            for j in range(3)
            if rng.random() < 0.8
        }
        snap = two_layer_snapshot(weights, 4, 3)
        left = _pair_clustering("relu1", {"cl0": ["L0", "L1"], "cl1": ["L2", "L3"]}, snap)
        right = _pair_clustering("fc1", {"cr0": ["R0"], "cr1": ["R1", "R2"]}, snap)
        got = aggregate_connections(snap, 0, left, right)

        cluster_of = {n: cid for cid, ms in
                      [("cl0", ["L0", "L1"]), ("cl1", ["L2", "L3"]),
                       ("cr0", ["R0"]), ("cr1", ["R1", "R2"])] for n in ms}
        rows = [
            (cluster_of[f"L{i}"], cluster_of[f"R{j}"], w)
            for (i, j), w in weights.items()
            if w != 0.0
        ]
        want = group_mean_brute(rows)
        assert {(e.source, e.target) for e in got} == set(want)
        for e in got:
            pos, neg, n_pos, n_neg = want[(e.source, e.target)]
            assert abs(e.w_pos - pos) < 1e-12 and abs(e.w_neg - neg) < 1e-12
            assert (e.n_pos, e.n_neg) == (n_pos, n_neg)

    def test_zero_weight_edges_ignored(self):
        snap = two_layer_snapshot({(0, 0): 0.0, (1, 0): 0.5}, 2, 1)
        left = singleton_clustering("relu1", ["L0", "L1"], snap)
        right = singleton_clustering("fc1", ["R0"], snap)
        got = aggregate_connections(snap, 0, left, right)
        assert [(e.source, e.target) for e in got] == [("relu1/c1", "fc1/c0")]

    def test_output_order_follows_cluster_lists(self):
        weights = {(i, j): 1.0 for i in range(3) for j in range(2)}
        snap = two_layer_snapshot(weights, 3, 2)
        left = singleton_clustering("relu1", ["L2", "L0", "L1"], snap)
        right = singleton_clustering("fc1", ["R1", "R0"], snap)
        got = aggregate_connections(snap, 0, left, right)
        sources = [e.source for e in got]
        assert sources == sorted(sources, key=["relu1/c0", "relu1/c1", "relu1/c2"].index)
        # first cluster's targets appear in right-cluster order
        assert [e.target for e in got[:2]] == ["fc1/c0", "fc1/c1"]


class TestClosedConcepts:
    def test_matches_cross_product_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            pairs = sorted(
                {
                    (f"L{rng.integers(4)}", f"R{rng.integers(4)}")
                    for _ in range(int(rng.integers(1, 10)))
                }
            )
            got = closed_concepts(pairs)
            want = maximal_cross_products(pairs)
            assert sorted(got) == sorted(want)

    def test_every_concept_pair_exists(self):
        pairs = [("a", "x"), ("a", "y"), ("b", "x"), ("c", "z")]
        for sources, targets in closed_concepts(pairs):
            for s in sources:
                for t in targets:
                    assert (s, t) in pairs

    def test_grid_yields_full_concept(self):
        pairs = [(s, t) for s in ("a", "b") for t in ("x", "y")]
        assert (("a", "b"), ("x", "y")) in closed_concepts(pairs)


class TestExtraction:
    def test_two_by_two_block_promotes_one_bicluster(self):
        edges = [
            ClusterEdge(s, t, 0.5, 0.0, 1, 0, ())
            for s in ("A", "B")
            for t in ("X", "Y")
        ]
        bs = extract_biclusters(edges, tau=0.1)
        assert len(bs.biclusters) == 1
        b = bs.biclusters[0]
        assert b.sign == "positive" and b.anchor == 0.5
        assert b.inputs == ("A", "B") and b.outputs == ("X", "Y")
        assert sorted(b.owned) == [(s, t) for s in "AB" for t in "XY"]
        assert b.pos_neg_ratio == 1.0
        assert bs.residual == ()

    def test_matches_brute_force(self):
        # small volume here; the acceptance suite runs 200 random graphs
        rng = np.random.default_rng(2)
        for _ in range(40):
            edges = _random_cluster_edges(rng)
            got = extract_biclusters(edges)
            want = {
                (sign, ins, outs, tuple(sorted(pairs)))
                for sign, ins, outs, pairs in biclusters_brute(edges)
            }
            assert _as_set(got) == want

    def test_default_thresholds_scale_with_first_anchor(self):
        edges = [
            ClusterEdge("A", "X", 0.8, 0.0, 1, 0, ()),
            ClusterEdge("A", "Y", 0.3, -0.2, 1, 1, ()),
        ]
        bs = extract_biclusters(edges)
        assert abs(bs.tau - 0.25 * 0.8) < 1e-12
        assert abs(bs.stop - 0.1 * 0.8) < 1e-12
        assert bs.initial_w_max == 0.8

    def test_positive_anchor_wins_ties(self):
        edges = [
            ClusterEdge("A", "X", 0.5, 0.0, 1, 0, ()),
            ClusterEdge("A", "Y", 0.5, 0.0, 1, 0, ()),
            ClusterEdge("B", "X", 0.0, -0.5, 0, 1, ()),
            ClusterEdge("B", "Y", 0.0, -0.5, 0, 1, ()),
        ]
        bs = extract_biclusters(edges, tau=0.01)
        assert [b.sign for b in bs.biclusters] == ["positive", "negative"]

    def test_residual_components_and_hidden_rule(self):
        edges = [
            ClusterEdge("A", "X", 1.0, 0.0, 1, 0, ()),
            ClusterEdge("A", "Y", 1.0, -0.04, 1, 1, ()),
            ClusterEdge("B", "Z", 0.4, 0.0, 1, 0, ()),
        ]
        bs = extract_biclusters(edges, tau=0.1, stop=0.05)
        # the 1.0/1.0 pair shares only cluster A: spans 2 targets, promoted
        assert any(b.outputs == ("X", "Y") for b in bs.biclusters)
        resid = {(r.source, r.target, r.sign): r for r in bs.residual}
        assert resid[("B", "Z", "positive")].hidden is False
        assert resid[("A", "Y", "negative")].hidden is True  # 0.04 < stop
        assert set(resid) == {("B", "Z", "positive"), ("A", "Y", "negative")}

    def test_each_sign_component_owned_at_most_once(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            edges = _random_cluster_edges(rng)
            bs = extract_biclusters(edges)
            seen = set()
            for b in bs.biclusters:
                for p in b.owned:
                    assert (b.sign, p) not in seen
                    seen.add((b.sign, p))
            for r in bs.residual:
                assert (r.sign, (r.source, r.target)) not in seen

    def test_empty_gap(self):
        bs = extract_biclusters([])
        assert bs.biclusters == () and bs.residual == ()
        assert bs.initial_w_max == 0.0


class TestGeometry:
    def _positions(self):
        return {
            "A": NodeBox(0.0, 0.0, 100.0, 40.0),
            "B": NodeBox(0.0, 100.0, 100.0, 40.0),
            "X": NodeBox(260.0, 0.0, 100.0, 40.0),
            "Y": NodeBox(260.0, 100.0, 100.0, 40.0),
        }

    def _block_edges(self):
        return [
            ClusterEdge(s, t, 0.5, 0.0, 1, 0, ())
            for s in ("A", "B")
            for t in ("X", "Y")
        ]

    def test_node_centered_between_columns(self):
        edges = self._block_edges()
        bs = extract_biclusters(edges, tau=0.1)
        nodes, curves = bundle_geometry(bs, edges, self._positions(), gap_label="g0")
        assert len(nodes) == 1
        node = nodes[0]
        assert node.id == f"g0:{bs.biclusters[0].id}"
        # horizontal midpoint of the gap between column edges
        assert abs((node.x + node.width / 2.0) - (100.0 + 260.0) / 2.0) < 1e-9
        # equal incident weights -> plain mean of the four cluster centers
        assert abs((node.y + node.height / 2.0) - 70.0) < 1e-9

    def test_weighted_vertical_center(self):
        edges = [
            ClusterEdge("A", "X", 1.0, 0.0, 1, 0, ()),
            ClusterEdge("A", "Y", 0.9, 0.0, 1, 0, ()),
            ClusterEdge("B", "X", 0.95, 0.0, 1, 0, ()),
            ClusterEdge("B", "Y", 0.92, 0.0, 1, 0, ()),
        ]
        bs = extract_biclusters(edges, tau=0.2)
        positions = self._positions()
        nodes, _ = bundle_geometry(bs, edges, positions)
        (node,) = nodes
        incident = {"A": 1.9, "B": 1.87, "X": 1.95, "Y": 1.82}
        want = sum(positions[c].cy * w for c, w in incident.items()) / sum(incident.values())
        assert abs((node.y + node.height / 2.0) - want) < 1e-9

    def test_one_aggregated_curve_per_cluster_side(self):
        edges = self._block_edges()
        bs = extract_biclusters(edges, tau=0.1)
        _, curves = bundle_geometry(bs, edges, self._positions())
        ins = [c for c in curves if c.side == "in"]
        outs = [c for c in curves if c.side == "out"]
        assert sorted(c.cluster for c in ins) == ["A", "B"]
        assert sorted(c.cluster for c in outs) == ["X", "Y"]
        for c in ins + outs:
            assert abs(c.weight - 1.0) < 1e-12  # two 0.5 components per side
            xs = [p[0] for p in c.points]
            assert xs == sorted(xs)  # control points run left to right

    def test_residual_curves_direct_and_hidden_flag(self):
        edges = [
            ClusterEdge("A", "X", 1.0, 0.0, 1, 0, ()),
            ClusterEdge("B", "Y", 0.01, 0.0, 1, 0, ()),
        ]
        bs = extract_biclusters(edges, tau=0.05, stop=0.5)
        assert bs.biclusters == ()
        _, curves = bundle_geometry(bs, edges, self._positions())
        by_cluster = {c.cluster: c for c in curves}
        assert by_cluster["A->X"].side == "direct" and not by_cluster["A->X"].hidden
        assert by_cluster["B->Y"].hidden

    def test_missing_position_rejected(self):
        edges = self._block_edges()
        bs = extract_biclusters(edges, tau=0.1)
        positions = self._positions()
        del positions["Y"]
        with pytest.raises(MissingPosition):
            bundle_geometry(bs, edges, positions)

    def test_crowded_nodes_pushed_apart(self):
        # two same-anchored biclusters of opposite sign over the same block
        # would land on the same center without the separation sweep
        edges = [
            ClusterEdge(s, t, 0.5, -0.5, 1, 1, ())
            for s in ("A", "B")
            for t in ("X", "Y")
        ]
        bs = extract_biclusters(edges, tau=0.1)
        assert len(bs.biclusters) >= 2
        nodes, curves = bundle_geometry(bs, edges, self._positions())
        ordered = sorted(nodes, key=lambda n: n.y)
        for above, below in zip(ordered, ordered[1:]):
            assert below.y >= above.y + above.height + NODE_SPACING - 1e-9
        # curves still attach at each node's final vertical center
        centers = {n.bicluster: n.y + n.height / 2.0 for n in nodes}
        for c in curves:
            if c.side == "in":
                assert abs(c.points[-1][1] - centers[c.bicluster]) < 1e-9
            elif c.side == "out":
                assert abs(c.points[0][1] - centers[c.bicluster]) < 1e-9


class TestEdgeFacets:
    def test_weight_facet_is_identity(self, small_snapshot):
        values = edge_facet(small_snapshot, 0, "weight")
        for e in small_snapshot.gap_edges[0]:
            assert values[e.id] == e.weight

    def test_gradient_facet_is_magnitude(self, small_snapshot):
        values = edge_facet(small_snapshot, 0, "gradient")
        for e in small_snapshot.gap_edges[0]:
            assert values[e.id] == abs(small_snapshot.gradients[e.id])

    def test_relative_change_facet(self, small_snapshot):
        values = edge_facet(small_snapshot, 1, "relativeChange")
        for e in small_snapshot.gap_edges[1]:
            prev = small_snapshot.prev_weights[e.id]
            want = abs(e.weight - prev) / (abs(prev) + 1e-12)
            assert abs(values[e.id] - want) < 1e-15

    def test_missing_tables_rejected(self):
        snap = two_layer_snapshot({(0, 0): 0.5}, 1, 1)  # no optional tables
        with pytest.raises(MissingFacetData):
            edge_facet(snap, 0, "gradient")
        with pytest.raises(MissingFacetData):
            edge_facet(snap, 0, "relativeChange")

    def test_unknown_facet_rejected(self, small_snapshot):
        with pytest.raises(ValueError):
            edge_facet(small_snapshot, 0, "voltage")
