"""Feature-square quantization and rectangle packing."""

from __future__ import annotations

import numpy as np
import pytest

from convscope import emit_snapshot, fixture_net, make_dataset, pack_cluster, pack_exact
from convscope.errors import EmptyClassSet, InsufficientArea, MissingContributionData
from convscope.modularity import split_tree
from convscope.oracles import min_area_brute, packing_violations
from convscope.packing import Region, allocate_areas, importance, quantize_sizes


class TestQuantize:
    def test_sides_are_terciles(self):
        sides = quantize_sizes(np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))
        assert sides.tolist() == [1, 1, 2, 2, 3, 3]

    def test_equal_importances_all_medium(self):
        assert quantize_sizes(np.full(5, 0.7)).tolist() == [2] * 5

    def test_monotone_in_importance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            imp = rng.normal(size=int(rng.integers(2, 15)))
            sides = quantize_sizes(imp)
            assert set(sides.tolist()) <= {1, 2, 3}
            order = np.argsort(imp)
            assert all(
                sides[a] <= sides[b] for a, b in zip(order, order[1:])
            )

    def test_empty_input(self):
        assert quantize_sizes(np.zeros(0)).size == 0


class TestImportance:
    def test_avg_and_max_reduce_selected_classes(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        neurons = list(small_snapshot.layer_by_name[layer].neurons[:4])
        block = np.stack([small_snapshot.activations[n] for n in neurons])
        np.testing.assert_allclose(
            importance(small_snapshot, neurons, "avg", [0, 2]), block[:, [0, 2]].mean(axis=1)
        )
        np.testing.assert_allclose(
            importance(small_snapshot, neurons, "max", [1]), block[:, [1]].max(axis=1)
        )

    def test_contribution_requires_table(self, small_snapshot):
        neurons = list(small_snapshot.layer_by_name[small_snapshot.display_layers[0]].neurons[:2])
        with pytest.raises(MissingContributionData):
            importance(small_snapshot, neurons, "contribution")

    def test_empty_class_selection_rejected(self, small_snapshot):
        neurons = [small_snapshot.layer_by_name[small_snapshot.display_layers[0]].neurons[0]]
        with pytest.raises(EmptyClassSet):
            importance(small_snapshot, neurons, "avg", [])


class TestPackExact:
    def test_minimum_area_matches_brute_force(self):
        # small volume here; the acceptance suite runs 100 random sets
        rng = np.random.default_rng(1)
        for _ in range(20):
            sides = [int(s) for s in rng.integers(1, 4, size=int(rng.integers(1, 7)))]
            items = [(f"n{i}", s) for i, s in enumerate(sides)]
            packed = pack_exact(items)
            assert packed.width * packed.height == min_area_brute(sides)

    def test_geometry_invariants(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            sides = [int(s) for s in rng.integers(1, 4, size=int(rng.integers(1, 7)))]
            items = [(f"n{i}", s) for i, s in enumerate(sides)]
            packed = pack_exact(items)
            assert packing_violations(packed) == []
            assert sorted(r.neuron for r in packed.rects) == sorted(n for n, _ in items)
            placed = {r.neuron: r.side for r in packed.rects}
            assert placed == dict(items)

    def test_aspect_ratio_capped(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            sides = [int(s) for s in rng.integers(1, 4, size=6)]
            packed = pack_exact([(f"n{i}", s) for i, s in enumerate(sides)])
            assert packed.width <= 4 * packed.height + 1e-9
            assert packed.height <= 4 * packed.width + 1e-9

    def test_utilization_definition(self):
        packed = pack_exact([("a", 2), ("b", 1)])
        total = 4 + 1
        assert abs(packed.utilization - total / (packed.width * packed.height)) < 1e-12

    def test_single_square_is_tight(self):
        packed = pack_exact([("a", 3)])
        assert (packed.width, packed.height) == (3.0, 3.0)
        assert packed.utilization == 1.0

    def test_empty_items(self):
        packed = pack_exact([])
        assert packed.width == packed.height == 0.0 and packed.rects == ()

    def test_deterministic(self):
        items = [("a", 2), ("b", 2), ("c", 1), ("d", 3)]
        assert pack_exact(items) == pack_exact(items)


class TestAllocateAreas:
    def test_regions_tile_bounds_proportionally(self):
        rng = np.random.default_rng(4)
        vectors = np.vstack([rng.normal(size=(4, 2)), rng.normal(size=(4, 2)) + 8.0])
        tree = split_tree(tuple(range(8)), vectors, 4)
        leaves = [[(f"n{i}", 2) for i in node.members] for node in tree.leaves()]
        bounds = Region(0.0, 0.0, 12.0, 9.0)
        regions = allocate_areas(leaves, tree, bounds)
        area = sum(r.width * r.height for r in regions)
        assert abs(area - 12.0 * 9.0) < 1e-6
        demands = [1.2 * sum(s * s for _, s in leaf) for leaf in leaves]
        for region, demand in zip(regions, demands):
            share = demand / sum(demands)
            assert abs(region.width * region.height - share * 108.0) < 1e-6

    def test_insufficient_bounds_rejected(self):
        vectors = np.array([[0.0, 0.0], [10.0, 10.0]])
        tree = split_tree((0, 1), vectors, 1)
        leaves = [[(f"n{i}", 3) for i in node.members] for node in tree.leaves()]
        with pytest.raises(InsufficientArea):
            allocate_areas(leaves, tree, Region(0.0, 0.0, 2.0, 2.0))


class TestPackCluster:
    def test_small_cluster_uses_exact_packer(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        neurons = list(small_snapshot.layer_by_name[layer].neurons)
        packed = pack_cluster(small_snapshot, neurons)
        assert packing_violations(packed) == []
        assert all(r.scale == 1.0 for r in packed.rects)
        sides = [r.side for r in sorted(packed.rects, key=lambda r: r.neuron)]
        assert packed.width * packed.height == min_area_brute(sides)

    def test_large_cluster_invariants(self):
        net = fixture_net(seed=9, conv_channels=(18,), input_side=8, n_classes=3)
        data = make_dataset(net, images_per_class=3, seed=9)
        snap = emit_snapshot(net, data, "pack-large")
        neurons = list(snap.layer_by_name[snap.display_layers[0]].neurons)
        assert len(neurons) == 18
        packed = pack_cluster(snap, neurons, n_pack=5)
        assert packing_violations(packed) == []
        assert sorted(r.neuron for r in packed.rects) == sorted(neurons)
        assert packed.width == packed.height  # square canvas for split sets

    def test_class_selection_changes_importance(self, small_snapshot):
        layer = small_snapshot.display_layers[0]
        neurons = list(small_snapshot.layer_by_name[layer].neurons)
        all_classes = pack_cluster(small_snapshot, neurons)
        one_class = pack_cluster(small_snapshot, neurons, class_indices=[0])
        sides_all = {r.neuron: r.side for r in all_classes.rects}
        sides_one = {r.neuron: r.side for r in one_class.rects}
        assert set(sides_all) == set(sides_one)  # same neurons either way
