"""
Aggregating and bundling cluster edges
======================================

Raw nets have one edge per weight, far too many to draw. The engine first
aggregates edges between cluster pairs (mean positive and mean negative
weight per pair), then mines biclusters: groups of cluster pairs with
similar strong weights of one sign. Each bicluster becomes a small
in-between node with bundled curves instead of a hairball.
"""

from convscope import (
    aggregate_connections,
    assemble,
    cluster_layer,
    emit_snapshot,
    extract_biclusters,
    fixture_net,
    make_dataset,
)

net = fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)
snapshot = emit_snapshot(net, make_dataset(net, images_per_class=4, seed=1), "bundle")

left_layer, right_layer = snapshot.display_layers[0], snapshot.display_layers[1]
left = cluster_layer(snapshot, left_layer)
right = cluster_layer(snapshot, right_layer)

# one aggregated edge per cluster pair that has any member weights
edges = aggregate_connections(snapshot, 0, left, right)
n_pairs = len(left.clusters) * len(right.clusters)
print(f"{left_layer} -> {right_layer}: {len(snapshot.gap_edges[0])} raw edges, "
      f"{len(edges)} aggregated pairs of {n_pairs} possible")

# thresholds derive from the strongest aggregated magnitude unless overridden
bundles = extract_biclusters(edges)
print(f"tau {bundles.tau:.4f}, stop {bundles.stop:.4f}")
for b in bundles.biclusters:
    print(f"  {b.sign:8s} {list(b.inputs)} x {list(b.outputs)} "
          f"anchor {b.anchor:.4f}, owns {len(b.owned)} pairs")

# in the assembled document each bicluster shows up as an in-between node
# plus one curve per touched cluster side; weak leftovers draw directly and
# below the stop threshold they are hidden by default
document = assemble(snapshot)
gap = document["gaps"][0]
residuals = [c for c in gap["curves"] if c["bicluster"] is None]
hidden = [c for c in residuals if c["hidden"]]
print(f"\ndocument gap 0: {len(gap['nodes'])} nodes, {len(gap['curves'])} curves "
      f"({len(residuals)} residual, {len(hidden)} hidden)")
