"""
Grouping neurons and packing their feature squares
==================================================

A layer with dozens of channels is unreadable drawn neuron by neuron. The
engine clusters neurons by their per-class activation profiles, shows a few
representatives per cluster, and packs one quantized square per neuron into
the cluster's node. Important neurons get bigger squares.
"""

import numpy as np

from convscope import cluster_layer, emit_snapshot, fixture_net, make_dataset, pack_cluster
from convscope.clustering import move_neuron

net = fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)
snapshot = emit_snapshot(net, make_dataset(net, images_per_class=4, seed=1), "pack")
layer = snapshot.display_layers[0]

# mean shift with a data-derived bandwidth; kmeans is the other option
clustering = cluster_layer(snapshot, layer, method="meanshift")
print(f"{layer}: {len(clustering.clusters)} clusters")
for c in clustering.clusters:
    print(f"  {c.id}: members={list(c.members)} shows {list(c.representatives)}")

# packing: neuron importance is quantized to square sides 1..3, then the
# squares are packed into the smallest rectangle a 4:1 aspect cap allows
cluster = max(clustering.clusters, key=lambda c: len(c.members))
packing = pack_cluster(snapshot, list(cluster.members))
print(f"\npacked {cluster.id}: {packing.width}x{packing.height} grid, "
      f"utilization {packing.utilization:.2f}")
for rect in packing.rects:
    print(f"  {rect.neuron}: side {rect.side} at ({rect.x:.0f}, {rect.y:.0f})")

# users can re-group interactively; moving a neuron recomputes centroids and
# drops emptied clusters
target = next(c.id for c in clustering.clusters if c.id != cluster.id)
moved = move_neuron(snapshot, clustering, cluster.members[0], target)
print(f"\nafter moving {cluster.members[0]} to {target}:")
print("  cluster sizes:", sorted(len(c.members) for c in moved.clusters))

# selecting classes changes importances, and with them the square sides
focused = pack_cluster(snapshot, list(cluster.members), class_indices=[0])
sides_all = {r.neuron: r.side for r in packing.rects}
sides_c0 = {r.neuron: r.side for r in focused.rects}
changed = {n for n in sides_all if sides_all[n] != sides_c0[n]}
print(f"\nfocusing class c0 resizes {len(changed)} of {len(sides_all)} squares")
