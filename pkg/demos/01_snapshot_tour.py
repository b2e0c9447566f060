"""
From a trained net to a snapshot
================================

The engine never touches a training framework. It consumes a snapshot: a
JSON file holding the net's structure, its weights, per-class mean
activations, and optionally gradients and image patches. This demo builds
a small synthetic net, evaluates a dataset through it, and walks the
resulting snapshot.
"""

import numpy as np

from convscope import emit_snapshot, fixture_net, make_dataset, serialize_snapshot

# a toy convnet: two (conv, relu, pool) groups and a dense softmax head
net = fixture_net(seed=3, conv_channels=(6, 6), input_side=10, n_classes=3)
data = make_dataset(net, images_per_class=4, seed=1)
snapshot = emit_snapshot(net, data, "tour")

# layers collapse into display groups: each (conv, relu, pool) block is shown
# as its activation layer, the dense head as the output row
print("display layers:")
for name in snapshot.display_layers:
    layer = snapshot.layer_by_name[name]
    print(f"  {name:6s} {len(layer.neurons):3d} neurons")

# activations are per-class means, one row per neuron
neuron = snapshot.layer_by_name[snapshot.display_layers[0]].neurons[0]
row = snapshot.activations[neuron]
print(f"\n{neuron} mean activation per class:", np.round(row, 4))

# edges connect consecutive display layers; each carries one scalar weight
n_edges = [len(gap) for gap in snapshot.gap_edges]
print("edges per gap:", n_edges)

# the snapshot serializes to stable bytes, so ids and files are reproducible
raw = serialize_snapshot(snapshot)
print(f"\nserialized snapshot: {len(raw)} characters")
