"""
Reading the gradient series on a broken net
===========================================

When training stalls, the per-gap debug series point at where learning
stopped. This demo compares a healthy net against one whose deeper layers
are almost entirely dead ReLUs: strictly negative incoming weights keep
their outputs at zero, so no gradient flows and their weights never change.
"""

import numpy as np

from convscope import emit_snapshot, fixture_net, make_dataset
from convscope.layout import debug_series
from convscope.tinynet import dead_relu_net


def report(title, snapshot):
    print(title)
    series = debug_series(snapshot, "avgRelChange")
    for entry in series:
        layer = entry["layer"]
        neurons = snapshot.layer_by_name[layer].neurons
        dead = sum(1 for n in neurons if np.all(snapshot.activations[n] == 0.0))
        bar = "#" * max(1, int(40 * entry["value"] / (series[0]["value"] or 1)))
        print(f"  {layer:9s} relChange {entry['value']:.6f} {bar}"
              f"  ({dead}/{len(neurons)} neurons silent)")
    print()


healthy = fixture_net(seed=0)
report("healthy net:", emit_snapshot(healthy, make_dataset(healthy, 4, seed=0), "ok"))

broken = dead_relu_net(seed=0)
report("mostly-dead net:", emit_snapshot(broken, make_dataset(broken, 4, seed=0), "dead"))

# the signature: once a layer goes silent, every later layer's relative
# weight change collapses to a fraction of the first gap's value, because
# zero activations mean zero gradient contributions downstream
