"""convscope: clustered-graph visualization of CNN training snapshots.

A trained-network snapshot (layers, weights, per-class activations, optional
gradients and patches) becomes an interactive document: neurons clustered by
activation profile, learned features packed into minimum-area rectangles,
activation matrices reordered for coherence, and inter-layer connections
bundled through mined biclusters. A small HTTP service and CLI expose the
pipeline to clients.
"""

from .clustering import (
    LayerClustering,
    NeuronCluster,
    average_activation,
    cluster_layer,
    filter_by_classes,
    kmeans,
    meanshift,
    move_neuron,
    resize_cluster_view,
)
from .bundling import (
    Bicluster,
    BundleSet,
    ClusterEdge,
    aggregate_connections,
    bundle_geometry,
    edge_facet,
    extract_biclusters,
)
from .errors import ConvscopeError
from .layout import (
    Assembler,
    FacetState,
    LayoutParams,
    SessionState,
    apply_interaction,
    assemble,
    debug_series,
    serialize_document,
)
from .packing import Packing, PatchRect, pack_cluster, pack_exact, quantize_sizes
from .seriation import ActivationMatrix, build_matrix, dnc_order, held_karp_order
from .snapshot import NetworkSnapshot, parse_snapshot, serialize_snapshot
from .tinynet import (
    TinyNet,
    backward,
    dead_relu_net,
    emit_snapshot,
    finite_difference,
    fixture_net,
    forward,
    make_dataset,
    random_net,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationMatrix",
    "Assembler",
    "Bicluster",
    "BundleSet",
    "ClusterEdge",
    "ConvscopeError",
    "FacetState",
    "LayerClustering",
    "LayoutParams",
    "NetworkSnapshot",
    "NeuronCluster",
    "Packing",
    "PatchRect",
    "SessionState",
    "TinyNet",
    "aggregate_connections",
    "apply_interaction",
    "assemble",
    "average_activation",
    "backward",
    "build_matrix",
    "bundle_geometry",
    "cluster_layer",
    "dead_relu_net",
    "debug_series",
    "dnc_order",
    "edge_facet",
    "emit_snapshot",
    "extract_biclusters",
    "filter_by_classes",
    "finite_difference",
    "fixture_net",
    "forward",
    "held_karp_order",
    "kmeans",
    "make_dataset",
    "meanshift",
    "move_neuron",
    "pack_cluster",
    "pack_exact",
    "parse_snapshot",
    "quantize_sizes",
    "random_net",
    "resize_cluster_view",
    "serialize_document",
    "serialize_snapshot",
    "__version__",
]
