"""Snapshot data model, file parsing, and layer grouping.

A snapshot is a frozen view of a trained network: layers with neuron ids,
weighted edges between adjacent display layers, per-class mean activations,
and optional gradient / previous-weight / contribution / patch tables.
Grouping collapses the raw layer list into display groups: pooling layers
end a group, conv layers merge with their following activation layer, each
fully-connected layer opens its own group, and normalization layers stay
hidden inside the group of the layer they normalize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .errors import (
    DanglingReference,
    MalformedFile,
    MappingMismatch,
    MissingActivation,
    OrphanActivation,
    UndisplayableGroup,
)

LAYER_KINDS = ("conv", "activation", "pooling", "fully-connected", "normalization", "output")

# Kinds that can stand for their group on screen. conv and normalization
# never appear as display layers.
_DISPLAYABLE = ("activation", "pooling", "output", "fully-connected")

_WEIGHTED = ("conv", "fully-connected")


@dataclass(frozen=True)
class Layer:
    name: str
    kind: str
    neurons: tuple[str, ...]


@dataclass(frozen=True)
class WeightedEdge:
    id: str
    source: str
    target: str
    weight: float


@dataclass(frozen=True)
class PatchRef:
    image_id: str
    activation_score: float
    pixels: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class LayerGroup:
    member_layers: tuple[str, ...]
    display_layer: str


def _schema() -> dict:
    text = resources.files("convscope.schemas").joinpath("snapshot.v1.schema.json").read_text()
    return json.loads(text)


_SCHEMA = _schema()


def group_layers(layers: list[Layer] | tuple[Layer, ...]) -> tuple[LayerGroup, ...]:
    """Partition an ordered layer list into display groups.

    Pooling ends the open group, a fully-connected layer always opens a new
    one, everything else attaches to the open group. The display layer is
    the last activation layer of the group, falling back to the last
    displayable member for activation-free groups.
    """
    groups: list[list[Layer]] = []
    current: list[Layer] = []

    def close() -> None:
        if current:
            groups.append(list(current))
            current.clear()

    for layer in layers:
        if layer.kind == "fully-connected":
            close()
            current.append(layer)
        elif layer.kind == "pooling":
            current.append(layer)
            close()
        elif layer.kind == "activation":
            if not any(m.kind in _WEIGHTED for m in current):
                raise OrphanActivation(
                    f"activation layer {layer.name!r} has no preceding conv or FC layer in its group"
                )
            current.append(layer)
        else:
            current.append(layer)
    close()

    return tuple(merge_conv_activation(tuple(g)) for g in groups)


def merge_conv_activation(members: tuple[Layer, ...]) -> LayerGroup:
    """Validate the conv/FC -> activation merges inside one group and pick
    its display layer.

    Each weighted layer that is followed (normalization layers in between
    are skipped) by an activation or output layer must match it neuron for
    neuron; the merged pair exposes the activation side.
    """
    for i, layer in enumerate(members):
        if layer.kind not in _WEIGHTED:
            continue
        j = i + 1
        while j < len(members) and members[j].kind == "normalization":
            j += 1
        if j < len(members) and members[j].kind in ("activation", "output"):
            follower = members[j]
            if len(follower.neurons) != len(layer.neurons):
                raise MappingMismatch(
                    f"layer {layer.name!r} has {len(layer.neurons)} neurons but its "
                    f"activation layer {follower.name!r} has {len(follower.neurons)}"
                )

    display = None
    for layer in members:
        if layer.kind == "activation":
            display = layer
    if display is None:
        for layer in members:
            if layer.kind in _DISPLAYABLE:
                display = layer
    if display is None:
        names = [m.name for m in members]
        raise UndisplayableGroup(f"group {names} contains no displayable layer")
    return LayerGroup(tuple(m.name for m in members), display.name)


class NetworkSnapshot:
    """Validated, read-only snapshot with derived lookup tables."""

    def __init__(
        self,
        id: str,
        layers: tuple[Layer, ...],
        edges: tuple[WeightedEdge, ...],
        classes: tuple[str, ...],
        activations: dict[str, np.ndarray],
        gradients: dict[str, float] | None = None,
        prev_weights: dict[str, float] | None = None,
        contributions: dict[str, np.ndarray] | None = None,
        patches: dict[str, tuple[PatchRef, ...]] | None = None,
    ):
        self.id = id
        self.layers = tuple(layers)
        self.edges = tuple(edges)
        self.classes = tuple(classes)
        self.activations = activations
        self.gradients = gradients
        self.prev_weights = prev_weights
        self.contributions = contributions
        self.patches = patches

        self.layer_by_name = {l.name: l for l in self.layers}
        self.layer_of = {n: l.name for l in self.layers for n in l.neurons}
        self.edge_by_id = {e.id: e for e in self.edges}
        self.groups = group_layers(self.layers)
        self.display_layers = tuple(g.display_layer for g in self.groups)
        self._display_index = {name: i for i, name in enumerate(self.display_layers)}
        # edges between display layer i and i+1, in file order; edges with
        # out-of-place endpoints are left out here and rejected in _validate
        self.gap_edges: list[list[WeightedEdge]] = [[] for _ in range(len(self.groups) - 1)]
        for e in self.edges:
            gap = self._display_index.get(self.layer_of.get(e.source, ""))
            if gap is not None and gap < len(self.gap_edges):
                self.gap_edges[gap].append(e)
        self._validate()
        self._matrix_cache: dict[str, np.ndarray] = {}

    def _validate(self) -> None:
        ids = [n for l in self.layers for n in l.neurons]
        if len(ids) != len(set(ids)):
            raise MalformedFile("neuron ids are not globally unique")
        if len(set(self.classes)) != len(self.classes):
            raise MalformedFile("duplicate class names")
        if len(set(l.name for l in self.layers)) != len(self.layers):
            raise MalformedFile("duplicate layer names")
        if len(set(e.id for e in self.edges)) != len(self.edges):
            raise MalformedFile("duplicate edge ids")

        for e in self.edges:
            for endpoint in (e.source, e.target):
                if endpoint not in self.layer_of:
                    raise DanglingReference(f"edge {e.id!r} references unknown neuron {endpoint!r}")
            if not np.isfinite(e.weight):
                raise MalformedFile(f"edge {e.id!r} has non-finite weight")
            src_layer = self.layer_of[e.source]
            tgt_layer = self.layer_of[e.target]
            si = self._display_index.get(src_layer)
            ti = self._display_index.get(tgt_layer)
            if si is None or ti is None:
                raise MalformedFile(
                    f"edge {e.id!r} endpoint is not in a display layer "
                    f"({src_layer!r} -> {tgt_layer!r})"
                )
            if ti != si + 1:
                raise MalformedFile(
                    f"edge {e.id!r} does not connect adjacent display layers "
                    f"({src_layer!r} -> {tgt_layer!r})"
                )

        m = len(self.classes)
        for n in ids:
            vec = self.activations.get(n)
            if vec is None:
                raise MissingActivation(f"no activation row for neuron {n!r}")
            if vec.shape != (m,):
                raise MalformedFile(f"activation row for {n!r} has {vec.shape[0]} entries, expected {m}")
            if not np.all(np.isfinite(vec)):
                raise MalformedFile(f"non-finite activation for neuron {n!r}")
        extra = set(self.activations) - set(ids)
        if extra:
            raise MalformedFile(f"activation rows for unknown neurons: {sorted(extra)[:3]}")
        for layer in self.layers:
            if layer.kind == "activation":
                for n in layer.neurons:
                    if np.any(self.activations[n] < 0):
                        raise MalformedFile(f"negative mean activation on post-ReLU neuron {n!r}")

        for label, table in (("gradients", self.gradients), ("prev_weights", self.prev_weights)):
            if table is None:
                continue
            if set(table) != set(self.edge_by_id):
                raise MalformedFile(f"{label} table does not cover the edge set exactly")
            for v in table.values():
                if not np.isfinite(v):
                    raise MalformedFile(f"non-finite value in {label} table")
        if self.contributions is not None:
            for n, vec in self.contributions.items():
                if n not in self.layer_of:
                    raise MalformedFile(f"contribution row for unknown neuron {n!r}")
                if vec.shape != (m,):
                    raise MalformedFile(f"contribution row for {n!r} has wrong length")
        if self.patches is not None:
            for n, refs in self.patches.items():
                if n not in self.layer_of:
                    raise MalformedFile(f"patches for unknown neuron {n!r}")
                for ref in refs:
                    if not np.isfinite(ref.activation_score):
                        raise MalformedFile(f"non-finite patch score for neuron {n!r}")

    # --- lookups -----------------------------------------------------------

    def display_index(self, layer_name: str) -> int:
        return self._display_index[layer_name]

    def activation_matrix(self, layer_name: str) -> np.ndarray:
        """(n_neurons, n_classes) activation block in layer neuron order."""
        cached = self._matrix_cache.get(layer_name)
        if cached is None:
            layer = self.layer_by_name[layer_name]
            cached = np.stack([self.activations[n] for n in layer.neurons])
            cached.setflags(write=False)
            self._matrix_cache[layer_name] = cached
        return cached

    def to_document(self) -> dict:
        doc: dict = {
            "version": 1,
            "id": self.id,
            "classes": list(self.classes),
            "layers": [
                {"name": l.name, "kind": l.kind, "neurons": list(l.neurons)} for l in self.layers
            ],
            "edges": [
                {"id": e.id, "source": e.source, "target": e.target, "weight": e.weight}
                for e in self.edges
            ],
            "activations": [
                {
                    "layer": l.name,
                    "neurons": list(l.neurons),
                    "values": [self.activations[n].tolist() for n in l.neurons],
                }
                for l in self.layers
            ],
        }
        if self.gradients is not None:
            doc["gradients"] = {k: self.gradients[k] for k in sorted(self.gradients)}
        if self.prev_weights is not None:
            doc["prev_weights"] = {k: self.prev_weights[k] for k in sorted(self.prev_weights)}
        if self.contributions is not None:
            doc["contributions"] = {
                k: self.contributions[k].tolist() for k in sorted(self.contributions)
            }
        if self.patches is not None:
            doc["patches"] = {
                n: [
                    {
                        "imageId": r.image_id,
                        "activationScore": r.activation_score,
                        **({"pixels": [list(row) for row in r.pixels]} if r.pixels is not None else {}),
                    }
                    for r in refs
                ]
                for n, refs in sorted(self.patches.items())
            }
        return doc

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkSnapshot):
            return NotImplemented
        return self.to_document() == other.to_document()

    def __repr__(self) -> str:
        return (
            f"NetworkSnapshot({self.id!r}, {len(self.layers)} layers, "
            f"{len(self.edges)} edges, {len(self.classes)} classes)"
        )


def parse_snapshot(data: bytes | str | dict) -> NetworkSnapshot:
    """Parse and validate a snapshot document.

    Accepts raw JSON text/bytes or an already-decoded mapping. Raises
    MalformedFile on schema violations, DanglingReference for edges to
    unknown neurons, and MissingActivation for gaps in the activation table.
    """
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise MalformedFile(f"not valid JSON: {exc}") from exc
    else:
        doc = data
    try:
        jsonschema.validate(doc, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise MalformedFile(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from exc

    layers = tuple(
        Layer(l["name"], l["kind"], tuple(l["neurons"])) for l in doc["layers"]
    )
    edges = tuple(
        WeightedEdge(e["id"], e["source"], e["target"], float(e["weight"])) for e in doc["edges"]
    )
    classes = tuple(doc["classes"])

    m = len(classes)
    activations: dict[str, np.ndarray] = {}
    for block in doc["activations"]:
        neurons = block["neurons"]
        values = block["values"]
        if len(values) != len(neurons):
            raise MalformedFile(
                f"activation block for layer {block['layer']!r} has {len(values)} rows "
                f"for {len(neurons)} neurons"
            )
        for n, row in zip(neurons, values):
            if len(row) != m:
                raise MalformedFile(f"activation row for {n!r} has {len(row)} entries, expected {m}")
            if n in activations:
                raise MalformedFile(f"duplicate activation row for neuron {n!r}")
            activations[n] = np.asarray(row, dtype=np.float64)

    contributions = None
    if "contributions" in doc:
        contributions = {
            n: np.asarray(row, dtype=np.float64) for n, row in doc["contributions"].items()
        }
    patches = None
    if "patches" in doc:
        patches = {
            n: tuple(
                PatchRef(
                    r["imageId"],
                    float(r["activationScore"]),
                    tuple(tuple(float(v) for v in row) for row in r["pixels"])
                    if "pixels" in r
                    else None,
                )
                for r in refs
            )
            for n, refs in doc["patches"].items()
        }

    return NetworkSnapshot(
        id=doc["id"],
        layers=layers,
        edges=edges,
        classes=classes,
        activations=activations,
        gradients={k: float(v) for k, v in doc["gradients"].items()} if "gradients" in doc else None,
        prev_weights={k: float(v) for k, v in doc["prev_weights"].items()}
        if "prev_weights" in doc
        else None,
        contributions=contributions,
        patches=patches,
    )


def serialize_snapshot(snapshot: NetworkSnapshot) -> str:
    """Canonical JSON text: sorted keys, shortest round-tripping floats."""
    return json.dumps(snapshot.to_document(), sort_keys=True, separators=(",", ":"))
