"""Hybrid-visualization document assembly.

Composes clustering, packing, seriation, and bundling into one layered DAG
document (`layout.v1`): display-layer columns at uniform x spacing, cluster
nodes stacked by a single left-to-right barycenter sweep with heights
proportional to the representative count, facet payloads per cluster, and
in-between bundle nodes per layer gap.

The Assembler memoizes payloads and per-gap bundle extraction, so an
interactive edit recomputes only what the edit touched; a fresh Assembler
over the same clustering state produces byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from . import bundling, packing, seriation
from .clustering import (
    LayerClustering,
    cluster_layer,
    filter_by_classes,
    move_neuron,
    resize_cluster_view,
)
from .errors import (
    MissingContributionData,
    MissingFacetData,
    UnknownNeuron,
    UnknownTargetCluster,
)
from .snapshot import NetworkSnapshot

COLUMN_X0 = 40.0
COLUMN_SPACING = 260.0
NODE_WIDTH = 120.0
UNIT_HEIGHT = 16.0  # node height per shown representative
NODE_GAP = 18.0
MARGIN_Y = 40.0

FACETS = ("features", "matrix", "contribution")
EDGE_FACETS = ("weight", "gradient", "relativeChange")


@dataclass(frozen=True)
class LayoutParams:
    method: str = "meanshift"
    k: int | None = None
    bandwidth: float | None = None
    seed: int = 0
    repr_count: int = 9
    n_pack: int = packing.N_PACK
    hk_limit: int = seriation.HK_LIMIT
    tau: float | None = None
    stop: float | None = None
    edge_facet: str = "weight"
    importance_mode: str = "avg"


@dataclass(frozen=True)
class FacetState:
    facet: str = "features"
    classes: tuple[int, ...] | None = None  # None selects every class
    quantile: float = 1.0


def initial_clusterings(
    snapshot: NetworkSnapshot, params: LayoutParams
) -> dict[str, LayerClustering]:
    return {
        layer: cluster_layer(
            snapshot,
            layer,
            method=params.method,
            k=params.k,
            bandwidth=params.bandwidth,
            seed=params.seed,
            repr_count=params.repr_count,
        )
        for layer in snapshot.display_layers
    }


def debug_series(snapshot: NetworkSnapshot, kind: str) -> list[dict]:
    """Per display layer, the mean scalar over its incoming member edges.

    The first display layer has no incoming gap and is skipped.
    """
    if kind not in ("avgGradient", "avgRelChange"):
        raise ValueError(f"unknown debug series {kind!r}")
    facet = "gradient" if kind == "avgGradient" else "relativeChange"
    series = []
    for gap in range(len(snapshot.gap_edges)):
        scalars = bundling.edge_facet(snapshot, gap, facet)
        layer = snapshot.display_layers[gap + 1]
        values = [abs(v) for v in scalars.values()]
        series.append(
            {"layer": layer, "value": sum(values) / len(values) if values else 0.0}
        )
    return series


def _membership_key(clustering: LayerClustering) -> tuple:
    return tuple((c.id, c.members) for c in clustering.clusters)


class Assembler:
    """Builds layout documents for one snapshot, memoizing pure payloads."""

    def __init__(self, snapshot: NetworkSnapshot, params: LayoutParams | None = None):
        self.snapshot = snapshot
        self.params = params or LayoutParams()
        self._pack_cache: dict[tuple, dict] = {}
        self._matrix_cache: dict[tuple, dict] = {}
        self._contribution_cache: dict[tuple, dict | None] = {}
        self._bundle_cache: dict[tuple, tuple] = {}
        self._edge_facet_cache: dict[tuple, dict] = {}

    # --- payloads -----------------------------------------------------------

    def _packing_payload(self, representatives: tuple[str, ...], classes) -> dict:
        key = (representatives, classes, self.params.importance_mode, self.params.n_pack)
        hit = self._pack_cache.get(key)
        if hit is not None:
            return hit
        packed = packing.pack_cluster(
            self.snapshot,
            list(representatives),
            mode=self.params.importance_mode,
            class_indices=None if classes is None else list(classes),
            n_pack=self.params.n_pack,
        )
        payload = {
            "width": float(packed.width),
            "height": float(packed.height),
            "utilization": float(packed.utilization),
            "rects": [
                {
                    "neuron": r.neuron,
                    "side": int(r.side),
                    "x": float(r.x),
                    "y": float(r.y),
                    "scale": float(r.scale),
                }
                for r in packed.rects
            ],
        }
        self._pack_cache[key] = payload
        return payload

    def _matrix_payload(self, members: tuple[str, ...]) -> dict:
        key = (members, self.params.hk_limit)
        hit = self._matrix_cache.get(key)
        if hit is not None:
            return hit
        m = seriation.build_matrix(self.snapshot, list(members), self.params.hk_limit)
        payload = {
            "rows": list(m.rows),
            "cols": list(m.cols),
            "values": [list(row) for row in m.values],
            "objective": float(m.objective),
        }
        self._matrix_cache[key] = payload
        return payload

    def _contribution_payload(self, members: tuple[str, ...]) -> dict | None:
        if self.snapshot.contributions is None:
            return None
        key = members
        if key in self._contribution_cache:
            return self._contribution_cache[key]
        rows = [self.snapshot.contributions[m] for m in members]
        values = [float(sum(r[i] for r in rows) / len(rows)) for i in range(len(self.snapshot.classes))]
        payload = {"values": values}
        self._contribution_cache[key] = payload
        return payload

    def _gap_bundles(self, gap: int, left: LayerClustering, right: LayerClustering):
        key = (gap, _membership_key(left), _membership_key(right), self.params.tau, self.params.stop)
        hit = self._bundle_cache.get(key)
        if hit is not None:
            return hit
        edges = bundling.aggregate_connections(self.snapshot, gap, left, right)
        bundle_set = bundling.extract_biclusters(
            edges, self.params.tau, self.params.stop, id_prefix=f"g{gap}b"
        )
        self._bundle_cache[key] = (edges, bundle_set)
        return edges, bundle_set

    def _edge_facet_values(self, gap: int) -> dict:
        key = (gap, self.params.edge_facet)
        hit = self._edge_facet_cache.get(key)
        if hit is not None:
            return hit
        values = bundling.edge_facet(self.snapshot, gap, self.params.edge_facet)
        payload = {eid: float(v) for eid, v in sorted(values.items())}
        self._edge_facet_cache[key] = payload
        return payload

    # --- geometry -----------------------------------------------------------

    def _vertical_order(
        self, clusterings: dict[str, LayerClustering]
    ) -> dict[str, list[str]]:
        """One left-to-right barycenter sweep over cluster stacking order."""
        snapshot = self.snapshot
        order: dict[str, list[str]] = {}
        prev_pos: dict[str, int] = {}
        for i, layer in enumerate(snapshot.display_layers):
            ids = [c.id for c in clusterings[layer].clusters]
            if i == 0:
                placed = ids
            else:
                left = clusterings[snapshot.display_layers[i - 1]]
                edges, _ = self._gap_bundles(i - 1, left, clusterings[layer])
                sources: dict[str, list[int]] = {cid: [] for cid in ids}
                for e in edges:
                    sources[e.target].append(prev_pos[e.source])
                current = {cid: j for j, cid in enumerate(ids)}
                bary = {
                    cid: (sum(ps) / len(ps) if ps else float(current[cid]))
                    for cid, ps in sources.items()
                }
                placed = sorted(ids, key=lambda cid: (bary[cid], current[cid]))
            order[layer] = placed
            prev_pos = {cid: j for j, cid in enumerate(placed)}
        return order

    def _positions(
        self, clusterings: dict[str, LayerClustering], order: dict[str, list[str]]
    ) -> dict[str, bundling.NodeBox]:
        heights: dict[str, float] = {}
        for layer, clustering in clusterings.items():
            for c in clustering.clusters:
                heights[c.id] = UNIT_HEIGHT * len(c.representatives)
        column_heights = {
            layer: sum(heights[cid] for cid in ids) + NODE_GAP * max(0, len(ids) - 1)
            for layer, ids in order.items()
        }
        tallest = max(column_heights.values(), default=0.0)
        positions: dict[str, bundling.NodeBox] = {}
        for i, layer in enumerate(self.snapshot.display_layers):
            x = COLUMN_X0 + i * COLUMN_SPACING
            y = MARGIN_Y + (tallest - column_heights[layer]) / 2.0
            for cid in order[layer]:
                positions[cid] = bundling.NodeBox(x, y, NODE_WIDTH, heights[cid])
                y += heights[cid] + NODE_GAP
        return positions

    # --- document -----------------------------------------------------------

    def assemble(
        self,
        clusterings: dict[str, LayerClustering],
        facet_state: FacetState | None = None,
    ) -> dict:
        snapshot = self.snapshot
        state = facet_state or FacetState()
        if state.facet not in FACETS:
            raise ValueError(f"unknown facet {state.facet!r}")
        if state.facet == "contribution" and snapshot.contributions is None:
            raise MissingContributionData("snapshot has no contribution table")
        if state.classes is not None:
            if any(not 0 <= c < len(snapshot.classes) for c in state.classes):
                raise ValueError("class index out of range")
            # callers may hand over a list; cache keys need a hashable form
            state = replace(state, classes=tuple(int(c) for c in state.classes))

        order = self._vertical_order(clusterings)
        positions = self._positions(clusterings, order)

        columns = [
            {"layer": layer, "x": COLUMN_X0 + i * COLUMN_SPACING, "clusters": order[layer]}
            for i, layer in enumerate(snapshot.display_layers)
        ]

        cluster_nodes: dict[str, dict] = {}
        for layer in snapshot.display_layers:
            for c in clusterings[layer].clusters:
                box = positions[c.id]
                cluster_nodes[c.id] = {
                    "layer": layer,
                    "bounds": {"x": box.x, "y": box.y, "width": box.width, "height": box.height},
                    "members": list(c.members),
                    "representatives": list(c.representatives),
                    "packing": self._packing_payload(c.representatives, state.classes),
                    "matrix": self._matrix_payload(c.members),
                    "contribution": self._contribution_payload(c.members),
                }

        gaps = []
        for gap in range(len(snapshot.gap_edges)):
            left = clusterings[snapshot.display_layers[gap]]
            right = clusterings[snapshot.display_layers[gap + 1]]
            edges, bundle_set = self._gap_bundles(gap, left, right)
            nodes, curves = bundling.bundle_geometry(
                bundle_set, edges, positions, gap_label=f"g{gap}"
            )
            gaps.append(
                {
                    "gap": gap,
                    "left": snapshot.display_layers[gap],
                    "right": snapshot.display_layers[gap + 1],
                    "tau": float(bundle_set.tau),
                    "stop": float(bundle_set.stop),
                    "biclusters": [
                        {
                            "id": b.id,
                            "sign": b.sign,
                            "anchor": float(b.anchor),
                            "inputs": list(b.inputs),
                            "outputs": list(b.outputs),
                            "pairs": [[s, t] for s, t in b.owned],
                            "posNegRatio": float(b.pos_neg_ratio),
                        }
                        for b in bundle_set.biclusters
                    ],
                    "nodes": [
                        {
                            "id": n.id,
                            "bicluster": n.bicluster,
                            "x": n.x,
                            "y": n.y,
                            "width": n.width,
                            "height": n.height,
                            "posNegRatio": float(n.pos_neg_ratio),
                        }
                        for n in nodes
                    ],
                    "curves": [
                        {
                            "bicluster": c.bicluster,
                            "cluster": c.cluster,
                            "side": c.side,
                            "sign": c.sign,
                            "weight": float(c.weight),
                            "points": [[float(x), float(y)] for x, y in c.points],
                            "hidden": c.hidden,
                        }
                        for c in curves
                    ],
                    "edgeFacet": {
                        "kind": self.params.edge_facet,
                        "values": self._edge_facet_values(gap),
                    },
                }
            )

        highlight = {}
        for layer in snapshot.display_layers:
            hi, lo = filter_by_classes(
                snapshot,
                layer,
                None if state.classes is None else list(state.classes),
                state.quantile,
            )
            highlight[layer] = {"highlighted": list(hi), "translucent": list(lo)}

        series: dict[str, list[dict] | None] = {}
        for kind, table in (
            ("avgGradient", snapshot.gradients),
            ("avgRelChange", snapshot.prev_weights),
        ):
            series[kind] = debug_series(snapshot, kind) if table is not None else None

        return {
            "schema": "layout.v1",
            "snapshot": snapshot.id,
            "classes": list(snapshot.classes),
            "params": {
                "method": self.params.method,
                "k": self.params.k,
                "bandwidth": self.params.bandwidth,
                "seed": self.params.seed,
                "reprCount": self.params.repr_count,
                "nPack": self.params.n_pack,
                "hkLimit": self.params.hk_limit,
                "tau": self.params.tau,
                "stop": self.params.stop,
                "edgeFacet": self.params.edge_facet,
                "importanceMode": self.params.importance_mode,
            },
            "facetState": {
                "facet": state.facet,
                "classes": None if state.classes is None else list(state.classes),
                "quantile": state.quantile,
            },
            "columns": columns,
            "clusterNodes": cluster_nodes,
            "gaps": gaps,
            "highlight": highlight,
            "debugSeries": series,
        }


def assemble(
    snapshot: NetworkSnapshot,
    params: LayoutParams | None = None,
    facet_state: FacetState | None = None,
    clusterings: dict[str, LayerClustering] | None = None,
) -> dict:
    """One-shot document build; a pure function of its arguments."""
    params = params or LayoutParams()
    assembler = Assembler(snapshot, params)
    if clusterings is None:
        clusterings = initial_clusterings(snapshot, params)
    return assembler.assemble(clusterings, facet_state)


def serialize_document(doc: dict) -> bytes:
    """Canonical byte form: sorted keys, no whitespace, repr floats."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


# --- interactive session state -----------------------------------------------


@dataclass
class SessionState:
    snapshot: NetworkSnapshot
    params: LayoutParams
    facet_state: FacetState
    clusterings: dict[str, LayerClustering]
    assembler: Assembler

    @classmethod
    def create(
        cls,
        snapshot: NetworkSnapshot,
        params: LayoutParams | None = None,
        facet_state: FacetState | None = None,
    ) -> "SessionState":
        params = params or LayoutParams()
        return cls(
            snapshot,
            params,
            facet_state or FacetState(),
            initial_clusterings(snapshot, params),
            Assembler(snapshot, params),
        )

    def document(self) -> dict:
        return self.assembler.assemble(self.clusterings, self.facet_state)


def _layer_of_cluster(state: SessionState, cluster_id: str) -> str:
    for layer, clustering in state.clusterings.items():
        if any(c.id == cluster_id for c in clustering.clusters):
            return layer
    raise UnknownTargetCluster(f"no cluster {cluster_id!r} in any display layer")


def apply_interaction(state: SessionState, command: dict) -> dict:
    """Apply one user command in place and return the rebuilt document.

    Payloads for untouched clusters and gaps come from the assembler's
    memos, so the rebuild is proportional to what the command changed.
    """
    kind = command.get("type")
    if kind == "moveNeuron":
        neuron = command["neuron"]
        layer = state.snapshot.layer_of.get(neuron)
        if layer is None or layer not in state.clusterings:
            raise UnknownNeuron(f"neuron {neuron!r} is not in any display layer")
        state.clusterings[layer] = move_neuron(
            state.snapshot, state.clusterings[layer], neuron, command["target"]
        )
    elif kind == "resizeCluster":
        cluster_id = command["cluster"]
        layer = _layer_of_cluster(state, cluster_id)
        state.clusterings[layer] = resize_cluster_view(
            state.snapshot, state.clusterings[layer], cluster_id, int(command["count"])
        )
    elif kind == "setFacet":
        facet = command["facet"]
        if facet not in FACETS:
            raise ValueError(f"unknown facet {facet!r}")
        state.facet_state = replace(state.facet_state, facet=facet)
    elif kind == "selectClasses":
        classes = command.get("classes")
        if classes is not None:
            classes = tuple(int(c) for c in classes)
            if any(not 0 <= c < len(state.snapshot.classes) for c in classes):
                raise ValueError("class index out of range")
        quantile = float(command.get("quantile", state.facet_state.quantile))
        state.facet_state = replace(state.facet_state, classes=classes, quantile=quantile)
    elif kind == "setTau":
        updates = {}
        for field in ("tau", "stop"):
            if field in command:
                raw = command[field]
                updates[field] = None if raw is None else float(raw)
        state.params = replace(state.params, **updates)
        state.assembler.params = state.params
    elif kind == "setEdgeFacet":
        facet = command["edgeFacet"]
        if facet not in EDGE_FACETS:
            raise ValueError(f"unknown edge facet {facet!r}")
        if facet == "gradient" and state.snapshot.gradients is None:
            raise MissingFacetData("snapshot has no gradient table")
        if facet == "relativeChange" and state.snapshot.prev_weights is None:
            raise MissingFacetData("snapshot has no prev_weights table")
        state.params = replace(state.params, edge_facet=facet)
        state.assembler.params = state.params
    else:
        raise ValueError(f"unknown command type {kind!r}")
    return state.document()
