"""Biclustering-based edge bundling between adjacent display layers.

Neuron edges aggregate per cluster pair into a two-part weight (mean of the
strictly positive member weights, mean of the strictly negative ones). The
extractor repeatedly anchors at the strongest remaining component, selects
same-sign components within tau of the anchor, mines all closed itemsets of
the selected bipartite graph, and promotes those spanning at least two
clusters on either side. Promoted biclusters own their covered components;
everything never promoted ends up as a residual edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .clustering import LayerClustering
from .errors import MissingFacetData, MissingPosition
from .snapshot import NetworkSnapshot

EPS = 1e-12
TAU_FACTOR = 0.25
STOP_FACTOR = 0.1
NODE_SPACING = 4.0  # minimum vertical clearance between in-between nodes


@dataclass(frozen=True)
class ClusterEdge:
    source: str  # cluster id in the left layer
    target: str  # cluster id in the right layer
    w_pos: float  # mean of strictly positive member weights, 0 when none
    w_neg: float  # mean of strictly negative member weights, 0 when none
    n_pos: int
    n_neg: int
    member_edge_ids: tuple[str, ...]


def aggregate_connections(
    snapshot: NetworkSnapshot,
    gap: int,
    left: LayerClustering,
    right: LayerClustering,
) -> list[ClusterEdge]:
    """Aggregate one gap's neuron edges per cluster pair.

    Zero-weight member edges are ignored entirely; pairs with no nonzero
    member edge produce no ClusterEdge. Output order follows the cluster
    list orders.
    """
    cluster_of: dict[str, str] = {}
    for c in left.clusters:
        for n in c.members:
            cluster_of[n] = c.id
    for c in right.clusters:
        for n in c.members:
            cluster_of[n] = c.id

    buckets: dict[tuple[str, str], dict] = {}
    for e in snapshot.gap_edges[gap]:
        if e.weight == 0.0:
            continue
        key = (cluster_of[e.source], cluster_of[e.target])
        b = buckets.setdefault(key, {"pos": [], "neg": [], "ids": []})
        (b["pos"] if e.weight > 0.0 else b["neg"]).append(e.weight)
        b["ids"].append(e.id)

    left_order = {c.id: i for i, c in enumerate(left.clusters)}
    right_order = {c.id: i for i, c in enumerate(right.clusters)}
    edges = []
    for (src, tgt) in sorted(buckets, key=lambda k: (left_order[k[0]], right_order[k[1]])):
        b = buckets[(src, tgt)]
        edges.append(
            ClusterEdge(
                src,
                tgt,
                float(np.mean(b["pos"])) if b["pos"] else 0.0,
                float(np.mean(b["neg"])) if b["neg"] else 0.0,
                len(b["pos"]),
                len(b["neg"]),
                tuple(b["ids"]),
            )
        )
    return edges


@dataclass(frozen=True)
class Bicluster:
    id: str
    sign: str  # 'positive' | 'negative'
    anchor: float  # the w_max that seeded the round
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    owned: tuple[tuple[str, str], ...]  # (source, target) cluster pairs it draws
    pos_neg_ratio: float


@dataclass(frozen=True)
class ResidualEdge:
    source: str
    target: str
    sign: str
    weight: float  # signed component value
    hidden: bool


@dataclass(frozen=True)
class BundleSet:
    biclusters: tuple[Bicluster, ...]
    residual: tuple[ResidualEdge, ...]
    tau: float
    stop: float
    initial_w_max: float


def closed_concepts(pairs: list[tuple[str, str]]) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All formal concepts (closed itemsets) of a bipartite pair set.

    Items are target clusters, transactions are source clusters. Grown
    level-wise; an itemset is closed when no single-item extension keeps the
    same cover. Returned as (sorted sources, sorted targets), every
    cross-product pair present in `pairs`.
    """
    targets_of: dict[str, frozenset[str]] = {}
    for s, t in pairs:
        targets_of.setdefault(s, frozenset())
        targets_of[s] = targets_of[s] | {t}
    items = sorted({t for _, t in pairs})
    cover: dict[frozenset[str], frozenset[str]] = {}
    level = []
    for t in items:
        c = frozenset(s for s, ts in targets_of.items() if t in ts)
        if c:
            itemset = frozenset([t])
            cover[itemset] = c
            level.append(itemset)
    while level:
        nxt = []
        seen = set()
        for a, b in combinations(level, 2):
            joined = a | b
            if len(joined) != len(a) + 1 or joined in seen:
                continue
            c = cover[a] & cover[b]
            if c:
                seen.add(joined)
                cover[joined] = c
                nxt.append(joined)
        level = nxt

    concepts = []
    for itemset, c in cover.items():
        closed = True
        for t in items:
            if t not in itemset:
                bigger = cover.get(itemset | {t})
                if bigger is not None and bigger == c:
                    closed = False
                    break
        if closed:
            concepts.append((tuple(sorted(c)), tuple(sorted(itemset))))
    # distinct covers yield distinct closures, but guard against duplicates
    return sorted(set(concepts))


def extract_biclusters(
    cluster_edges: list[ClusterEdge],
    tau: float | None = None,
    stop: float | None = None,
    id_prefix: str = "b",
) -> BundleSet:
    """Round-based bicluster extraction over a gap's cluster edges.

    Each round anchors at the largest remaining component w_max (positive
    preferred on a tie), selects same-sign components with |w - w_max| <
    tau, promotes closed itemsets spanning >= 2 clusters on a side (larger
    coverage first, later overlapping ones keep only unowned pairs), and
    consumes every selected component. Rounds stop when w_max < stop.
    """
    edge_of = {(e.source, e.target): e for e in cluster_edges}
    avail: dict[tuple[str, str], dict[str, float]] = {}
    for e in cluster_edges:
        comp = {}
        if e.w_pos > 0.0:
            comp["positive"] = e.w_pos
        if e.w_neg < 0.0:
            comp["negative"] = -e.w_neg
        if comp:
            avail[(e.source, e.target)] = comp

    def current_max() -> tuple[float, str] | None:
        best: tuple[float, str] | None = None
        for comp in avail.values():
            for sign in ("positive", "negative"):
                w = comp.get(sign)
                if w is None:
                    continue
                if best is None or w > best[0] or (w == best[0] and sign == "positive" and best[1] == "negative"):
                    best = (w, sign)
        return best

    first = current_max()
    initial = first[0] if first else 0.0
    tau = TAU_FACTOR * initial if tau is None else tau
    stop = STOP_FACTOR * initial if stop is None else stop

    biclusters: list[Bicluster] = []
    serial = 0
    while True:
        anchor = current_max()
        if anchor is None or anchor[0] < stop:
            break
        w_max, sign = anchor
        selected = [
            key
            for key, comp in avail.items()
            if sign in comp and abs(comp[sign] - w_max) < tau
        ]
        concepts = closed_concepts(selected)
        promoted = [
            c for c in concepts if len(c[0]) >= 2 or len(c[1]) >= 2
        ]
        promoted.sort(key=lambda c: (-(len(c[0]) * len(c[1])), c[0], c[1]))
        owned_this_round: set[tuple[str, str]] = set()
        for sources, targets in promoted:
            pairs = tuple(
                (s, t) for s in sources for t in targets if (s, t) not in owned_this_round
            )
            # an earlier, larger sibling may own part of the cross product;
            # the concept keeps the rest and is dropped only when emptied
            if not pairs:
                continue
            ins = tuple(sorted({s for s, _ in pairs}))
            outs = tuple(sorted({t for _, t in pairs}))
            owned_this_round.update(pairs)
            n_pos = sum(edge_of[p].n_pos for p in pairs)
            n_neg = sum(edge_of[p].n_neg for p in pairs)
            biclusters.append(
                Bicluster(
                    f"{id_prefix}{serial}",
                    sign,
                    w_max,
                    ins,
                    outs,
                    pairs,
                    n_pos / (n_pos + n_neg) if (n_pos + n_neg) else 0.0,
                )
            )
            serial += 1
        # every selected component is consumed, promoted or not; the
        # unpromoted ones surface later as residual edges
        for key in selected:
            comp = avail[key]
            del comp[sign]
            if not comp:
                del avail[key]

    owned_pairs = {(b.sign, p) for b in biclusters for p in b.owned}
    residual = []
    for e in cluster_edges:
        for sign, w in (("positive", e.w_pos), ("negative", e.w_neg)):
            if w == 0.0:
                continue
            if (sign, (e.source, e.target)) in owned_pairs:
                continue
            residual.append(
                ResidualEdge(e.source, e.target, sign, w, hidden=abs(w) < stop)
            )
    return BundleSet(tuple(biclusters), tuple(residual), tau, stop, initial)


# --- geometry ---------------------------------------------------------------


@dataclass(frozen=True)
class NodeBox:
    x: float
    y: float
    width: float
    height: float

    @property
    def cy(self) -> float:
        return self.y + self.height / 2.0

    @property
    def right(self) -> float:
        return self.x + self.width


@dataclass(frozen=True)
class Curve:
    bicluster: str | None  # None for residual edges
    cluster: str
    side: str  # 'in' (cluster -> node) | 'out' (node -> cluster) | 'direct'
    sign: str
    weight: float  # aggregated magnitude driving stroke width
    points: tuple[tuple[float, float], ...]  # cubic bezier control points
    hidden: bool = False  # residual components below stop start hidden


@dataclass(frozen=True)
class InBetweenNode:
    id: str
    bicluster: str
    x: float
    y: float
    width: float
    height: float
    pos_neg_ratio: float


def _bezier(x0: float, y0: float, x1: float, y1: float) -> tuple[tuple[float, float], ...]:
    xm = (x0 + x1) / 2.0
    return ((x0, y0), (xm, y0), (xm, y1), (x1, y1))


def bundle_geometry(
    bundle_set: BundleSet,
    cluster_edges: list[ClusterEdge],
    positions: dict[str, NodeBox],
    gap_label: str = "g0",
) -> tuple[tuple[InBetweenNode, ...], tuple[Curve, ...]]:
    """Place one in-between node per bicluster and build its curves.

    The node sits at the horizontal midpoint of the gap; its vertical center
    starts at the mean of all member clusters' centers, after which a sweep
    in center order pushes colliding nodes apart so none overlap. Each
    touched cluster gets one aggregated curve per sign present among the
    bicluster's owned components on that side; residual edges become direct
    hidden-by-default curves.
    """
    edge_of = {(e.source, e.target): e for e in cluster_edges}
    placements = []
    for b in bundle_set.biclusters:
        for cid in (*b.inputs, *b.outputs):
            if cid not in positions:
                raise MissingPosition(f"no placed node for cluster {cid!r}")
        by_source: dict[str, float] = {}
        by_target: dict[str, float] = {}
        component = (lambda e: e.w_pos) if b.sign == "positive" else (lambda e: -e.w_neg)
        weights = {p: component(edge_of[p]) for p in b.owned}
        for (s, t), w in weights.items():
            by_source[s] = by_source.get(s, 0.0) + w
            by_target[t] = by_target.get(t, 0.0) + w

        left = max(positions[c].right for c in b.inputs)
        right_x = min(positions[c].x for c in b.outputs)
        incident = {**by_source, **by_target}
        total = sum(incident.values())
        # vertical center = incident-weight mean of member cluster centers
        cy = sum(positions[c].cy * w for c, w in incident.items()) / total
        width = 10.0
        height = 8.0 + 2.0 * (len(b.inputs) + len(b.outputs))
        cx = (left + right_x) / 2.0
        placements.append([b, by_source, by_target, cx, cy, width, height])

    # nodes anchored near the same clusters collide; sweep top-down and push
    # each node below the previous one, keeping center order
    order = sorted(range(len(placements)), key=lambda i: (placements[i][4], placements[i][0].id))
    floor = None
    for i in order:
        _, _, _, _, cy, _, height = placements[i]
        y = cy - height / 2.0
        if floor is not None and y < floor + NODE_SPACING:
            y = floor + NODE_SPACING
        placements[i][4] = y + height / 2.0
        floor = y + height

    nodes = []
    curves: list[Curve] = []
    for b, by_source, by_target, cx, cy, width, height in placements:
        node = InBetweenNode(
            f"{gap_label}:{b.id}", b.id, cx - width / 2.0, cy - height / 2.0,
            width, height, b.pos_neg_ratio,
        )
        nodes.append(node)
        for cid in b.inputs:
            box = positions[cid]
            curves.append(
                Curve(
                    b.id, cid, "in", b.sign, by_source[cid],
                    _bezier(box.right, box.cy, node.x, cy),
                )
            )
        for cid in b.outputs:
            box = positions[cid]
            curves.append(
                Curve(
                    b.id, cid, "out", b.sign, by_target[cid],
                    _bezier(node.x + width, cy, box.x, box.cy),
                )
            )

    for r in bundle_set.residual:
        if r.source not in positions or r.target not in positions:
            raise MissingPosition(f"no placed node for cluster pair {r.source!r} -> {r.target!r}")
        a, bx = positions[r.source], positions[r.target]
        curves.append(
            Curve(None, f"{r.source}->{r.target}", "direct", r.sign, abs(r.weight),
                  _bezier(a.right, a.cy, bx.x, bx.cy), hidden=r.hidden)
        )
    return tuple(nodes), tuple(curves)


def edge_facet(
    snapshot: NetworkSnapshot, gap: int, facet: str, eps: float = EPS
) -> dict[str, float]:
    """Scalar per member edge of one gap for the requested facet."""
    edges = snapshot.gap_edges[gap]
    if facet == "weight":
        return {e.id: e.weight for e in edges}
    if facet == "gradient":
        if snapshot.gradients is None:
            raise MissingFacetData("snapshot has no gradient table")
        return {e.id: abs(snapshot.gradients[e.id]) for e in edges}
    if facet == "relativeChange":
        if snapshot.prev_weights is None:
            raise MissingFacetData("snapshot has no prev_weights table")
        out = {}
        for e in edges:
            prev = snapshot.prev_weights[e.id]
            out[e.id] = abs(e.weight - prev) / (abs(prev) + eps)
        return out
    raise ValueError(f"unknown edge facet {facet!r}")
