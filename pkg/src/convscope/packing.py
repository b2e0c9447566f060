"""Learned-feature rectangle packing.

Each representative neuron becomes a square whose side (1, 2, or 3) encodes
its importance tercile. Up to N_PACK squares are packed exactly: enclosing
rectangles are tried in increasing area (width as the tie-break, aspect
capped at 4:1) with a complete anchor-point search, so the first feasible
rectangle has minimum area. Larger sets are split by modularity, each leaf
gets a proportional treemap region, and leaf packings are offset (shrunk
uniformly when a thin region demands it) into their regions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyClassSet, InsufficientArea, MissingContributionData
from .modularity import split_tree
from .snapshot import NetworkSnapshot

N_PACK = 12
SLACK = 1.2
ASPECT_CAP = 4


def importance(
    snapshot: NetworkSnapshot,
    neurons: list[str],
    mode: str = "avg",
    class_indices: list[int] | None = None,
) -> np.ndarray:
    """Per-neuron importance over the selected class set.

    'avg' and 'max' reduce the activation vector; 'contribution' averages
    the snapshot's contribution scores and requires them to be present.
    """
    if class_indices is None:
        class_indices = list(range(len(snapshot.classes)))
    if len(class_indices) == 0:
        raise EmptyClassSet("class selection is empty")
    if mode == "contribution":
        if snapshot.contributions is None:
            raise MissingContributionData("snapshot has no contribution table")
        rows = []
        for n in neurons:
            row = snapshot.contributions.get(n)
            if row is None:
                raise MissingContributionData(f"no contribution scores for neuron {n!r}")
            rows.append(row[class_indices].mean())
        return np.asarray(rows)
    if mode not in ("avg", "max"):
        raise ValueError(f"unknown importance mode {mode!r}")
    block = np.stack([snapshot.activations[n][class_indices] for n in neurons])
    return block.mean(axis=1) if mode == "avg" else block.max(axis=1)


def quantize_sizes(importances: np.ndarray) -> np.ndarray:
    """Map importances onto square sides {1, 2, 3} by tercile.

    Equal importances all land on side 2; otherwise the mapping is monotone
    in the raw importance.
    """
    imp = np.asarray(importances, dtype=np.float64)
    if imp.size == 0:
        return np.zeros(0, dtype=int)
    if float(imp.max() - imp.min()) == 0.0:
        return np.full(imp.size, 2, dtype=int)
    t1, t2 = np.quantile(imp, [1.0 / 3.0, 2.0 / 3.0])
    return (1 + (imp > t1).astype(int) + (imp > t2).astype(int)).astype(int)


@dataclass(frozen=True)
class PatchRect:
    neuron: str
    side: int          # quantized side, importance tier
    x: float           # cluster coordinates
    y: float
    scale: float = 1.0  # display edge length is side * scale


@dataclass(frozen=True)
class Packing:
    width: float
    height: float
    rects: tuple[PatchRect, ...]
    utilization: float


def _candidates(total: int, smax: int, ssum: int):
    pairs = []
    hi = max(ssum, smax)
    for w in range(smax, hi + 1):
        for h in range(smax, hi + 1):
            if w * h >= total and w <= ASPECT_CAP * h and h <= ASPECT_CAP * w:
                pairs.append((w, h))
    pairs.sort(key=lambda p: (p[0] * p[1], p[0]))
    return pairs


def _try_fill(width: int, height: int, sides: list[int]) -> list[tuple[int, int, int]] | None:
    """Complete anchor-point search; returns (x, y, side) placements or None.

    At the first empty cell (row-major) either some remaining square is
    anchored there or the cell is written off as waste; the waste budget is
    the candidate area minus the total square area.
    """
    grid = [[False] * width for _ in range(height)]
    remaining: dict[int, int] = {}
    for s in sides:
        remaining[s] = remaining.get(s, 0) + 1
    order = sorted(remaining, reverse=True)
    placements: list[tuple[int, int, int]] = []
    budget = width * height - sum(s * s for s in sides)

    def first_empty() -> tuple[int, int] | None:
        for y in range(height):
            row = grid[y]
            for x in range(width):
                if not row[x]:
                    return x, y
        return None

    def fits(x: int, y: int, s: int) -> bool:
        if x + s > width or y + s > height:
            return False
        for yy in range(y, y + s):
            row = grid[yy]
            for xx in range(x, x + s):
                if row[xx]:
                    return False
        return True

    def mark(x: int, y: int, s: int, value: bool) -> None:
        for yy in range(y, y + s):
            for xx in range(x, x + s):
                grid[yy][xx] = value

    def search(left: int, budget: int) -> bool:
        if left == 0:
            return True
        cell = first_empty()
        if cell is None:
            return False
        x, y = cell
        for s in order:
            if remaining[s] and fits(x, y, s):
                remaining[s] -= 1
                mark(x, y, s, True)
                placements.append((x, y, s))
                if search(left - 1, budget):
                    return True
                placements.pop()
                mark(x, y, s, False)
                remaining[s] += 1
        if budget > 0:
            grid[y][x] = True
            if search(left, budget - 1):
                return True
            grid[y][x] = False
        return False

    return placements if search(len(sides), budget) else None


def pack_exact(items: list[tuple[str, int]]) -> Packing:
    """Minimum-area packing of up to N_PACK quantized squares.

    `items` are (neuron, side) pairs; identical sides are assigned to
    placements in the callers' order, so the result is deterministic.
    """
    if not items:
        return Packing(0.0, 0.0, (), 0.0)
    sides = [s for _, s in items]
    total = sum(s * s for s in sides)
    for w, h in _candidates(total, max(sides), sum(sides)):
        placements = _try_fill(w, h, sides)
        if placements is None:
            continue
        by_side: dict[int, list[str]] = {}
        for neuron, s in items:
            by_side.setdefault(s, []).append(neuron)
        taken: dict[int, int] = {s: 0 for s in by_side}
        rects = []
        for x, y, s in placements:
            neuron = by_side[s][taken[s]]
            taken[s] += 1
            rects.append(PatchRect(neuron, s, float(x), float(y)))
        return Packing(float(w), float(h), tuple(rects), total / (w * h))
    raise RuntimeError("no feasible enclosing rectangle (unreachable for capped inputs)")


@dataclass(frozen=True)
class Region:
    x: float
    y: float
    width: float
    height: float


def _leaf_demand(leaf_items: list[tuple[str, int]]) -> float:
    return SLACK * sum(s * s for _, s in leaf_items)


def allocate_areas(
    leaves: list[list[tuple[str, int]]],
    tree,
    bounds: Region,
) -> list[Region]:
    """Slice-and-dice treemap regions, one per leaf of the split tree.

    Cuts run across the longer side of each rectangle; child extents share
    their boundaries, so regions tile the bounds exactly with areas
    proportional to leaf demand.
    """
    demand_by_leaf = [_leaf_demand(items) for items in leaves]
    total = sum(demand_by_leaf)
    if bounds.width * bounds.height + 1e-9 < total:
        raise InsufficientArea(
            f"bounds area {bounds.width * bounds.height:.3f} below total demand {total:.3f}"
        )

    leaf_nodes = tree.leaves()
    demand_of = {id(node): demand_by_leaf[i] for i, node in enumerate(leaf_nodes)}

    def subtree_demand(node) -> float:
        if node.is_leaf:
            return demand_of[id(node)]
        return sum(subtree_demand(c) for c in node.children)

    regions: dict[int, Region] = {}

    def cut(node, rect: Region) -> None:
        if node.is_leaf:
            regions[id(node)] = rect
            return
        weights = [subtree_demand(c) for c in node.children]
        total_w = sum(weights)
        horizontal = rect.width >= rect.height  # cut across the longer side
        length = rect.width if horizontal else rect.height
        start = rect.x if horizontal else rect.y
        cum = 0.0
        edges = [start]
        for w in weights:
            cum += w
            edges.append(start + length * (cum / total_w))
        edges[-1] = start + length  # close exactly despite float accumulation
        for child, a, b in zip(node.children, edges[:-1], edges[1:]):
            if horizontal:
                cut(child, Region(a, rect.y, b - a, rect.height))
            else:
                cut(child, Region(rect.x, a, rect.width, b - a))

    cut(tree, bounds)
    return [regions[id(node)] for node in leaf_nodes]


def pack_cluster(
    snapshot: NetworkSnapshot,
    neurons: list[str],
    mode: str = "avg",
    class_indices: list[int] | None = None,
    n_pack: int = N_PACK,
) -> Packing:
    """Pack one cluster's representative squares.

    At most n_pack squares go straight to the exact packer. Bigger sets are
    split by modularity into leaves below n_pack, every leaf is packed
    exactly, and leaf packings are placed into proportional treemap regions
    of a square canvas, shrinking uniformly when a region is too thin.
    """
    imps = importance(snapshot, neurons, mode, class_indices)
    sides = quantize_sizes(imps)
    items = list(zip(neurons, (int(s) for s in sides)))
    if len(items) <= n_pack:
        return pack_exact(items)

    vectors = np.stack([snapshot.activations[n] for n in neurons])
    tree = split_tree(tuple(range(len(neurons))), vectors, n_pack)
    leaf_nodes = tree.leaves()
    leaves = [[items[i] for i in node.members] for node in leaf_nodes]

    total_demand = sum(_leaf_demand(leaf) for leaf in leaves)
    side = float(np.sqrt(total_demand))
    bounds = Region(0.0, 0.0, side, side)
    regions = allocate_areas(leaves, tree, bounds)

    rects: list[PatchRect] = []
    used = 0.0
    for leaf_items, region in zip(leaves, regions):
        local = pack_exact(leaf_items)
        if local.width == 0.0:
            continue
        scale = min(region.width / local.width, region.height / local.height, 1.0)
        ox = region.x + (region.width - local.width * scale) / 2.0
        oy = region.y + (region.height - local.height * scale) / 2.0
        for r in local.rects:
            rects.append(
                PatchRect(r.neuron, r.side, ox + r.x * scale, oy + r.y * scale, scale)
            )
            used += (r.side * scale) ** 2
    return Packing(side, side, tuple(rects), used / (side * side) if side else 0.0)
