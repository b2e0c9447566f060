"""Independent reference implementations.

Every nontrivial result in the package is cross-checked against one of
these: deliberately naive double loops, exhaustive enumerations, and
brute-force searches that share no code with the real implementations.
They are kept importable (not test-only) so the `verify` CLI can run the
same cross-checks in-process.
"""

from __future__ import annotations

from itertools import combinations, permutations, product

import numpy as np


def conv_valid_brute(image: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Valid convolution via per-output-pixel quadruple loop.

    image (ic, h, w), kernels (oc, ic, kh, kw) -> (oc, h-kh+1, w-kw+1).
    """
    ic, h, w = image.shape
    oc, _, kh, kw = kernels.shape
    out = np.zeros((oc, h - kh + 1, w - kw + 1))
    for o in range(oc):
        for y in range(h - kh + 1):
            for x in range(w - kw + 1):
                acc = 0.0
                for c in range(ic):
                    for dy in range(kh):
                        for dx in range(kw):
                            acc += image[c, y + dy, x + dx] * kernels[o, c, dy, dx]
                out[o, y, x] = acc
    return out


def max_pool_brute(grid: np.ndarray, size: int) -> np.ndarray:
    c, h, w = grid.shape
    out = np.zeros((c, h // size, w // size))
    for ch in range(c):
        for y in range(h // size):
            for x in range(w // size):
                best = -np.inf
                for dy in range(size):
                    for dx in range(size):
                        best = max(best, grid[ch, y * size + dy, x * size + dx])
                out[ch, y, x] = best
    return out


def class_mean_brute(per_sample: np.ndarray, class_of: np.ndarray, n_classes: int) -> np.ndarray:
    n_neurons, n_samples = per_sample.shape
    out = np.zeros((n_neurons, n_classes))
    for i in range(n_neurons):
        for c in range(n_classes):
            total, count = 0.0, 0
            for j in range(n_samples):
                if class_of[j] == c:
                    total += per_sample[i, j]
                    count += 1
            out[i, c] = total / count
    return out


def best_partition_sse(vectors: np.ndarray, k: int) -> tuple[float, tuple[frozenset, ...]]:
    """Minimum within-cluster SSE over every assignment of n points to k
    groups (empty groups allowed to collapse)."""
    n = len(vectors)
    best = (np.inf, ())
    for assignment in product(range(k), repeat=n):
        sse = 0.0
        groups = []
        for g in range(k):
            idx = [i for i in range(n) if assignment[i] == g]
            if not idx:
                continue
            groups.append(frozenset(idx))
            center = vectors[idx].mean(axis=0)
            sse += float(((vectors[idx] - center) ** 2).sum())
        if sse < best[0] - 1e-12:
            best = (sse, tuple(sorted(groups, key=min)))
    return best


def best_path_exhaustive(sim: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Max-similarity Hamiltonian path by trying every permutation."""
    n = sim.shape[0]
    if n == 0:
        return (), 0.0
    best_order, best_value = tuple(range(n)), -np.inf
    for perm in permutations(range(n)):
        value = sum(sim[perm[i], perm[i + 1]] for i in range(n - 1))
        if value > best_value:
            best_order, best_value = perm, float(value)
    return best_order, best_value


def min_area_brute(sides: list[int], aspect_cap: int = 4) -> int:
    """Smallest feasible enclosing rectangle area for axis-aligned squares.

    Tries every candidate rectangle in increasing area and, inside each,
    every placement of every square on the integer grid (full backtracking,
    no anchor-point shortcut).
    """
    if not sides:
        return 0
    smax, ssum = max(sides), sum(sides)
    total = sum(s * s for s in sides)
    hi = max(ssum, smax)
    candidates = sorted(
        (
            (w, h)
            for w in range(smax, hi + 1)
            for h in range(smax, hi + 1)
            if w * h >= total and w <= aspect_cap * h and h <= aspect_cap * w
        ),
        key=lambda p: (p[0] * p[1], p[0]),
    )
    order = sorted(sides, reverse=True)

    def fits(width: int, height: int) -> bool:
        occupied = [[False] * width for _ in range(height)]

        def place(i: int) -> bool:
            if i == len(order):
                return True
            s = order[i]
            for y in range(height - s + 1):
                for x in range(width - s + 1):
                    if any(
                        occupied[y + dy][x + dx]
                        for dy in range(s)
                        for dx in range(s)
                    ):
                        continue
                    for dy in range(s):
                        for dx in range(s):
                            occupied[y + dy][x + dx] = True
                    if place(i + 1):
                        return True
                    for dy in range(s):
                        for dx in range(s):
                            occupied[y + dy][x + dx] = False
            return False

        return place(0)

    for w, h in candidates:
        if fits(w, h):
            return w * h
    raise AssertionError("no feasible candidate rectangle")


def group_mean_brute(rows: list[tuple[str, str, float]]) -> dict[tuple[str, str], tuple[float, float, int, int]]:
    """(source, target) -> (posMean, negMean, nPos, nNeg), zeros skipped."""
    out: dict[tuple[str, str], tuple[float, float, int, int]] = {}
    keys = []
    for s, t, _ in rows:
        if (s, t) not in keys:
            keys.append((s, t))
    for key in keys:
        pos = [w for s, t, w in rows if (s, t) == key and w > 0]
        neg = [w for s, t, w in rows if (s, t) == key and w < 0]
        if not pos and not neg:
            continue
        out[key] = (
            sum(pos) / len(pos) if pos else 0.0,
            sum(neg) / len(neg) if neg else 0.0,
            len(pos),
            len(neg),
        )
    return out


def maximal_cross_products(pairs: list[tuple[str, str]]) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """All maximal complete sub-bipartite graphs, by closure of every
    nonempty source subset."""
    sources = sorted({s for s, _ in pairs})
    pair_set = set(pairs)
    found = set()
    for r in range(1, len(sources) + 1):
        for subset in combinations(sources, r):
            shared = [
                t
                for t in sorted({t for _, t in pairs})
                if all((s, t) in pair_set for s in subset)
            ]
            if not shared:
                continue
            closure = tuple(
                s for s in sources if all((s, t) in pair_set for t in shared)
            )
            found.add((closure, tuple(shared)))
    return sorted(found)


def biclusters_brute(
    cluster_edges,
    tau: float | None = None,
    stop: float | None = None,
    tau_factor: float = 0.25,
    stop_factor: float = 0.1,
) -> list[tuple[str, tuple[str, ...], tuple[str, ...], tuple[tuple[str, str], ...]]]:
    """Round-based extraction where the mining step is the subset-closure
    enumeration above instead of level-wise itemset growth."""
    avail: dict[tuple[str, str], dict[str, float]] = {}
    for e in cluster_edges:
        comp = {}
        if e.w_pos > 0.0:
            comp["positive"] = e.w_pos
        if e.w_neg < 0.0:
            comp["negative"] = -e.w_neg
        if comp:
            avail[(e.source, e.target)] = comp

    def current_max():
        best = None
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
    tau = tau_factor * initial if tau is None else tau
    stop = stop_factor * initial if stop is None else stop

    out = []
    while True:
        anchor = current_max()
        if anchor is None or anchor[0] < stop:
            break
        w_max, sign = anchor
        selected = [
            key for key, comp in avail.items() if sign in comp and abs(comp[sign] - w_max) < tau
        ]
        concepts = maximal_cross_products(selected)
        promoted = [c for c in concepts if len(c[0]) >= 2 or len(c[1]) >= 2]
        promoted.sort(key=lambda c: (-(len(c[0]) * len(c[1])), c[0], c[1]))
        owned = set()
        for ins, outs in promoted:
            pairs = tuple((s, t) for s in ins for t in outs if (s, t) not in owned)
            if not pairs:
                continue
            owned.update(pairs)
            out.append(
                (
                    sign,
                    tuple(sorted({s for s, _ in pairs})),
                    tuple(sorted({t for _, t in pairs})),
                    pairs,
                )
            )
        for key in selected:
            comp = avail[key]
            del comp[sign]
            if not comp:
                del avail[key]
    return out


def crossing_count(
    edges: list[tuple[str, str]], left_pos: dict[str, int], right_pos: dict[str, int]
) -> int:
    count = 0
    for (a, x), (b, y) in combinations(edges, 2):
        if (left_pos[a] - left_pos[b]) * (right_pos[x] - right_pos[y]) < 0:
            count += 1
    return count


def rects_overlap(ax, ay, aw, ah, bx, by, bw, bh, eps: float = 1e-9) -> bool:
    return ax < bx + bw - eps and bx < ax + aw - eps and ay < by + bh - eps and by < ay + ah - eps


def packing_violations(packing) -> list[str]:
    """Geometric defects of a Packing: out-of-bounds or overlapping rects."""
    problems = []
    rects = [
        (r.neuron, r.x, r.y, r.side * r.scale, r.side * r.scale) for r in packing.rects
    ]
    for name, x, y, w, h in rects:
        if x < -1e-9 or y < -1e-9 or x + w > packing.width + 1e-9 or y + h > packing.height + 1e-9:
            problems.append(f"{name} escapes bounds")
    for (na, xa, ya, wa, ha), (nb, xb, yb, wb, hb) in combinations(rects, 2):
        if rects_overlap(xa, ya, wa, ha, xb, yb, wb, hb):
            problems.append(f"{na} overlaps {nb}")
    return problems
