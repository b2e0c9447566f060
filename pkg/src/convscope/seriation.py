"""Activation-matrix row ordering.

Rows are ordered so consecutive neurons are as similar as possible: the sum
of cosine similarities along the sequence is maximized. Small sets get the
exact bitmask dynamic program (a maximum-weight Hamiltonian path with free
endpoints); larger sets are split by modularity, ordered recursively, and
concatenated with greedy junction orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooManyRows
from .modularity import cosine_sim, similarity_matrix, split_tree

HK_LIMIT = 18


def path_objective(sim: np.ndarray, order: list[int]) -> float:
    return float(sum(sim[order[i], order[i + 1]] for i in range(len(order) - 1)))


def held_karp_order(sim: np.ndarray, limit: int = HK_LIMIT) -> tuple[list[int], float]:
    """Exact max-similarity path over all rows of a similarity matrix.

    dp[mask, j] is the best path over the rows in `mask` ending at row j.
    Ties resolve to the smallest final endpoint and then to the smallest
    predecessor at each reconstruction step; the returned path starts at its
    smaller end.
    """
    sim = np.asarray(sim, dtype=np.float64)
    n = sim.shape[0]
    if n > limit:
        raise TooManyRows(f"{n} rows exceed the exact-seriation limit {limit}")
    if n == 0:
        return [], 0.0
    if n == 1:
        return [0], 0.0

    full = 1 << n
    masks = np.arange(full, dtype=np.int64)
    pop = np.zeros(full, dtype=np.int8)
    for b in range(n):
        pop += ((masks >> b) & 1).astype(np.int8)

    dp = np.full((full, n), -np.inf)
    parent = np.full((full, n), -1, dtype=np.int8)
    for j in range(n):
        dp[1 << j, j] = 0.0

    for p in range(2, n + 1):
        level = masks[pop == p]
        for j in range(n):
            with_j = level[(level >> j) & 1 == 1]
            if with_j.size == 0:
                continue
            prev = with_j ^ (1 << j)
            cand = dp[prev] + sim[:, j][None, :]  # rows absent from prev stay -inf
            best = cand.argmax(axis=1)
            dp[with_j, j] = cand[np.arange(with_j.size), best]
            parent[with_j, j] = best

    last = int(np.argmax(dp[full - 1]))
    objective = float(dp[full - 1, last])
    order = [last]
    mask = full - 1
    while pop[mask] > 1:
        prev_j = int(parent[mask, order[-1]])
        mask ^= 1 << order[-1]
        order.append(prev_j)
    order.reverse()
    if order[0] > order[-1]:
        order.reverse()
    return order, objective


def _orientations(seq: list[int]) -> tuple[list[int], list[int]]:
    return seq, list(reversed(seq))


def dnc_order(
    vectors: np.ndarray, hk_limit: int = HK_LIMIT
) -> tuple[list[int], float]:
    """Order rows of `vectors`; exact below the limit, divide-and-conquer above.

    Divide: greedy-modularity communities. Conquer: order each community
    recursively. Combine: order communities by exact seriation over their
    centroids, then orient left to right so each junction similarity is
    maximal (the first junction optimizes both sides).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    sim = similarity_matrix(vectors)
    if n <= hk_limit:
        return held_karp_order(sim, limit=hk_limit)

    tree = split_tree(tuple(range(n)), vectors, hk_limit, sim)
    parts = [child.members for child in tree.children]
    if len(parts) == n:
        # all-singleton split: no positive similarities anywhere (typically a
        # block of dead neurons), so no adjacency helps; keep input order
        order = list(range(n))
        return order, path_objective(sim, order)

    ordered_parts: list[list[int]] = []
    for part in parts:
        sub_order, _ = dnc_order(vectors[list(part)], hk_limit)
        ordered_parts.append([part[i] for i in sub_order])

    centroids = np.stack([vectors[list(p)].mean(axis=0) for p in parts])
    part_order, _ = dnc_order(centroids, hk_limit)
    sequence = [ordered_parts[i] for i in part_order]

    result: list[int] = []
    for idx, seq in enumerate(sequence):
        if idx == 0:
            if len(sequence) == 1:
                result.extend(seq)
                continue
            nxt = sequence[1]
            best = None
            for first in _orientations(seq):
                for second in _orientations(nxt):
                    score = cosine_sim(vectors[first[-1]], vectors[second[0]])
                    if best is None or score > best[0]:
                        best = (score, first, second)
            result.extend(best[1])
            sequence[1] = best[2]
        else:
            fwd, rev = _orientations(seq)
            tail = vectors[result[-1]]
            if cosine_sim(tail, vectors[rev[0]]) > cosine_sim(tail, vectors[fwd[0]]):
                result.extend(rev)
            else:
                result.extend(fwd)
    if result[0] > result[-1]:
        result.reverse()
    return result, path_objective(sim, result)


@dataclass(frozen=True)
class ActivationMatrix:
    rows: tuple[str, ...]     # neuron ids, top to bottom
    cols: tuple[str, ...]     # class names in snapshot order
    values: tuple[tuple[float, ...], ...]
    objective: float


def build_matrix(snapshot, members: list[str], hk_limit: int = HK_LIMIT) -> ActivationMatrix:
    """Seriated activation matrix for one cluster's members."""
    layer_name = snapshot.layer_of[members[0]]
    layer = snapshot.layer_by_name[layer_name]
    order_of = {nid: i for i, nid in enumerate(layer.neurons)}
    members = sorted(members, key=lambda m: order_of[m])
    vectors = np.stack([snapshot.activations[m] for m in members])
    order, objective = dnc_order(vectors, hk_limit)
    rows = tuple(members[i] for i in order)
    values = tuple(tuple(float(v) for v in snapshot.activations[r]) for r in rows)
    return ActivationMatrix(rows, tuple(snapshot.classes), values, objective)
