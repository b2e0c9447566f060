"""Similarity graphs and greedy-modularity splitting.

Both the feature packer and the matrix seriation need to break large neuron
sets into workable pieces. They share this splitter: build a graph whose
edge weights are clamped cosine similarities, find communities by greedy
modularity maximization, and recurse until every leaf is under a size
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; any zero vector yields 0 by convention."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.sqrt((u * u).sum()))
    nv = float(np.sqrt((v * v).sum()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float((u * v).sum() / (nu * nv))


def similarity_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities with the zero-vector convention."""
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.sqrt((vectors * vectors).sum(axis=1))
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = vectors / safe[:, None]
    sims = unit @ unit.T
    sims[norms == 0.0, :] = 0.0
    sims[:, norms == 0.0] = 0.0
    return sims


@dataclass(frozen=True)
class SplitNode:
    """A node of the split hierarchy; members index into the caller's list."""

    members: tuple[int, ...]
    children: tuple["SplitNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["SplitNode"]:
        if self.is_leaf:
            return [self]
        out: list[SplitNode] = []
        for child in self.children:
            out.extend(child.leaves())
        return out


def _fallback_halves(members: tuple[int, ...], vectors: np.ndarray) -> list[tuple[int, ...]]:
    """Deterministic bisection for graphs modularity refuses to split."""
    centroid = vectors[list(members)].mean(axis=0)
    ranked = sorted(
        members, key=lambda i: (float(((vectors[i] - centroid) ** 2).sum()), i)
    )
    mid = (len(ranked) + 1) // 2
    return [tuple(sorted(ranked[:mid])), tuple(sorted(ranked[mid:]))]


def modularity_communities(members: tuple[int, ...], sims: np.ndarray) -> list[tuple[int, ...]]:
    """Greedy modularity partition of one member set.

    Edge weights are max(0, cosine similarity); integer node labels keep the
    underlying greedy agglomeration deterministic across runs.
    """
    graph = nx.Graph()
    graph.add_nodes_from(members)
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            i, j = members[a], members[b]
            w = max(0.0, float(sims[i, j]))
            if w > 0.0:
                graph.add_edge(i, j, weight=w)
    if graph.number_of_edges() == 0:
        return [(i,) for i in members]
    communities = nx.community.greedy_modularity_communities(graph, weight="weight")
    parts = [tuple(sorted(c)) for c in communities]
    parts.sort(key=lambda p: p[0])
    return parts


def split_tree(
    members: tuple[int, ...], vectors: np.ndarray, threshold: int,
    sims: np.ndarray | None = None,
) -> SplitNode:
    """Recursively split until every leaf has fewer than `threshold` members."""
    members = tuple(sorted(members))
    if len(members) < threshold or len(members) <= 1:  # singletons cannot split
        return SplitNode(members)
    if sims is None:
        sims = similarity_matrix(vectors)
    parts = modularity_communities(members, sims)
    if len(parts) == 1:
        parts = _fallback_halves(members, vectors)
    children = tuple(split_tree(p, vectors, threshold, sims) for p in parts)
    return SplitNode(members, children)
