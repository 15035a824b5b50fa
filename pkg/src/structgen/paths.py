"""Structural paths between concept pairs.

For an ordered pair (i, j) the structural path is the sequence of edge
labels along a shortest undirected path from node i to node j, each label
annotated with a direction symbol: "↑" when the step climbs from a child to
its parent (against the edge), "↓" when it descends from parent to child.
The pair (i, i) gets the distinguished path [None-label].

The all-pairs BFS behind this is the preprocessing hot loop; a compiled
kernel is used when available and a pure-Python twin otherwise (see
``benchmarks/bench_paths.py`` for the comparison).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amr import AmrGraph

try:  # compiled kernel, built by setup.py
    from . import _pathkernel as _kernel

    KERNEL = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _pathkernel_py as _kernel

    KERNEL = "python"

from . import _pathkernel_py

UP = "↑"
DOWN = "↓"
NONE_LABEL = "None"
NONE_PATH: tuple[str, ...] = (NONE_LABEL,)


@dataclass
class PathMatrix:
    """n x n table of structural label sequences between ordered node pairs."""

    order: tuple[str, ...]  # node ids, position -> graph node
    entries: list[list[tuple[str, ...]]]

    @property
    def n(self) -> int:
        return len(self.order)

    def entry(self, i: int, j: int) -> tuple[str, ...]:
        return self.entries[i][j]

    def entry_by_id(self, a: str, b: str) -> tuple[str, ...]:
        i = self.order.index(a)
        j = self.order.index(b)
        return self.entries[i][j]


def flip_label(label: str) -> str:
    if label.endswith(UP):
        return label[:-1] + DOWN
    if label.endswith(DOWN):
        return label[:-1] + UP
    return label


def _csr_adjacency(g: AmrGraph, index: dict[str, int]):
    """Undirected CSR adjacency; per node, incident edges in source order.

    ``via_edge`` packs edge index and traversal direction as 2*e + is_up.
    """
    n = len(index)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (src, _, tgt) in enumerate(g.edges):
        s, t = index[src], index[tgt]
        adj[s].append((t, 2 * e))      # parent -> child: down
        adj[t].append((s, 2 * e + 1))  # child -> parent: up
    indptr = np.zeros(n + 1, dtype=np.int32)
    neighbors = np.empty(sum(len(a) for a in adj), dtype=np.int32)
    via_edge = np.empty_like(neighbors)
    pos = 0
    for u, items in enumerate(adj):
        for v, code in items:
            neighbors[pos] = v
            via_edge[pos] = code
            pos += 1
        indptr[u + 1] = pos
    return indptr, neighbors, via_edge


def extract_paths(
    g: AmrGraph,
    order: list[str] | tuple[str, ...],
    max_len: int = 4,
    kernel=None,
) -> PathMatrix:
    """Build the PathMatrix over ``order`` with paths truncated to ``max_len``.

    Ties among equal-length shortest paths break by BFS with neighbors in
    edge source order; the (j, i) entry mirrors (i, j) with directions
    flipped so the matrix stays symmetric under reversal.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if set(order) != set(g.nodes):
        raise ValueError("order must cover exactly the graph's nodes")
    index = {nid: i for i, nid in enumerate(order)}
    n = len(order)
    indptr, neighbors, via_edge = _csr_adjacency(g, index)
    bfs = kernel or _kernel.all_pairs_bfs
    dist, pnode, pedge = bfs(indptr, neighbors, via_edge)

    labels = [rel for _, rel, _ in g.edges]
    entries: list[list[tuple[str, ...]]] = [[NONE_PATH] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < 0:
                raise ValueError(
                    f"nodes {order[i]!r} and {order[j]!r} are disconnected"
                )
            path = []
            v = j
            while v != i:
                code = int(pedge[i, v])
                rel = labels[code >> 1]
                path.append(rel + (UP if code & 1 else DOWN))
                v = int(pnode[i, v])
            path.reverse()
            forward = tuple(path)
            backward = tuple(flip_label(lab) for lab in reversed(forward))
            entries[i][j] = forward[:max_len]
            entries[j][i] = backward[:max_len]
    return PathMatrix(order=tuple(order), entries=entries)


def mask_indirect(pm: PathMatrix, g: AmrGraph) -> PathMatrix:
    """Replace every entry between indirectly connected pairs with the
    None-path; single-edge pairs and the diagonal are untouched."""
    index = {nid: i for i, nid in enumerate(pm.order)}
    direct = set()
    for src, _, tgt in g.edges:
        direct.add((index[src], index[tgt]))
        direct.add((index[tgt], index[src]))
    entries = [
        [
            pm.entries[i][j] if i == j or (i, j) in direct else NONE_PATH
            for j in range(pm.n)
        ]
        for i in range(pm.n)
    ]
    return PathMatrix(order=pm.order, entries=entries)


def bfs_python(indptr, neighbors, via_edge):
    """Pure-Python BFS kernel, importable regardless of which twin won the
    import-time selection (used by tests and the benchmark)."""
    return _pathkernel_py.all_pairs_bfs(indptr, neighbors, via_edge)
