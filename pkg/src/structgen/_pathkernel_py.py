"""Pure-Python fallback for the BFS kernel; same contract as the Cython
version in ``_pathkernel.pyx``, selected at import time by ``paths``."""

from collections import deque

import numpy as np


def all_pairs_bfs(indptr, neighbors, via_edge):
    """BFS from every node of a CSR-encoded undirected graph.

    Returns (dist, pred_node, pred_edge), each (n, n) int32 arrays indexed
    [source, node]; unreached entries are -1.
    """
    n = len(indptr) - 1
    dist = np.full((n, n), -1, dtype=np.int32)
    pnode = np.full((n, n), -1, dtype=np.int32)
    pedge = np.full((n, n), -1, dtype=np.int32)
    for src in range(n):
        d = dist[src]
        d[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for k in range(indptr[u], indptr[u + 1]):
                v = neighbors[k]
                if d[v] < 0:
                    d[v] = d[u] + 1
                    pnode[src, v] = u
                    pedge[src, v] = via_edge[k]
                    queue.append(v)
    return dist, pnode, pedge
