# cython: boundscheck=False, wraparound=False, cdivision=True
"""All-pairs BFS over the undirected view of a labeled graph.

Hot kernel behind path extraction: for every source node, a breadth-first
search recording, per reached node, the predecessor node and the index of
the edge used to reach it. Neighbor order is the caller-supplied adjacency
order, which fixes the tie-break among equal-length paths.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def all_pairs_bfs(cnp.int32_t[::1] indptr,
                  cnp.int32_t[::1] neighbors,
                  cnp.int32_t[::1] via_edge):
    """Run a BFS from every node of a CSR-encoded undirected graph.

    Returns (dist, pred_node, pred_edge), each an (n, n) int32 array
    indexed [source, node]; unreached entries are -1.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist_arr = np.full((n, n), -1, dtype=np.int32)
    pnode_arr = np.full((n, n), -1, dtype=np.int32)
    pedge_arr = np.full((n, n), -1, dtype=np.int32)
    cdef cnp.int32_t[:, ::1] dist = dist_arr
    cdef cnp.int32_t[:, ::1] pnode = pnode_arr
    cdef cnp.int32_t[:, ::1] pedge = pedge_arr
    queue_arr = np.empty(n, dtype=np.int32)
    cdef cnp.int32_t[::1] queue = queue_arr
    cdef Py_ssize_t src, head, tail, u, k, v

    for src in range(n):
        head = 0
        tail = 0
        queue[tail] = <cnp.int32_t> src
        tail += 1
        dist[src, src] = 0
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                v = neighbors[k]
                if dist[src, v] < 0:
                    dist[src, v] = dist[src, u] + 1
                    pnode[src, v] = <cnp.int32_t> u
                    pedge[src, v] = via_edge[k]
                    queue[tail] = <cnp.int32_t> v
                    tail += 1
    return dist_arr, pnode_arr, pedge_arr
