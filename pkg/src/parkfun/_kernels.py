"""Compiled inner loops for high-throughput sampling."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def decode_parents(code, n):
    """Largest-leaf Prufer decoding in linear time.

    ``code`` has length ``n - 1`` with entries in ``[0, n]``; returns the parent
    array of the tree on ``{0..n}`` (``parent[0] == -1``).
    """
    deg = np.ones(n + 1, dtype=np.int64)
    for c in code:
        deg[c] += 1
    parent = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    ptr = n
    while deg[ptr] != 1:
        ptr -= 1
    leaf = ptr
    for c in code:
        parent[leaf] = c
        deg[c] -= 1
        if c != 0 and deg[c] == 1 and c > ptr:
            leaf = c
        else:
            ptr -= 1
            while deg[ptr] != 1:
                ptr -= 1
            leaf = ptr
    parent[leaf] = 0
    return parent


@njit(cache=True, nogil=True)
def parent_ranks(parent):
    """Breadth-first rank (1-based, children by increasing label) of each vertex's parent.

    Returns an array of length n with entry ``i - 1`` equal to the rank of
    ``parent[i]``.
    """
    m = parent.shape[0]
    n = m - 1
    nchild = np.zeros(m + 1, dtype=np.int64)
    for v in range(1, m):
        nchild[parent[v] + 1] += 1
    for v in range(m):
        nchild[v + 1] += nchild[v]
    fill = nchild[:m].copy()
    children = np.empty(max(n, 1), dtype=np.int64)
    for v in range(1, m):
        p = parent[v]
        children[fill[p]] = v
        fill[p] += 1
    rank = np.empty(m, dtype=np.int64)
    queue = np.empty(m, dtype=np.int64)
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        rank[u] = head
        for idx in range(nchild[u], nchild[u + 1]):
            queue[tail] = children[idx]
            tail += 1
    places = np.empty(n, dtype=np.int64)
    for i in range(1, m):
        places[i - 1] = rank[parent[i]]
    return places


@njit(cache=True, nogil=True)
def code_to_places(code, n):
    return parent_ranks(decode_parents(code, n))


@njit(cache=True, nogil=True)
def prefix_sum_max(places, k):
    s = 0
    mx = 0
    for i in range(k):
        v = places[i]
        s += v
        if v > mx:
            mx = v
    return s, mx
