"""Compiled inner loops over CSR tree arrays.

Arrays follow the LabeledTree layout: vertices are 1..n, ``indptr`` has
length n + 2 and slot 0 is an empty dummy vertex.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def bfs(indptr, indices, root, n):
    """Breadth-first order with parents and depths (parent of root is 0)."""
    order = np.empty(n, np.int64)
    parent = np.zeros(n + 1, np.int64)
    depth = np.full(n + 1, -1, np.int64)
    order[0] = root
    depth[root] = 0
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        head += 1
        for j in range(indptr[v], indptr[v + 1]):
            w = indices[j]
            if depth[w] < 0:
                depth[w] = depth[v] + 1
                parent[w] = v
                order[tail] = w
                tail += 1
    return order, parent, depth


@njit(cache=True)
def prufer_decode(seq, n):
    degree = np.ones(n + 1, np.int64)
    degree[0] = 0
    for x in seq:
        degree[x] += 1
    edges = np.empty((n - 1, 2), np.int64)
    ptr = 1
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        x = seq[i]
        edges[i, 0] = leaf
        edges[i, 1] = x
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges[n - 2, 0] = leaf
    edges[n - 2, 1] = n
    return edges


@njit(cache=True)
def prufer_encode(degree, parent, n):
    # parent is taken with respect to the root n
    degree = degree.copy()
    code = np.empty(n - 2, np.int64)
    ptr = 1
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        nxt = parent[leaf]
        code[i] = nxt
        degree[nxt] -= 1
        if degree[nxt] == 1 and nxt < ptr:
            leaf = nxt
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    return code


@njit(cache=True)
def inertia(order, parent, x):
    """Counts (negative, zero) of the diagonal congruent to A - xI.

    Leaf-to-root elimination; when a child value is exactly zero the child
    is set to 2, the parent to -1/2 and the parent is detached from its own
    parent. This keeps exact ties exact instead of dividing by zero.
    """
    n = order.shape[0]
    size = parent.shape[0]
    a = np.empty(size)
    acc = np.zeros(size)
    zero_child = np.zeros(size, np.int64)
    cut = np.zeros(size, np.bool_)
    for i in range(n - 1, -1, -1):
        v = order[i]
        if zero_child[v] != 0:
            a[zero_child[v]] = 2.0
            a[v] = -0.5
            cut[v] = True
        else:
            a[v] = -x - acc[v]
        p = parent[v]
        if p != 0 and not cut[v]:
            if a[v] == 0.0:
                if zero_child[p] == 0:
                    zero_child[p] = v
            else:
                acc[p] += 1.0 / a[v]
    neg = 0
    zero = 0
    for i in range(n):
        val = a[order[i]]
        if val < 0.0:
            neg += 1
        elif val == 0.0:
            zero += 1
    return neg, zero


@njit(cache=True)
def bisect_descending(order, parent, index, lo, hi, abs_tol, max_iter):
    """Bracket the index-th largest eigenvalue (1-based) by bisection.

    Requires at least ``index`` eigenvalues >= lo and fewer than ``index``
    eigenvalues >= hi. Returns the final bracket and the iteration count.
    """
    n = order.shape[0]
    it = 0
    while hi - lo > abs_tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        below, _ = inertia(order, parent, mid)
        if n - below >= index:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it
