"""Immutable labeled trees, the Prüfer codec, distance and cluster queries,
plane embeddings and contour walks.

Vertices are the integers 1..n. Internally a tree is stored in CSR form with
an unused dummy vertex 0, so ``indptr[v]:indptr[v+1]`` slices the sorted
neighbours of ``v`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .errors import ValidationError


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class LabeledTree:
    """A tree on vertex set {1..n} with sorted adjacency lists."""

    __slots__ = ("n", "indptr", "indices", "degrees", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] | np.ndarray, *, _trusted: bool = False):
        n = int(n)
        if n < 1:
            raise ValidationError(f"a tree needs at least one vertex, got n={n}")
        e = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise ValidationError("edges must be pairs of vertex ids")
        if e.shape[0] != n - 1:
            raise ValidationError(f"a tree on {n} vertices has {n - 1} edges, got {e.shape[0]}")
        if not _trusted and e.size:
            if e.min() < 1 or e.max() > n:
                raise ValidationError(f"vertex ids must lie in 1..{n}")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValidationError("self-loop in edge list")
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        perm = np.lexsort((dst, src))
        src, dst = src[perm], dst[perm]
        if not _trusted and src.size:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if np.any(dup):
                raise ValidationError("parallel edges in edge list")
        deg = np.bincount(src, minlength=n + 1)
        indptr = np.zeros(n + 2, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        self.n = n
        self.indptr = _frozen(indptr)
        self.indices = _frozen(dst)
        self.degrees = _frozen(deg)
        if not _trusted and n > 1:
            ncomp, _ = connected_components(self.csr, directed=False)
            if ncomp != 1:
                raise ValidationError("edge list is not connected")

    # construction helpers

    @classmethod
    def from_parents(cls, parent: np.ndarray) -> "LabeledTree":
        """Tree from a parent array indexed by vertex (root has parent 0)."""
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.shape[0] - 1
        child = np.flatnonzero(parent[1:]) + 1
        edges = np.stack([parent[child], child], axis=1)
        return cls(n, edges)

    @classmethod
    def path(cls, n: int) -> "LabeledTree":
        return cls(n, [(i, i + 1) for i in range(1, n)])

    @classmethod
    def star(cls, n: int, center: int = 1) -> "LabeledTree":
        return cls(n, [(center, v) for v in range(1, n + 1) if v != center])

    # queries

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n > 1 else 0

    @property
    def num_leaves(self) -> int:
        return int(np.count_nonzero(self.degrees[1:] == 1))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    @cached_property
    def adjacency(self) -> tuple:
        """Sorted neighbour tuples; entry 0 is an empty placeholder."""
        return tuple(tuple(int(w) for w in self.neighbors(v)) for v in range(self.n + 1))

    def edges(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in self.edge_array().tolist()]

    def edge_array(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n + 1), np.diff(self.indptr))
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """0-based adjacency matrix (float64)."""
        data = np.ones(self.indices.size)
        return sp.csr_matrix((data, self.indices - 1, self.indptr[1:] - self.indptr[1]),
                             shape=(self.n, self.n))

    def bfs(self, root: int):
        """(order, parent, depth) arrays for a breadth-first search from root."""
        check_vertex(self, root)
        return _kernels.bfs(self.indptr, self.indices, root, self.n)

    def __eq__(self, other):
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        if self.n <= 12:
            return f"LabeledTree(n={self.n}, edges={self.edges()})"
        return f"LabeledTree(n={self.n}, max_degree={self.max_degree})"


def check_vertex(tree: LabeledTree, v: int) -> None:
    if not (1 <= int(v) <= tree.n):
        raise ValidationError(f"vertex {v} out of range 1..{tree.n}")


# Prüfer codec

def prufer_decode(seq: Sequence[int], n: int | None = None) -> LabeledTree:
    seq = np.asarray(list(seq), dtype=np.int64)
    if n is None:
        n = seq.size + 2
    if n < 2 or seq.size != n - 2:
        raise ValidationError(f"a Prüfer sequence for n={n} has length {n - 2}")
    if seq.size and (seq.min() < 1 or seq.max() > n):
        raise ValidationError(f"Prüfer entries must lie in 1..{n}")
    if n == 2:
        return LabeledTree(2, [(1, 2)])
    edges = _kernels.prufer_decode(seq, n)
    return LabeledTree(n, edges, _trusted=True)


def prufer_encode(tree: LabeledTree) -> tuple[int, ...]:
    if tree.n < 2:
        raise ValidationError("the Prüfer codec needs n >= 2")
    if tree.n == 2:
        return ()
    _, parent, _ = tree.bfs(tree.n)
    return tuple(int(x) for x in _kernels.prufer_encode(np.array(tree.degrees), parent, tree.n))


# distances and neighbourhoods

def distances_from(tree: LabeledTree, v: int) -> np.ndarray:
    """Distance from v to every vertex; index 0 is a -1 placeholder."""
    _, _, depth = tree.bfs(v)
    return depth


@dataclass(frozen=True)
class NeighborhoodProfile:
    """counts[v, r] = |Γ_r(v)| for r = 0..r_max; maxima[r] = max_v counts[v, r]."""

    counts: np.ndarray
    maxima: tuple[int, ...]

    @property
    def r_max(self) -> int:
        return self.counts.shape[1] - 1

    def sphere(self, v: int, r: int) -> int:
        return int(self.counts[v, r])


def neighborhood_profile(tree: LabeledTree, r_max: int) -> NeighborhoodProfile:
    """Sphere sizes via the non-backtracking walk recurrence.

    In a tree |Γ_r(v)| is the number of non-backtracking walks of length r
    from v, and their row sums obey B_r = A B_{r-1} - (D - I) B_{r-2} for
    r >= 3, with B_2 = A B_1 - B_1.
    """
    if r_max < 1:
        raise ValidationError("r_max must be at least 1")
    n = tree.n
    A = sp.csr_matrix((np.ones(tree.indices.size, dtype=np.int64), tree.indices, tree.indptr),
                      shape=(n + 1, n + 1))
    deg = tree.degrees
    cols = [np.ones(n + 1, dtype=np.int64), deg.copy()]
    for r in range(2, r_max + 1):
        if r == 2:
            nxt = A @ cols[1] - cols[1]
        else:
            nxt = A @ cols[r - 1] - (deg - 1) * cols[r - 2]
        cols.append(np.asarray(nxt, dtype=np.int64))
    counts = np.stack(cols, axis=1)
    counts[0, :] = 0
    counts.setflags(write=False)
    maxima = tuple(int(c) for c in counts[1:].max(axis=0))
    return NeighborhoodProfile(counts, maxima)


def max_sphere(tree: LabeledTree, r: int) -> int:
    """Δ_T^(r), the largest r-th neighbourhood."""
    if r == 0:
        return 1
    return neighborhood_profile(tree, r).maxima[r]


# clusters

def cluster_labels(tree: LabeledTree, threshold: float) -> np.ndarray:
    """Cluster id per vertex (index 0 unused).

    A v-w path stays inside a cluster iff every edge on it has an endpoint of
    degree >= threshold, so clusters are the components of that edge set.
    """
    if threshold <= 0:
        raise ValidationError("cluster threshold must be positive")
    e = tree.edge_array()
    deg = tree.degrees
    keep = (deg[e[:, 0]] >= threshold) | (deg[e[:, 1]] >= threshold)
    e = e[keep] - 1
    g = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(tree.n, tree.n))
    _, labels = connected_components(g, directed=False)
    return np.concatenate([[-1], labels])


def cluster(tree: LabeledTree, v: int, threshold: float) -> frozenset[int]:
    check_vertex(tree, v)
    if threshold <= 0:
        raise ValidationError("cluster threshold must be positive")
    deg = tree.degrees
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        low_x = deg[x] < threshold
        for y in tree.neighbors(x):
            y = int(y)
            if y in seen or (low_x and deg[y] < threshold):
                continue
            seen.add(y)
            stack.append(y)
    return frozenset(seen)


def clusters(tree: LabeledTree, threshold: float) -> list[frozenset[int]]:
    labels = cluster_labels(tree, threshold)
    groups: dict[int, list[int]] = {}
    for v in range(1, tree.n + 1):
        groups.setdefault(int(labels[v]), []).append(v)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def tree_path(tree: LabeledTree, u: int, v: int) -> list[int]:
    """The unique u-v path as a vertex list."""
    _, parent, _ = tree.bfs(u)
    out = [v]
    while out[-1] != u:
        out.append(int(parent[out[-1]]))
    return out[::-1]


# plane trees

class RootedPlaneTree:
    """An ordered rooted tree, stored by its breadth-first child counts.

    Node 0 is the root; nodes are numbered in breadth-first order, so the
    children of node i occupy a contiguous range. The child-count sequence
    determines the plane tree, which makes it a canonical key.
    """

    __slots__ = ("child_counts", "__dict__")

    def __init__(self, child_counts: Sequence[int]):
        c = np.asarray(child_counts, dtype=np.int64)
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("a plane tree needs at least one node")
        if np.any(c < 0):
            raise ValidationError("child counts must be nonnegative")
        walk = np.cumsum(c - 1)
        if walk[-1] != -1 or (c.size > 1 and walk[:-1].min() < 0):
            raise ValidationError("child counts do not describe a single tree in breadth-first order")
        c.setflags(write=False)
        self.child_counts = c

    @property
    def size(self) -> int:
        return int(self.child_counts.size)

    @cached_property
    def _first_child(self) -> np.ndarray:
        out = np.empty(self.size + 1, dtype=np.int64)
        out[0] = 1
        np.cumsum(self.child_counts, out=out[1:])
        out[1:] += 1
        return out

    def children(self, node: int) -> range:
        start = int(self._first_child[node])
        return range(start, start + int(self.child_counts[node]))

    @cached_property
    def parents(self) -> np.ndarray:
        par = np.full(self.size, -1, dtype=np.int64)
        par[1:] = np.repeat(np.arange(self.size), self.child_counts)
        return par

    @cached_property
    def depths(self) -> np.ndarray:
        d = np.zeros(self.size, dtype=np.int64)
        par = self.parents
        for i in range(1, self.size):
            d[i] = d[par[i]] + 1
        return d

    def address(self, node: int) -> tuple[int, ...]:
        """Ulam-Harris address: 1-based child indices from the root."""
        out = []
        par = self.parents
        while node != 0:
            p = int(par[node])
            out.append(node - int(self._first_child[p]) + 1)
            node = p
        return tuple(reversed(out))

    def node_at(self, address: Sequence[int]) -> int:
        node = 0
        for i in address:
            if not 1 <= i <= self.child_counts[node]:
                raise ValidationError(f"no node at address {tuple(address)}")
            node = int(self._first_child[node]) + i - 1
        return node

    def preorder(self) -> list[int]:
        out = []
        stack = [0]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children(x)))
        return out

    def to_labeled_tree(self) -> LabeledTree:
        """Labeled tree with node i carrying label i + 1."""
        par = np.concatenate([[0], self.parents + 1])
        par[1] = 0
        return LabeledTree.from_parents(par)

    @classmethod
    def from_nested(cls, nested) -> "RootedPlaneTree":
        """Build from nested sequences: each node is the list of its children."""
        counts = []
        queue = [nested]
        head = 0
        while head < len(queue):
            node = queue[head]
            head += 1
            counts.append(len(node))
            queue.extend(node)
        return cls(counts)

    def nested(self):
        def build(x):
            return tuple(build(c) for c in self.children(x))
        return build(0)

    def key(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.child_counts)

    def __eq__(self, other):
        if not isinstance(other, RootedPlaneTree):
            return NotImplemented
        return np.array_equal(self.child_counts, other.child_counts)

    def __hash__(self):
        return hash(self.child_counts.tobytes())

    def __repr__(self):
        return f"RootedPlaneTree(size={self.size}, child_counts={self.key() if self.size <= 20 else '...'})"


def plane_embedding(tree: LabeledTree, root: int) -> RootedPlaneTree:
    """Root the tree and order every child list by label."""
    order, _, _ = tree.bfs(root)
    counts = tree.degrees[order] - 1
    counts[0] += 1
    return RootedPlaneTree(counts)


@dataclass(frozen=True)
class Walk:
    vertices: tuple[int, ...]

    def __init__(self, vertices):
        object.__setattr__(self, "vertices", tuple(int(x) for x in vertices))
        if not self.vertices:
            raise ValidationError("a walk has at least one vertex")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def check_walk(tree: LabeledTree, walk: Walk) -> None:
    for v in walk.vertices:
        check_vertex(tree, v)
    for a, b in zip(walk.vertices, walk.vertices[1:]):
        if not tree.has_edge(a, b):
            raise ValidationError(f"walk step {a}->{b} is not an edge")


def contour_walk(tree: RootedPlaneTree) -> Walk:
    """Depth-first contour walk; node i is reported as vertex i + 1."""
    out = [1]
    stack = [(0, iter(tree.children(0)))]
    while stack:
        node, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                out.append(stack[-1][0] + 1)
        else:
            out.append(child + 1)
            stack.append((child, iter(tree.children(child))))
    return Walk(out)


# text formats

def parse_edge_list(text: str) -> LabeledTree:
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer vertex id") from None
    n = max((max(e) for e in edges), default=1)
    return LabeledTree(n, edges)


def format_edge_list(tree: LabeledTree) -> str:
    return "".join(f"{u} {v}\n" for u, v in tree.edges())


def parse_prufer(text: str, n: int | None = None) -> LabeledTree:
    text = text.strip()
    try:
        seq = [int(x) for x in text.split(",")] if text else []
    except ValueError:
        raise ValidationError("Prüfer sequence must be comma-separated integers") from None
    return prufer_decode(seq, n)


def format_prufer(tree: LabeledTree) -> str:
    return ",".join(str(x) for x in prufer_encode(tree))


def read_tree(path: str | Path) -> LabeledTree:
    """Read an edge-list file, or a Prüfer line if the file has a single comma line."""
    text = Path(path).read_text()
    stripped = text.strip()
    if "," in stripped and "\n" not in stripped:
        return parse_prufer(stripped)
    return parse_edge_list(text)
