"""Uniform labeled trees and Poisson Bienaymé trees, plus degree statistics.

Randomness always comes from a ``numpy.random.Generator``. ``SeededRng``
derives one independent generator per replication index from a master
seed, so results do not depend on how replications are spread over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tree_core import LabeledTree, RootedPlaneTree, prufer_decode


class SeededRng:
    """Master seed plus replication index -> independent substream."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF

    def stream(self, *index: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=tuple(int(i) for i in index))
        return np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"SeededRng({self.master_seed})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.stream()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot make a random generator from {type(rng).__name__}")


# uniform labeled trees

def sample_uniform_tree(n: int, rng) -> LabeledTree:
    """Uniform tree on [n]: decode n-2 iid uniform Prüfer entries."""
    if n < 2:
        raise ValidationError("uniform tree sampling needs n >= 2")
    gen = as_generator(rng)
    return prufer_decode(gen.integers(1, n + 1, size=n - 2), n)


# branching processes

@dataclass(frozen=True)
class BfsQueueProcess:
    """S_0 = 0, S_k = sum_{i<k} (X_i - 1); sigma is the first k with S_k = -1."""

    steps: np.ndarray
    sigma: int | None

    @classmethod
    def from_child_counts(cls, counts) -> "BfsQueueProcess":
        x = np.asarray(counts, dtype=np.int64)
        steps = np.concatenate([[0], np.cumsum(x - 1)])
        hit = np.flatnonzero(steps == -1)
        return cls(steps, int(hit[0]) if hit.size else None)


@dataclass(frozen=True)
class Overflow:
    """Returned instead of a tree when the process outgrows ``node_cap``."""

    node_cap: int


def sample_bienayme(lam: float, rng, node_cap: int = 10**7) -> RootedPlaneTree | Overflow:
    """Family tree of a Poisson(lam) branching process, built breadth-first.

    Offspring counts are drawn in growing chunks and the queue process is
    tracked until it first reaches -1; that prefix is the BFS child-count
    sequence of the tree.
    """
    if not lam > 0:
        raise ValidationError("offspring mean must be positive")
    if node_cap < 1:
        raise ValidationError("node_cap must be at least 1")
    gen = as_generator(rng)
    level = 0
    drawn = 0
    chunk = 64
    pieces = []
    while drawn < node_cap:
        m = min(chunk, node_cap - drawn)
        x = gen.poisson(lam, m)
        s = level + np.cumsum(x - 1)
        hit = np.flatnonzero(s == -1)
        if hit.size:
            pieces.append(x[:hit[0] + 1])
            return RootedPlaneTree(np.concatenate(pieces))
        pieces.append(x)
        level = int(s[-1])
        drawn += m
        chunk *= 2
    return Overflow(node_cap)


def rotate_to_tree(counts: np.ndarray) -> np.ndarray:
    """Cycle-lemma rotation of child counts summing to n - 1 (rows or 1-d).

    Starting right after the first minimum of the partial sums gives the
    unique cyclic shift whose queue process stays >= 0 until step n.
    """
    counts = np.asarray(counts, dtype=np.int64)
    one = counts.ndim == 1
    c = np.atleast_2d(counts)
    n = c.shape[1]
    partial = np.cumsum(c - 1, axis=1)
    start = (np.argmin(partial, axis=1) + 1) % n
    idx = (start[:, None] + np.arange(n)) % n
    out = np.take_along_axis(c, idx, axis=1)
    return out[0] if one else out


def conditioned_child_counts(n: int, size: int, rng) -> np.ndarray:
    """``size`` BFS child-count sequences of Poisson(1) trees conditioned on n nodes.

    iid Poisson(1) counts conditioned to sum to n - 1 are a multinomial
    placement of n - 1 balls into n boxes; rotation then makes them a tree.
    """
    if n < 1:
        raise ValidationError("tree size must be at least 1")
    gen = as_generator(rng)
    if n == 1:
        return np.zeros((size, 1), dtype=np.int64)
    balls = gen.multinomial(n - 1, np.full(n, 1.0 / n), size=size)
    return rotate_to_tree(balls)


def sample_conditioned_bienayme(n: int, rng) -> RootedPlaneTree:
    return RootedPlaneTree(conditioned_child_counts(n, 1, rng)[0])


def absorption_times(reps: int, n_max: int, rng, batch: int = 1 << 20) -> np.ndarray:
    """Absorption time sigma of ``reps`` unconditioned Poisson(1) queue processes.

    Values above n_max are reported as n_max + 1. Only processes that are
    still alive draw new offspring counts.
    """
    gen = as_generator(rng)
    out = np.empty(reps, dtype=np.int64)
    for lo in range(0, reps, batch):
        b = min(batch, reps - lo)
        sigma = np.full(b, n_max + 1, dtype=np.int64)
        alive = np.arange(b)
        level = np.zeros(b, dtype=np.int64)
        for k in range(1, n_max + 1):
            if alive.size == 0:
                break
            level = level + gen.poisson(1.0, alive.size) - 1
            dead = level == -1
            sigma[alive[dead]] = k
            alive = alive[~dead]
            level = level[~dead]
        out[lo:lo + b] = sigma
    return out


def size_probability_estimate(n: int, reps: int, rng) -> tuple[float, float]:
    """Monte Carlo estimate of P(sigma = n) with its standard error."""
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    hits = np.count_nonzero(absorption_times(reps, n, rng) == n)
    p = hits / reps
    return p, math.sqrt(p * (1 - p) / reps)


def size_probability_exact(n: int) -> float:
    """P(sigma = n) = e^{-n} n^{n-1} / n! for the Poisson(1) process."""
    return math.exp(-n + (n - 1) * math.log(n) - math.lgamma(n + 1))


def size_probability_asymptotic(n: int) -> float:
    return 1.0 / (math.sqrt(2 * math.pi) * n ** 1.5)


# degree statistics

def a_star(n: int) -> int:
    """Largest m with m! <= n."""
    if n < 1:
        raise ValidationError("a*(n) needs n >= 1")
    m, f = 1, 1
    while f * (m + 1) <= n:
        m += 1
        f *= m
    return m


@dataclass(frozen=True)
class DegreeStats:
    n: int
    at_least: tuple[int, ...]   # at_least[k] = D_{>=k}, for k = 0..max children
    max_degree: int
    a_star: int

    def d_at_least(self, k: int) -> int:
        return self.at_least[k] if k < len(self.at_least) else 0


def _stats_from_children(children: np.ndarray, max_degree: int) -> DegreeStats:
    n = children.size
    hist = np.bincount(children)
    at_least = np.cumsum(hist[::-1])[::-1]
    return DegreeStats(n, tuple(int(x) for x in at_least), max_degree, a_star(n))


def degree_stats(tree: LabeledTree | RootedPlaneTree, root: int = 1) -> DegreeStats:
    """Children counts with ``root`` as the root (labeled trees) or the plane root."""
    if isinstance(tree, RootedPlaneTree):
        children = np.asarray(tree.child_counts)
        deg = children + 1
        deg[0] -= 1
        return _stats_from_children(children, int(deg.max()) if tree.size > 1 else 0)
    children = np.array(tree.degrees[1:]) - 1
    children[root - 1] += 1
    return _stats_from_children(children, tree.max_degree)


def median_pair(values) -> tuple[int, int]:
    """Lower and upper sample medians."""
    v = np.sort(np.asarray(values))
    m = v.size
    return int(v[(m - 1) // 2]), int(v[m // 2])


def max_degree_sample(n: int, reps: int, rng) -> np.ndarray:
    gen = as_generator(rng)
    return np.array([sample_uniform_tree(n, gen).max_degree for _ in range(reps)])


def empirical_median_max_degree(n: int, reps: int, rng) -> int:
    """Lower sample median of the maximum degree over ``reps`` uniform trees."""
    if reps < 30:
        raise ValidationError("need at least 30 replications for a median estimate")
    return median_pair(max_degree_sample(n, reps, rng))[0]
