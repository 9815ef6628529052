import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_tree_lab.errors import ValidationError
from spectral_tree_lab.sampling import (BfsQueueProcess, Overflow, SeededRng, a_star, absorption_times,
                                        conditioned_child_counts, degree_stats, empirical_median_max_degree,
                                        median_pair, rotate_to_tree, sample_bienayme,
                                        sample_conditioned_bienayme, sample_uniform_tree,
                                        size_probability_estimate, size_probability_exact)
from spectral_tree_lab.tree_core import LabeledTree, RootedPlaneTree, plane_embedding

from conftest import all_labeled_trees


def plane_shapes(n):
    """All plane trees with n nodes as BFS child-count tuples."""
    out = []
    for c in itertools.product(range(n), repeat=n):
        try:
            out.append(RootedPlaneTree(c).key())
        except ValidationError:
            pass
    return out


def conditioned_law(n):
    """Exact law of a Poisson(1) branching tree given n nodes: weight prod 1/c_i!."""
    w = {s: Fraction(1, math.prod(math.factorial(c) for c in s)) for s in plane_shapes(n)}
    z = sum(w.values())
    return {s: x / z for s, x in w.items()}


def tv(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in keys)


# seeding

def test_streams_are_reproducible_and_distinct():
    a = SeededRng(7).stream(3, 4).integers(0, 2**62, 5)
    b = SeededRng(7).stream(3, 4).integers(0, 2**62, 5)
    c = SeededRng(7).stream(3, 5).integers(0, 2**62, 5)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    t1 = sample_uniform_tree(50, SeededRng(1).stream(50, 0))
    t2 = sample_uniform_tree(50, SeededRng(1).stream(50, 0))
    assert t1 == t2


# uniform trees

def test_uniform_small_cases():
    assert sample_uniform_tree(2, 0).edges() == [(1, 2)]
    with pytest.raises(ValidationError):
        sample_uniform_tree(1, 0)


@pytest.mark.parametrize("n", [3, 4])
def test_uniform_frequencies(n):
    draws = 40_000
    gen = np.random.default_rng(n)
    counts = Counter(sample_uniform_tree(n, gen) for _ in range(draws))
    total = n ** (n - 2)
    assert len(counts) == total
    p = 1 / total
    sigma = math.sqrt(p * (1 - p) / draws)
    for c in counts.values():
        assert abs(c / draws - p) <= 4 * sigma


# branching processes

def test_plane_shapes_count_is_catalan():
    for n in range(1, 7):
        assert len(plane_shapes(n)) == math.comb(2 * n - 2, n - 1) // n


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_plane_embedding_of_labeled_trees_is_conditioned_law(n):
    # exhaustive: shapes of all n^{n-2} trees rooted at 1 follow the conditioned law exactly
    counts = Counter(plane_embedding(t, 1).key() for t in all_labeled_trees(n))
    total = sum(counts.values())
    law = conditioned_law(n)
    assert {s: Fraction(c, total) for s, c in counts.items()} == law


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_conditioned_sampler_matches_exact_law(n):
    draws = 200_000
    rows = conditioned_child_counts(n, draws, np.random.default_rng(100 + n))
    emp = Counter(map(tuple, rows.tolist()))
    emp = {s: c / draws for s, c in emp.items()}
    assert tv(emp, conditioned_law(n)) < 0.01


def test_conditioned_sampler_trivial_size():
    assert sample_conditioned_bienayme(1, 0).size == 1


@pytest.mark.parametrize("n", range(1, 9))
def test_exactly_one_rotation_is_a_tree(n):
    for bars in itertools.combinations(range(2 * n - 2), n - 1):
        # stars and bars: compositions of n-1 into n nonnegative parts
        cuts = (-1,) + bars + (2 * n - 2,)
        if n == 1:
            counts = [0]
        else:
            counts = [cuts[i + 1] - cuts[i] - 1 for i in range(n)]
        feasible = 0
        for r in range(n):
            rot = counts[r:] + counts[:r]
            try:
                RootedPlaneTree(rot)
                feasible += 1
            except ValidationError:
                pass
        assert feasible == 1
        RootedPlaneTree(rotate_to_tree(np.array(counts)))


@given(st.lists(st.integers(0, 5), min_size=1, max_size=40))
def test_queue_process_identity(xs):
    c = np.array(xs)
    c[0] += max(0, len(xs) - 1 - int(c.sum()))
    while c.sum() > len(xs) - 1:
        c[int(np.argmax(c))] -= 1
    tree = RootedPlaneTree(rotate_to_tree(c))
    q = BfsQueueProcess.from_child_counts(tree.child_counts)
    assert q.sigma == tree.size
    assert q.steps[q.sigma] == -1
    assert np.all(np.diff(q.steps) >= -1)


def test_bienayme_root_only_frequency():
    gen = np.random.default_rng(5)
    draws = 20_000
    outcomes = (sample_bienayme(1.0, gen, 10**5) for _ in range(draws))
    single = sum(1 for t in outcomes if isinstance(t, RootedPlaneTree) and t.size == 1)
    p = math.exp(-1)
    assert abs(single / draws - p) <= 3 * math.sqrt(p * (1 - p) / draws)


def test_bienayme_subcritical_mean_size():
    gen = np.random.default_rng(6)
    sizes = np.array([sample_bienayme(0.5, gen).size for _ in range(20_000)])
    assert abs(sizes.mean() - 2.0) <= 3 * sizes.std() / math.sqrt(sizes.size)


def test_critical_bienayme_rarely_overflows():
    gen = np.random.default_rng(7)
    over = sum(isinstance(sample_bienayme(1.0, gen, 10**6), Overflow) for _ in range(10_000))
    assert over / 10_000 < 0.01


def test_bienayme_rejects_bad_input():
    with pytest.raises(ValidationError):
        sample_bienayme(0.0, 0)
    assert isinstance(sample_bienayme(3.0, np.random.default_rng(0), node_cap=50), (Overflow, RootedPlaneTree))


def test_bienayme_tree_queue_identity():
    gen = np.random.default_rng(8)
    for _ in range(200):
        t = sample_bienayme(1.0, gen, 10**5)
        if isinstance(t, Overflow):
            continue
        q = BfsQueueProcess.from_child_counts(t.child_counts)
        assert q.sigma == t.size


# size distribution

def test_size_probability_small_n():
    for n, p in ((1, math.exp(-1)), (2, math.exp(-2))):
        est, se = size_probability_estimate(n, 200_000, np.random.default_rng(n))
        assert abs(est - p) <= 3 * se
        assert size_probability_exact(n) == pytest.approx(p, rel=1e-12)


def test_size_probability_n50_near_asymptotic():
    est, se = size_probability_estimate(50, 2_000_000, np.random.default_rng(50))
    ratio = est * math.sqrt(2 * math.pi) * 50 ** 1.5
    assert 0.8 <= ratio <= 1.25
    assert abs(est - size_probability_exact(50)) <= 4 * se


def test_absorption_times_cap():
    s = absorption_times(1000, 3, np.random.default_rng(0))
    assert s.min() >= 1 and s.max() <= 4


# degree statistics

def test_a_star_examples():
    assert (a_star(24), a_star(25), a_star(120)) == (4, 4, 5)
    assert a_star(1) == 1


def test_degree_stats_star():
    star = LabeledTree.star(10, 1)
    s = degree_stats(star, root=1)
    assert s.d_at_least(9) == 1 and s.d_at_least(1) == 1
    assert s.d_at_least(0) == 10 and s.max_degree == 9
    ps = degree_stats(plane_embedding(star, 1))
    assert ps.at_least == s.at_least


@given(st.integers(2, 60), st.integers(0, 2**32))
def test_degree_stats_monotone(n, seed):
    s = degree_stats(sample_uniform_tree(n, seed))
    assert s.at_least[0] == n
    assert all(a >= b for a, b in zip(s.at_least, s.at_least[1:]))


def test_median_pair_and_small_median():
    assert median_pair([1, 2, 3, 4]) == (2, 3)
    assert empirical_median_max_degree(2, 30, 0) == 1
    with pytest.raises(ValidationError):
        empirical_median_max_degree(10, 5, 0)


def test_median_max_degree_near_a_star():
    est = empirical_median_max_degree(10_000, 500, SeededRng(1).stream(0))
    assert abs(est - a_star(10_000)) <= 2


def test_median_max_degree_nondecreasing():
    meds = [empirical_median_max_degree(n, 100, SeededRng(2).stream(n)) for n in (100, 1000, 10_000)]
    assert meds == sorted(meds)
