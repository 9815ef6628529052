import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from spectral_tree_lab.tree_core import LabeledTree, prufer_decode


def all_labeled_trees(n):
    """Every labeled tree on [n], via all Prüfer sequences."""
    if n == 1:
        yield LabeledTree(1, [])
        return
    for seq in itertools.product(range(1, n + 1), repeat=n - 2):
        yield prufer_decode(seq, n)


def unlabeled_trees(n):
    """One representative per isomorphism class (networkx enumeration)."""
    if n == 1:
        yield LabeledTree(1, [])
        return
    for g in nx.nonisomorphic_trees(n):
        yield LabeledTree(n, [(u + 1, v + 1) for u, v in g.edges()])


def random_tree(n, seed):
    rng = np.random.default_rng(seed)
    if n == 1:
        return LabeledTree(1, [])
    return prufer_decode(rng.integers(1, n + 1, size=n - 2), n)


def to_networkx(tree):
    g = nx.Graph()
    g.add_nodes_from(range(1, tree.n + 1))
    g.add_edges_from(tree.edges())
    return g


@st.composite
def trees(draw, min_n=2, max_n=30):
    n = draw(st.integers(min_n, max_n))
    seq = draw(st.lists(st.integers(1, n), min_size=max(n - 2, 0), max_size=max(n - 2, 0)))
    return prufer_decode(seq, n) if n >= 2 else LabeledTree(1, [])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").split(".")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
