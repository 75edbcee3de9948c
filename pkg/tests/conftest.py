import itertools

import networkx as nx
import pytest

from treecert.trees import Tree


def brute_force_trees(n):
    """Every spanning tree of K_n, found by testing all (n-1)-edge subsets."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    out = set()
    for chosen in itertools.combinations(pairs, n - 1):
        g = nx.Graph(chosen)
        g.add_nodes_from(range(1, n + 1))
        if nx.is_tree(g):
            out.add(frozenset(chosen))
    return out


def as_graph(t: Tree) -> nx.Graph:
    g = nx.Graph(list(t.edges))
    g.add_nodes_from(range(1, t.n + 1))
    return g


@pytest.fixture
def path4():
    return Tree(4, [(1, 2), (2, 3), (3, 4)])


@pytest.fixture
def star3():
    return Tree(4, [(1, 3), (2, 3), (4, 3)])


@pytest.fixture
def star1():
    return Tree(4, [(1, 2), (1, 3), (1, 4)])
