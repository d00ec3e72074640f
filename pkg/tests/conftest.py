import numpy as np
import pytest

from hicluster.graphs import DIS, SIM, WeightedGraph
from hicluster.trees import ClusterTree, TreeBuilder


def path_graph(n: int) -> WeightedGraph:
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return WeightedGraph(w, mode=SIM)


def unit_clique(n: int, mode: str = SIM) -> WeightedGraph:
    return WeightedGraph(np.ones((n, n)) - np.eye(n), mode=mode)


@pytest.fixture
def fix_2b() -> WeightedGraph:
    """Two blocks {0,1} and {2,3}: inner weight 3, cross weight 1."""
    w = np.ones((4, 4)) - np.eye(4)
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 3.0
    return WeightedGraph(w, mode=SIM)


@pytest.fixture
def fix_p4() -> WeightedGraph:
    """Unit path 0-1-2-3."""
    return path_graph(4)


@pytest.fixture
def fix_tri() -> WeightedGraph:
    """Dissimilarity triangle with weights 1, 1, 3."""
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1.0
    w[0, 2] = w[2, 0] = 1.0
    w[1, 2] = w[2, 1] = 3.0
    return WeightedGraph(w, mode=DIS)


def random_graph(n: int, seed: int, mode: str = SIM, max_w: int = 9) -> WeightedGraph:
    rng = np.random.default_rng(seed)
    w = rng.integers(0, max_w + 1, size=(n, n)).astype(float)
    w = np.triu(w, 1)
    w = w + w.T
    return WeightedGraph(w, mode=mode)


def random_tree(labels, seed: int) -> ClusterTree:
    """Random topology over the given labels (uniform random merges)."""
    rng = np.random.default_rng(seed)
    b = TreeBuilder()
    nodes = [b.leaf(int(x)) for x in labels]
    while len(nodes) > 1:
        i = int(rng.integers(len(nodes)))
        j = int(rng.integers(len(nodes) - 1))
        if j >= i:
            j += 1
        a, c = nodes[i], nodes[j]
        for idx in sorted((i, j), reverse=True):
            nodes.pop(idx)
        nodes.append(b.join(a, c))
    return b.build(nodes[0])


def all_binary_trees(labels: tuple[int, ...]):
    """Every distinct binary tree over the labels ((2n-3)!! of them)."""
    if len(labels) == 1:
        yield ClusterTree.leaf(labels[0])
        return
    first, rest = labels[0], labels[1:]
    for mask in range(1 << len(rest)):
        left = (first,) + tuple(x for i, x in enumerate(rest) if mask >> i & 1)
        right = tuple(x for i, x in enumerate(rest) if not mask >> i & 1)
        if not right:
            continue
        from hicluster.trees import union_tree

        for tl in all_binary_trees(left):
            for tr in all_binary_trees(right):
                yield union_tree(tl, tr)
