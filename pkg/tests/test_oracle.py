import numpy as np
import pytest

from hicluster.errors import ResourceGuardError
from hicluster.graphs import DIS, WeightedGraph
from hicluster.groundtruth import is_generating, random_generating_tree, realize
from hicluster.objectives import dasgupta, evaluate
from hicluster.oracle import (
    brute_densest_cut,
    brute_sparsest_cut,
    enumerate_tree_costs,
    exact_opt,
)
from hicluster.trees import serialize_tree

from conftest import all_binary_trees, random_graph, random_tree, unit_clique

CF = dasgupta(64)


def test_exact_opt_examples(fix_p4, fix_2b):
    res = exact_opt(CF, fix_p4)
    assert res.value == 8.0
    assert serialize_tree(res.tree) == "((0,1),(2,3))"

    res = exact_opt(CF, fix_2b)
    assert res.value == 28.0
    assert is_generating(res.tree, fix_2b).ok

    res = exact_opt(CF, unit_clique(3))
    assert res.value == 8.0


def test_exact_opt_table(fix_p4):
    res = exact_opt(CF, fix_p4, include_table=True)
    assert res.table[frozenset([0, 1, 2, 3])] == 8.0
    assert res.table[frozenset([0, 1])] == 2.0
    assert res.table[frozenset([2])] == 0.0


def test_exact_opt_guards():
    g = unit_clique(17)
    with pytest.raises(ResourceGuardError):
        exact_opt(CF, g)
    with pytest.raises(ResourceGuardError):
        exact_opt(CF, unit_clique(21), max_n=21)  # hard cap stays at 20


def test_exact_opt_guard_env_override(monkeypatch):
    monkeypatch.setenv("HICLUSTER_MAX_N", "12")
    with pytest.raises(ResourceGuardError):
        exact_opt(CF, unit_clique(13))
    monkeypatch.setenv("HICLUSTER_MAX_N", "13")
    assert exact_opt(CF, unit_clique(13)).value == CF.kappa[13]


def test_dp_matches_full_enumeration():
    # the independent oracle for the oracle: enumerate all trees directly
    for seed in range(6):
        n = 4 + seed % 3
        g = random_graph(n, 70 + seed)
        costs = [evaluate(CF, g, t).total for t in all_binary_trees(tuple(range(n)))]
        assert exact_opt(CF, g, "min").value == pytest.approx(min(costs), rel=1e-12)
        assert exact_opt(CF, g, "max").value == pytest.approx(max(costs), rel=1e-12)


def test_opt_value_bounds_random_trees():
    for seed in range(5):
        n = 10
        g = random_graph(n, 300 + seed)
        lo = exact_opt(CF, g, "min").value
        hi = exact_opt(CF, g, "max").value
        for t_seed in range(100):
            val = evaluate(CF, g, random_tree(range(n), t_seed)).total
            assert lo - 1e-9 <= val <= hi + 1e-9


def test_enumerate_tree_costs_examples(fix_2b):
    res = enumerate_tree_costs(CF, unit_clique(5))
    assert res.min_value == res.max_value == 40.0
    assert res.distinct_count == 1

    res = enumerate_tree_costs(CF, fix_2b)
    assert res.min_value == 28.0
    assert res.max_value >= 36.0
    assert res.distinct_count == 2

    two = WeightedGraph(np.array([[0.0, 7.0], [7.0, 0.0]]))
    res = enumerate_tree_costs(CF, two)
    assert res.min_value == res.max_value
    with pytest.raises(ResourceGuardError):
        enumerate_tree_costs(CF, unit_clique(11))


def test_optimal_trees_are_generating_exhaustively():
    # on a ground-truth input, cost == OPT exactly characterizes generating
    # trees; checked by full enumeration at n = 7 (10395 trees)
    gt = random_generating_tree(7, seed=13, strict=False)
    g = realize(gt)
    opt = exact_opt(CF, g).value
    assert evaluate(CF, g, gt.tree).total == opt
    for t in all_binary_trees(tuple(range(7))):
        if evaluate(CF, g, t).total == opt:
            assert is_generating(t, g).ok
        else:
            assert not is_generating(t, g).ok


def test_brute_cut_examples(fix_p4, fix_2b):
    cut, sparsity = brute_sparsest_cut(fix_p4)
    assert sorted(cut.side_a) == [0, 1] and sparsity == 0.25
    cut, sparsity = brute_sparsest_cut(fix_2b)
    assert sorted(cut.side_a) == [0, 1] and sparsity == 1.0
    two = WeightedGraph(np.array([[0.0, 5.0], [5.0, 0.0]]), mode=DIS)
    cut, density = brute_densest_cut(two)
    assert density == 5.0


def test_brute_cut_ties_deterministic():
    # unit clique: all cuts tie; lexicographically smallest side with vertex 0
    cut, sparsity = brute_sparsest_cut(unit_clique(5))
    assert sparsity == 1.0
    assert sorted(cut.side_a) == [0]  # {0} is the lex-min subset containing 0


def test_min_leq_max_direction():
    for seed in range(8):
        g = random_graph(9, 900 + seed, mode=DIS)
        assert exact_opt(CF, g, "min").value <= exact_opt(CF, g, "max").value
        res = exact_opt(CF, g, "max")
        assert evaluate(CF, g, res.tree).total == pytest.approx(res.value, rel=1e-12)
