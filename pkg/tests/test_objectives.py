import numpy as np
import pytest

from hicluster.errors import AdmissibilityError, PreconditionError, ResourceGuardError
from hicluster.graphs import WeightedGraph
from hicluster.objectives import (
    CostFunction,
    check_admissibility,
    dasgupta,
    dump_cost_function,
    evaluate,
    evaluate_via_lca,
    from_base_sequence,
    load_cost_function,
    trivial_upper_bound,
)
from hicluster.trees import parse_tree

from conftest import random_graph, random_tree, unit_clique


def test_dasgupta_examples():
    cf = dasgupta(64)
    assert cf.g_scalar(2, 2) == 4.0
    assert cf.kappa[3] == 8.0
    assert cf.kappa[4] == 20.0


def test_dasgupta_g_is_sum():
    cf = dasgupta(128)
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = int(rng.integers(1, 64))
        b = int(rng.integers(1, 128 - a))
        assert cf.g_scalar(a, b) == a + b


def test_from_base_sequence_examples():
    # base g(i,1) = i+1 recovers Dasgupta's table
    cf = from_base_sequence([i + 1 for i in range(1, 32)])
    assert cf.kappa[2] == 2.0 and cf.kappa[4] == 20.0
    assert cf.g_scalar(2, 2) == 4.0
    # doubling the base doubles every entry
    cf2 = from_base_sequence([2 * (i + 1) for i in range(1, 32)])
    for a, b in [(1, 1), (2, 3), (5, 7)]:
        assert cf2.g_scalar(a, b) == 2 * cf.g_scalar(a, b)
    # base (i+1)^2 is admissible (ratio i+1 increases) with g(1,1) = 4
    cfsq = from_base_sequence([(i + 1) ** 2 for i in range(1, 32)])
    assert cfsq.g_scalar(1, 1) == 4.0


def test_from_base_sequence_rejects_bad_ratio():
    # g(i,1)/(i+1): 1, 2/3 decreasing
    with pytest.raises(AdmissibilityError):
        from_base_sequence([2, 2, 2, 2])


def test_evaluate_examples(fix_2b):
    cf = dasgupta(64)
    rep = evaluate(cf, fix_2b, parse_tree("((0,1),(2,3))"))
    assert rep.total == 28.0
    assert sorted(rep.per_node.values()) == [6.0, 6.0, 16.0]
    assert rep.total == sum(rep.per_node.values())
    assert evaluate(cf, fix_2b, parse_tree("((0,2),(1,3))")).total == 36.0
    w = np.zeros((2, 2))
    w[0, 1] = w[1, 0] = 5.0
    assert evaluate(cf, WeightedGraph(w), parse_tree("(0,1)")).total == 10.0


def test_evaluate_via_lca_examples(fix_2b, fix_p4):
    cf = dasgupta(64)
    assert evaluate_via_lca(cf, fix_2b, parse_tree("((0,1),(2,3))")) == 28.0
    assert evaluate_via_lca(cf, fix_p4, parse_tree("((0,1),(2,3))")) == 8.0
    empty = WeightedGraph(np.zeros((4, 4)))
    assert evaluate_via_lca(cf, empty, parse_tree("((0,1),(2,3))")) == 0.0


def test_evaluators_agree_on_random_inputs():
    cf = dasgupta(80)
    for seed in range(30):
        n = 2 + seed * 2
        if n > 64:
            break
        g = random_graph(n, seed)
        t = random_tree(range(n), 500 + seed)
        a = evaluate(cf, g, t).total
        b = evaluate_via_lca(cf, g, t)
        assert a == pytest.approx(b, rel=1e-9)


def test_scaling_linearity(fix_2b):
    cf = dasgupta(64)
    t = parse_tree("((0,2),(1,3))")
    base = evaluate(cf, fix_2b, t).total
    for lam in (0.5, 3.0, 7.25):
        scaled = WeightedGraph(fix_2b.weights * lam, mode=fix_2b.mode)
        assert evaluate(cf, scaled, t).total == pytest.approx(lam * base, rel=1e-12)


def test_kappa_identity_for_custom_base():
    cf = from_base_sequence([(i + 1) ** 2 for i in range(1, 40)])
    for n1 in range(1, 20):
        for n2 in range(1, 40 - n1):
            lhs = cf.g_scalar(n1, n2) * n1 * n2 + cf.kappa[n1] + cf.kappa[n2]
            assert lhs == pytest.approx(cf.kappa[n1 + n2], rel=1e-9)


def test_clique_invariance_small_n():
    # every binary tree on unit K_n costs kappa(n); min-DP == max-DP certifies it
    from hicluster.oracle import enumerate_tree_costs

    cf = dasgupta(64)
    for n in range(2, 9):
        res = enumerate_tree_costs(cf, unit_clique(n))
        assert res.distinct_count == 1
        assert res.min_value == cf.kappa[n]


def test_check_admissibility_dasgupta():
    cf = dasgupta(64)
    rep = check_admissibility(cf, n_max=6)
    assert rep.admissible
    assert [cf.kappa[n] for n in range(2, 7)] == [2, 8, 20, 40, 70]


def test_check_admissibility_broken_table():
    # lower g(2,1): clique invariance breaks (first witnessed on K_4)
    cf = dasgupta(8)
    tab = cf.g_table(8).copy()
    tab[2, 1] = tab[1, 2] = 2.0
    broken = CostFunction(name="broken", n_max=8, base=cf.base, kappa=cf.kappa, table=tab)
    rep = check_admissibility(broken, n_max=5)
    assert not rep.clique_invariant
    assert rep.witness is not None
    assert not rep.strictly_monotone  # g(2,1) == g(1,1) now


def test_check_admissibility_n2_trivial():
    rep = check_admissibility(dasgupta(8), n_max=2)
    assert rep.admissible


def test_check_admissibility_guard():
    with pytest.raises(ResourceGuardError):
        check_admissibility(dasgupta(64), n_max=11)


def test_trivial_upper_bound(fix_tri, fix_p4):
    assert trivial_upper_bound(fix_tri) == 15.0
    w = np.zeros((2, 2))
    w[0, 1] = w[1, 0] = 5.0
    assert trivial_upper_bound(WeightedGraph(w)) == 10.0
    assert trivial_upper_bound(fix_p4) == 12.0


def test_dasgupta_smoothness():
    # g_max * n^2 / kappa(n) = 3n^2/(n^2-1): a constant bound (4 at n=2,
    # within 1% of 3 from n=64 on)
    cf = dasgupta(4096)
    n = np.arange(2, 4097)
    ratio = n.astype(float) ** 3 / cf.kappa[n]  # g_max = n for Dasgupta
    assert ratio.max() <= 4.0
    assert ratio[62:].max() <= 3.01


def test_g_range_errors():
    cf = dasgupta(8)
    with pytest.raises(PreconditionError):
        cf.g_scalar(4, 5)
    with pytest.raises(PreconditionError):
        cf.g_scalar(0, 3)
    g9 = unit_clique(9)
    with pytest.raises(PreconditionError):
        evaluate(cf, g9, parse_tree("((((((((0,1),2),3),4),5),6),7),8)"))


def test_cost_function_io_roundtrip():
    cf = from_base_sequence([(i + 1) ** 2 for i in range(1, 12)], name="sq")
    text = dump_cost_function(cf)
    cf2 = load_cost_function(text)
    assert cf2.n_max == cf.n_max
    assert np.allclose(cf2.kappa, cf.kappa)
