import numpy as np
import pytest

from hicluster.errors import FormatError, NotUltrametricError, PreconditionError
from hicluster.graphs import DIS, SIM, WeightedGraph
from hicluster.groundtruth import (
    GeneratingTree,
    PerturbationSpec,
    dump_generating_tree,
    find_ultrametric_violation,
    is_generating,
    load_generating_tree,
    minimal_representation,
    perturb,
    random_generating_tree,
    realize,
)
from hicluster.trees import ClusterTree, parse_tree, parse_tree_with_weights, serialize_tree

from conftest import unit_clique


def gentree(text: str, mode: str = SIM) -> GeneratingTree:
    tree, weights = parse_tree_with_weights(text)
    return GeneratingTree(tree, weights, mode=mode)


def test_realize_examples(fix_2b):
    g = realize(gentree("((0,1):3,(2,3):3):1"))
    assert np.array_equal(g.weights, fix_2b.weights)

    g = realize(gentree("(0,1):5"))
    assert g.weights[0, 1] == 5.0

    g = realize(gentree("((0,1):2,2):1"))
    assert g.weights[0, 1] == 2.0
    assert g.weights[0, 2] == g.weights[1, 2] == 1.0


def test_monotonicity_validated():
    with pytest.raises(PreconditionError):
        gentree("((0,1):1,2):3")  # similarity: parent heavier than child
    gentree("((0,1):1,2):3", mode=DIS)  # fine for dissimilarity
    with pytest.raises(PreconditionError):
        gentree("((0,1):1,2):3.5", mode=SIM)


def test_strict_flag():
    assert gentree("((0,1):3,(2,3):3):1").strict
    assert not gentree("((0,1):1,2):1").strict


def test_is_generating_examples(fix_2b):
    chk = is_generating(parse_tree("((0,1),(2,3))"), fix_2b)
    assert chk.ok
    root_w = sorted(chk.node_weight.values())
    assert root_w == [1.0, 3.0, 3.0]

    chk = is_generating(parse_tree("((0,2),(1,3))"), fix_2b)
    assert not chk.ok
    kind, node, pair_lo, pair_hi = chk.witness
    assert kind == "nonuniform"
    w = fix_2b.weights
    assert w[pair_lo] != w[pair_hi]

    # on a unit clique every tree is generating with all weights 1
    for text in ("((0,1),(2,3))", "(((0,1),2),3)", "((0,3),(1,2))"):
        chk = is_generating(parse_tree(text), unit_clique(4))
        assert chk.ok and set(chk.node_weight.values()) == {1.0}


def test_random_generating_tree_roundtrip():
    for seed in range(30):
        n = 1 + seed % 14
        mode = SIM if seed % 2 else DIS
        gt = random_generating_tree(n, mode=mode, seed=seed, strict=seed % 3 == 0)
        if n == 1:
            assert gt.tree.num_leaves == 1
            continue
        g = realize(gt)
        chk = is_generating(gt.tree, g)
        assert chk.ok
        # every internal node separates some pair, so all weights are recovered
        assert chk.node_weight == gt.node_weight
        # determinism
        gt2 = random_generating_tree(n, mode=mode, seed=seed, strict=seed % 3 == 0)
        assert serialize_tree(gt2.tree, gt2.node_weight) == serialize_tree(gt.tree, gt.node_weight)


def test_realized_inputs_satisfy_triple_condition():
    for seed in range(10):
        gt = random_generating_tree(9, mode=SIM if seed % 2 else DIS, seed=40 + seed,
                                    strict=False)
        g = realize(gt)
        assert find_ultrametric_violation(g) is None


def test_perturb_examples(fix_2b):
    assert np.array_equal(perturb(fix_2b, PerturbationSpec(1.0, seed=3)).weights,
                          fix_2b.weights)
    p = perturb(fix_2b, PerturbationSpec(1.2, seed=3))
    assert np.all(p.weights >= fix_2b.weights)
    assert np.all(p.weights <= 1.2 * fix_2b.weights + 1e-12)
    p2 = perturb(fix_2b, PerturbationSpec(1.2, seed=3))
    assert np.array_equal(p.weights, p2.weights)
    with pytest.raises(PreconditionError):
        PerturbationSpec(0.9)


def test_minimal_representation_examples(fix_2b, fix_p4):
    gt = minimal_representation(fix_2b)
    assert serialize_tree(gt.tree) == "((0,1),(2,3))"
    assert sorted(gt.node_weight.values()) == [1.0, 3.0, 3.0]
    assert np.array_equal(realize(gt).weights, fix_2b.weights)

    gt = minimal_representation(unit_clique(3))
    assert set(gt.node_weight.values()) == {1.0}
    assert np.array_equal(realize(gt).weights, unit_clique(3).weights)

    with pytest.raises(NotUltrametricError) as exc:
        minimal_representation(fix_p4)
    x, y, z = exc.value.witness
    w = fix_p4.weights
    assert w[x, y] < min(w[x, z], w[y, z])  # a genuine violation
    assert (x, y, z) == (0, 2, 1)


def test_minimal_representation_dissimilarity():
    gt = random_generating_tree(10, mode=DIS, seed=5, strict=False)
    g = realize(gt)
    rec = minimal_representation(g)
    assert rec.mode == DIS
    assert np.array_equal(realize(rec).weights, g.weights)


def test_gentree_io():
    gt = gentree("((0,1):3,(2,3):3):1")
    text = dump_generating_tree(gt)
    gt2 = load_generating_tree(text)
    assert dump_generating_tree(gt2) == text
    assert gt2.mode == SIM
    with pytest.raises(FormatError):
        load_generating_tree("hicluster-gentree 1 sim\n((0,1),2)\n")  # weightless
    with pytest.raises(FormatError):
        load_generating_tree("wrong 1 sim\n(0,1):1\n")


def test_node_weight_cover_validated():
    tree = parse_tree("((0,1),2)")
    with pytest.raises(PreconditionError):
        GeneratingTree(tree, {int(tree.root): 1.0}, mode=SIM)  # missing a node
