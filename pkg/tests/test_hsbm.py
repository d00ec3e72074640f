import numpy as np
import pytest

from hicluster.errors import FormatError, PreconditionError
from hicluster.graphs import SIM, WeightedGraph
from hicluster.groundtruth import GeneratingTree, is_generating
from hicluster.hsbm import (
    HsbmParams,
    HsbmSample,
    dump_hsbm_config,
    expected_graph,
    parse_hsbm_config,
    recover_tree,
    sample,
    spectral_project,
)
from hicluster.objectives import dasgupta, evaluate
from hicluster.oracle import exact_opt
from hicluster.trees import ClusterTree, parse_tree_with_weights

from conftest import random_tree

CF = dasgupta(512)


def two_cluster_params(n=10, p=(0.75, 0.5), cross=0.25, f=(0.5, 0.5), alpha=1.0, seed=0):
    tree, weights = parse_tree_with_weights(f"(0,1):{cross}")
    return HsbmParams(k=2, top_tree=GeneratingTree(tree, weights), p=p, f=f,
                      n=n, alpha=alpha, seed=seed)


def test_param_validation_names_field():
    with pytest.raises(PreconditionError, match="f:"):
        two_cluster_params(f=(0.5, 0.6))
    with pytest.raises(PreconditionError, match="p:"):
        two_cluster_params(p=(0.2, 0.5))  # p[0] below the parent weight 0.25
    with pytest.raises(PreconditionError, match="alpha:"):
        two_cluster_params(alpha=1.5)
    with pytest.raises(PreconditionError, match="top_tree:"):
        tree, weights = parse_tree_with_weights("(0,1):1.0")
        HsbmParams(k=2, top_tree=GeneratingTree(tree, weights), p=(1.0, 1.0),
                   f=(0.5, 0.5), n=4)


def test_sample_trivial_cases():
    leaf = GeneratingTree(ClusterTree.leaf(0), {}, mode=SIM)
    p1 = HsbmParams(k=1, top_tree=leaf, p=(1.0,), f=(1.0,), n=6, seed=1)
    s = sample(p1)
    assert np.array_equal(s.graph.weights, np.ones((6, 6)) - np.eye(6))

    params = two_cluster_params(n=12, p=(1.0, 1.0), cross=0.0, seed=2)
    s = sample(params)
    same = s.labels[:, None] == s.labels[None, :]
    expect = np.where(same, 1.0, 0.0)
    np.fill_diagonal(expect, 0.0)
    assert np.array_equal(s.graph.weights, expect)


def test_sample_density_band():
    params = two_cluster_params(n=400, p=(0.9, 0.9), cross=0.1, seed=3)
    s = sample(params)
    for c in range(2):
        vs = np.flatnonzero(s.labels == c)
        dens = s.graph.weights[np.ix_(vs, vs)].sum() / (len(vs) * (len(vs) - 1))
        assert 0.85 <= dens <= 0.95


def test_sample_deterministic():
    a = sample(two_cluster_params(n=50, seed=11))
    b = sample(two_cluster_params(n=50, seed=11))
    assert np.array_equal(a.graph.weights, b.graph.weights)
    assert np.array_equal(a.labels, b.labels)


def test_expected_graph_is_ground_truth():
    params = two_cluster_params(n=10)
    eg, gt = expected_graph(params)
    assert is_generating(gt.tree, eg).ok
    # expected optimum is attained exactly by the ground-truth tree
    opt = exact_opt(CF, eg)
    assert evaluate(CF, eg, gt.tree).total == pytest.approx(opt.value, rel=1e-12)

    leaf = GeneratingTree(ClusterTree.leaf(0), {}, mode=SIM)
    p1 = HsbmParams(k=1, top_tree=leaf, p=(0.5,), f=(1.0,), n=6, alpha=0.8)
    eg, gt = expected_graph(p1)
    assert np.allclose(eg.weights[~np.eye(6, dtype=bool)], 0.4)
    assert is_generating(gt.tree, eg).ok


def test_expectation_identity_monte_carlo():
    # E[cost on the sample] == cost on the expected graph, for fixed labels
    params = two_cluster_params(n=8, p=(0.8, 0.6), cross=0.3, seed=4)
    eg, _ = expected_graph(params)
    labels = np.repeat([0, 1], 4)
    iu, iv = np.triu_indices(8, 1)
    probs = eg.weights[iu, iv]
    rng = np.random.default_rng(99)
    draws = rng.random((4000, len(iu))) < probs
    t = random_tree(range(8), 5)
    factors = np.zeros(len(iu))
    sizes = t.subtree_sizes()
    from hicluster.trees import lca

    for e, (u, v) in enumerate(zip(iu, iv)):
        node = lca(t, int(u), int(v))
        factors[e] = CF.g_scalar(int(sizes[t.left[node]]), int(sizes[t.right[node]]))
    costs = draws @ factors
    exact = evaluate(CF, eg, t).total
    se = costs.std(ddof=1) / np.sqrt(len(costs))
    assert abs(costs.mean() - exact) <= 3 * se


def test_spectral_separation_and_rank():
    n = 16
    w = np.zeros((n, n))
    w[:8, :8] = 1.0
    w[8:, 8:] = 1.0
    np.fill_diagonal(w, 0.0)
    proj = spectral_project(w, 2)
    pts = proj.points
    within = max(np.linalg.norm(pts[0] - pts[i]) for i in range(1, 8))
    cross = min(np.linalg.norm(pts[0] - pts[i]) for i in range(8, n))
    assert within <= 1e-6
    assert cross > 0.1 * np.sqrt(n)
    assert proj.effective_rank == 2 and proj.converged

    # full-rank projection reproduces the columns
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, (8, 8)).astype(float)
    a = np.triu(a, 1)
    a = a + a.T
    proj = spectral_project(a, 8)
    assert np.linalg.norm(proj.projected_columns() - a) <= 1e-6

    # k=1 on a clique: all points coincide
    proj = spectral_project(np.ones((6, 6)) - np.eye(6), 1)
    assert np.allclose(proj.points, proj.points[0], atol=1e-8)


def test_spectral_rank_deficit_flagged():
    # a single edge has rank-2 adjacency; asking for k=3 flags rank 2
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    proj = spectral_project(w, 3)
    assert proj.effective_rank == 2
    proj = spectral_project(np.zeros((4, 4)), 2)
    assert proj.effective_rank == 0


def test_recover_tree_exactly_on_disjoint_cliques():
    w = np.zeros((12, 12))
    w[:6, :6] = 1.0
    w[6:, 6:] = 1.0
    np.fill_diagonal(w, 0.0)
    g = WeightedGraph(w)
    samp = HsbmSample(g, np.repeat([0, 1], 6), np.array([6, 6]))
    tree, stats = recover_tree(samp, 2, repetitions=4)
    assert stats["cost"] == exact_opt(CF, g).value
    assert sorted(map(sorted, stats["clusters"])) == [list(range(6)), list(range(6, 12))]


def test_recover_tree_k1_balanced():
    g = WeightedGraph(np.ones((9, 9)) - np.eye(9))
    samp = HsbmSample(g, np.zeros(9, dtype=int), np.array([9]))
    tree, _ = recover_tree(samp, 1, repetitions=1)
    assert tree.num_leaves == 9
    assert int(tree.depths().max()) <= 4  # balanced expansion


def test_recover_never_beats_oracle():
    for seed in range(6):
        params = two_cluster_params(n=10, p=(0.9, 0.8), cross=0.2, seed=30 + seed)
        s = sample(params)
        _, stats = recover_tree(s, 2, repetitions=4, seed=seed)
        assert stats["cost"] >= exact_opt(CF, s.graph).value - 1e-9


def test_cost_concentration_proxy():
    # coefficient of variation of the ground-truth tree's cost over 50 samples
    params = two_cluster_params(n=400, p=(0.9, 0.9), cross=0.1)
    labels = np.repeat([0, 1], 200)
    _, gt = expected_graph(params, labels=labels)
    iu, iv = np.triu_indices(400, 1)
    q = np.where(labels[iu] == labels[iv], 0.9, 0.1)
    factors = np.zeros(len(iu))
    sizes = gt.tree.subtree_sizes()
    from hicluster.trees import lca

    leaf_of = {int(gt.tree.labels[i]): int(i)
               for i in np.flatnonzero(gt.tree.left < 0)}
    par, dep = gt.tree.parents(), gt.tree.depths()

    def lca_fast(a, b):
        x, y = leaf_of[a], leaf_of[b]
        while dep[x] > dep[y]:
            x = par[x]
        while dep[y] > dep[x]:
            y = par[y]
        while x != y:
            x, y = par[x], par[y]
        return x

    for e in range(len(iu)):
        node = lca_fast(int(iu[e]), int(iv[e]))
        factors[e] = int(sizes[gt.tree.left[node]]) + int(sizes[gt.tree.right[node]])
    rng = np.random.default_rng(7)
    draws = rng.random((50, len(iu))) < q
    costs = draws @ factors
    cv = costs.std(ddof=1) / costs.mean()
    assert cv <= 0.05


def test_config_roundtrip_and_errors():
    params = two_cluster_params(n=40, seed=5)
    text = dump_hsbm_config(params)
    back = parse_hsbm_config(text, seed=5)
    assert back.k == 2 and back.n == 40 and back.p == params.p
    with pytest.raises(FormatError):
        parse_hsbm_config("k = 2\n")  # missing keys
    with pytest.raises(FormatError):
        parse_hsbm_config("k 2\nn = 5\nf = 1\np = 1\ntop_tree = 0")
