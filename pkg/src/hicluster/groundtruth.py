"""Ground-truth inputs: generating trees (dendrograms), the graphs they
realize, validation, perturbation, and recovery of a minimal
representation.

A generating tree is a cluster tree with one weight per internal node,
monotone along every root-to-leaf path (similarity: never decreasing
downward; dissimilarity: never increasing).  Realizing it yields the
complete graph whose pair weights are read off the LCA, which is exactly
the dendrogram view of an ultrametric; the metric and the monotone map are
never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, NotUltrametricError, PreconditionError
from .graphs import DIS, SIM, WeightedGraph
from .rng import derive
from .trees import ClusterTree, TreeBuilder, parse_tree_with_weights, serialize_tree

_GENTREE_MAGIC = "hicluster-gentree"


@dataclass(frozen=True)
class GeneratingTree:
    tree: ClusterTree
    node_weight: dict[int, float]  # internal node id -> W
    mode: str = SIM

    def __post_init__(self):
        t = self.tree
        internal = set(int(i) for i in t.internal_ids())
        if set(self.node_weight) != internal:
            raise PreconditionError("node_weight must cover exactly the internal nodes")
        if any(w < 0 for w in self.node_weight.values()):
            raise PreconditionError("node weights must be nonnegative")
        if self.mode not in (SIM, DIS):
            raise PreconditionError(f"bad mode {self.mode!r}")
        par = t.parents()
        for node in internal:
            p = par[node]
            if p < 0:
                continue
            wp, wc = self.node_weight[int(p)], self.node_weight[node]
            if self.mode == SIM and wp > wc:
                raise PreconditionError(
                    f"similarity weights must not decrease downward: node {node}"
                )
            if self.mode == DIS and wp < wc:
                raise PreconditionError(
                    f"dissimilarity weights must not increase downward: node {node}"
                )

    @property
    def strict(self) -> bool:
        """True iff weights are strictly monotone along every root-leaf path."""
        par = self.tree.parents()
        for node in self.tree.internal_ids():
            p = par[node]
            if p >= 0 and self.node_weight[int(p)] == self.node_weight[int(node)]:
                return False
        return True


def realize(gt: GeneratingTree) -> WeightedGraph:
    """Complete graph with weights[u][v] = W(lca(u, v))."""
    t = gt.tree
    labels = t.leaf_labels()
    n = t.num_leaves
    if not np.array_equal(labels, np.arange(n)):
        raise PreconditionError("realize needs leaf labels 0..n-1")
    w = np.zeros((n, n))
    leafsets = t.subtree_leaves()
    for node in t.internal_ids():
        a = leafsets[t.left[node]]
        b = leafsets[t.right[node]]
        w[np.ix_(a, b)] = gt.node_weight[int(node)]
        w[np.ix_(b, a)] = gt.node_weight[int(node)]
    return WeightedGraph(w, mode=gt.mode)


@dataclass(frozen=True)
class GeneratingCheck:
    ok: bool
    node_weight: dict[int, float] | None
    witness: tuple | None  # ("nonuniform", node, (u,v), (x,y)) or ("nonmonotone", parent, child)

    def __bool__(self):
        return self.ok


def is_generating(t: ClusterTree, g: WeightedGraph) -> GeneratingCheck:
    """Does ``t`` generate ``g``?  Recovers the weight map or a witness."""
    labels = t.leaf_labels()
    if t.num_leaves != g.n or not np.array_equal(labels, np.arange(g.n)):
        raise PreconditionError("tree must be over the graph's vertices")
    leafsets = t.subtree_leaves()
    weights: dict[int, float] = {}
    for node in t.internal_ids():
        a = leafsets[t.left[node]]
        b = leafsets[t.right[node]]
        block = g.weights[np.ix_(a, b)]
        lo = block.min()
        hi = block.max()
        if lo != hi:
            ia, ja = np.unravel_index(int(block.argmin()), block.shape)
            ib, jb = np.unravel_index(int(block.argmax()), block.shape)
            return GeneratingCheck(
                False, None,
                ("nonuniform", int(node),
                 (int(a[ia]), int(b[ja])), (int(a[ib]), int(b[jb]))),
            )
        weights[int(node)] = float(lo)
    par = t.parents()
    for node in t.internal_ids():
        p = int(par[node])
        if p < 0:
            continue
        wp, wc = weights[p], weights[int(node)]
        bad = wp > wc if g.mode == SIM else wp < wc
        if bad:
            return GeneratingCheck(False, None, ("nonmonotone", p, int(node)))
    return GeneratingCheck(True, weights, None)


def random_generating_tree(
    n: int,
    mode: str = SIM,
    seed: int = 0,
    strict: bool = True,
    weight_profile: str = "integer",
) -> GeneratingTree:
    """Random binary topology with monotone (optionally tied) level weights.

    ``weight_profile``: "integer" draws small integer increments per level
    (keeps objectives exact); "uniform" draws real increments.  With
    ``strict=False`` increments may be zero, producing weight ties.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    rng = derive(seed, "gentree", n)
    b = TreeBuilder()
    nodes = [b.leaf(i) for i in range(n)]
    while len(nodes) > 1:
        i = int(rng.integers(len(nodes)))
        j = int(rng.integers(len(nodes) - 1))
        if j >= i:
            j += 1
        a, c = nodes[i], nodes[j]
        for idx in sorted((i, j), reverse=True):
            nodes.pop(idx)
        nodes.append(b.join(a, c))
    tree = b.build(nodes[0])
    if n == 1:
        return GeneratingTree(tree, {}, mode=mode)

    def draw_inc():
        if weight_profile == "uniform":
            base = float(rng.uniform(0.0, 1.0))
            inc = base if strict else base * float(rng.integers(0, 2))
            return inc + (1e-9 if strict else 0.0)
        lo = 1 if strict else 0
        return int(rng.integers(lo, 3))

    depths = tree.depths()
    max_depth = int(depths.max())
    par = tree.parents()
    weight: dict[int, float] = {}
    if mode == SIM:
        root_w = float(rng.integers(0, 2)) if weight_profile == "integer" else float(rng.uniform(0, 1))
        for node in tree.postorder()[::-1]:
            if tree.is_leaf(node):
                continue
            p = int(par[node])
            weight[int(node)] = root_w if p < 0 else weight[p] + draw_inc()
    else:
        root_w = float(2 * max_depth + 2 + int(rng.integers(0, 3)))
        for node in tree.postorder()[::-1]:
            if tree.is_leaf(node):
                continue
            p = int(par[node])
            weight[int(node)] = root_w if p < 0 else max(0.0, weight[p] - draw_inc())
    return GeneratingTree(tree, weight, mode=mode)


@dataclass(frozen=True)
class PerturbationSpec:
    delta: float
    seed: int = 0
    distribution: str = "uniform-multiplier"

    def __post_init__(self):
        if self.delta < 1.0:
            raise PreconditionError(f"delta must be >= 1, got {self.delta}")
        if self.distribution != "uniform-multiplier":
            raise PreconditionError(f"unknown distribution {self.distribution!r}")


def perturb(g: WeightedGraph, spec: PerturbationSpec) -> WeightedGraph:
    """Inflate each edge weight by an independent uniform factor in [1, delta]."""
    rng = derive(spec.seed, "perturb")
    n = g.n
    mult = np.ones((n, n))
    iu, iv = np.triu_indices(n, 1)
    draws = rng.uniform(1.0, spec.delta, size=len(iu))
    mult[iu, iv] = draws
    mult[iv, iu] = draws
    return WeightedGraph(g.weights * mult, mode=g.mode)


def find_ultrametric_violation(g: WeightedGraph) -> tuple[int, int, int] | None:
    """A triple (x, y, z) violating the mode's triple condition, or None.

    Similarity ground truth requires w(x,y) >= min(w(x,z), w(y,z));
    dissimilarity requires w(x,y) <= max(w(x,z), w(y,z)).
    """
    w = g.weights
    n = g.n
    for z in range(n):
        col = w[:, z]
        if g.mode == SIM:
            bound = np.minimum.outer(col, col)
            bad = bound > w
        else:
            bound = np.maximum.outer(col, col)
            bad = bound < w
        bad[z, :] = bad[:, z] = False
        np.fill_diagonal(bad, False)
        if bad.any():
            x, y = np.argwhere(bad)[0]
            return int(x), int(y), z
    return None


def minimal_representation(g: WeightedGraph) -> GeneratingTree:
    """Recover a generating dendrogram for a ground-truth input.

    Runs agglomerative single linkage and annotates each internal node with
    the recovered LCA weight.  Raises NotUltrametricError (with a violating
    triple) when no generating tree exists.
    """
    from .agglomerative import LinkagePolicy, linkage  # deferred, avoids cycle

    if g.n == 1:
        return GeneratingTree(ClusterTree.leaf(0), {}, mode=g.mode)
    tree, _ = linkage(g, LinkagePolicy(kind="single", mode=g.mode))
    check = is_generating(tree, g)
    if not check.ok:
        witness = find_ultrametric_violation(g)
        if witness is None:
            # single linkage failed to recover but no triple violates: bug
            raise PreconditionError(
                f"single linkage produced a non-generating tree ({check.witness}) "
                "on an input with no ultrametric violation"
            )
        raise NotUltrametricError("graph is not generated from any ultrametric", witness)
    return GeneratingTree(tree, check.node_weight, mode=g.mode)


# ── text format ─────────────────────────────────────────────────────────────

def dump_generating_tree(gt: GeneratingTree) -> str:
    header = f"{_GENTREE_MAGIC} 1 {gt.mode}"
    return header + "\n" + serialize_tree(gt.tree, gt.node_weight) + "\n"


def load_generating_tree(text: str) -> GeneratingTree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise FormatError("gentree file needs a header line and a tree line", 0)
    head = lines[0].split()
    if len(head) != 3 or head[0] != _GENTREE_MAGIC or head[1] != "1":
        raise FormatError(f"bad gentree header: {lines[0]!r}", 0)
    mode = head[2]
    if mode not in (SIM, DIS):
        raise FormatError(f"bad gentree mode {mode!r}", 0)
    tree, weights = parse_tree_with_weights(lines[1])
    return GeneratingTree(tree, weights, mode=mode)
