"""Hierarchical stochastic block model: sampler, expected graph with its
ground-truth tree, spectral projection, and the recovery pipeline
(project, geometric single linkage to k clusters, agglomerative merging by
maximum average cross weight, best-of repetitions).

The projection is a deterministic top-k singular-subspace projector
computed by orthogonal iteration, so repetitions differ only through the
tie randomization of the geometric single-linkage stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, PreconditionError
from .graphs import SIM, WeightedGraph
from .groundtruth import GeneratingTree, load_generating_tree
from .objectives import CostFunction, dasgupta, evaluate
from .rng import derive
from .trees import ClusterTree, TreeBuilder, lca, parse_tree_with_weights


@dataclass(frozen=True)
class HsbmParams:
    k: int
    top_tree: GeneratingTree            # on k leaves, similarity, weights in [0,1)
    p: tuple[float, ...]                # within-cluster probabilities
    f: tuple[float, ...]                # class probabilities, sum to 1
    n: int
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "f", tuple(float(x) for x in self.f))
        if self.k < 1:
            raise PreconditionError("k: must be >= 1")
        if self.n < 1:
            raise PreconditionError("n: must be >= 1")
        t = self.top_tree.tree
        if t.num_leaves != self.k or not np.array_equal(
            t.leaf_labels(), np.arange(self.k)
        ):
            raise PreconditionError("top_tree: needs leaves 0..k-1")
        if any(not (0.0 <= w < 1.0) for w in self.top_tree.node_weight.values()):
            raise PreconditionError("top_tree: weights must lie in [0, 1)")
        if len(self.p) != self.k or any(not (0.0 < x <= 1.0) for x in self.p):
            raise PreconditionError("p: need k values in (0, 1]")
        if len(self.f) != self.k or any(x <= 0 for x in self.f):
            raise PreconditionError("f: need k positive values")
        if abs(sum(self.f) - 1.0) > 1e-12:
            raise PreconditionError(f"f: must sum to 1, got {sum(self.f)}")
        if not (0.0 < self.alpha <= 1.0):
            raise PreconditionError("alpha: must lie in (0, 1]")
        if self.alpha * max(self.p) > 1.0 + 1e-12:
            raise PreconditionError("alpha: alpha * max(p) must be <= 1")
        par = t.parents()
        for i in range(self.k):
            parent = int(par[t.leaf_node_of(i)])
            if parent >= 0 and not self.p[i] > self.top_tree.node_weight[parent]:
                raise PreconditionError(
                    f"p: p[{i}] must exceed the parent weight "
                    f"{self.top_tree.node_weight[parent]}"
                )


@dataclass(frozen=True)
class HsbmSample:
    graph: WeightedGraph         # 0/1 weights, similarity
    labels: np.ndarray           # hidden assignment vertex -> cluster
    counts: np.ndarray           # per-cluster sizes


def _pair_probability_matrix(params: HsbmParams) -> np.ndarray:
    """k x k matrix of alpha-scaled connection probabilities."""
    k = params.k
    q = np.zeros((k, k))
    for i in range(k):
        q[i, i] = params.p[i]
        for j in range(i + 1, k):
            node = lca(params.top_tree.tree, i, j)
            q[i, j] = q[j, i] = params.top_tree.node_weight[node]
    return params.alpha * q


def sample(params: HsbmParams) -> HsbmSample:
    """Draw class sizes from the multinomial, then independent edges."""
    rng = derive(params.seed, "hsbm-sample")
    counts = rng.multinomial(params.n, params.f)
    labels = np.repeat(np.arange(params.k), counts)
    q = _pair_probability_matrix(params)
    prob = q[np.ix_(labels, labels)]
    u = rng.random((params.n, params.n))
    upper = np.triu(u < prob, 1)
    w = (upper | upper.T).astype(float)
    np.fill_diagonal(w, 0.0)
    return HsbmSample(WeightedGraph(w, mode=SIM), labels, counts)


def _expected_counts(params: HsbmParams) -> np.ndarray:
    base = np.floor(np.array(params.f) * params.n).astype(int)
    rem = params.n - base.sum()
    frac = np.array(params.f) * params.n - base
    for i in np.argsort(-frac, kind="stable")[:rem]:
        base[i] += 1
    return base


def ground_truth_tree(params: HsbmParams, labels: np.ndarray) -> GeneratingTree:
    """Expand each top-tree leaf into a balanced tree over its class."""
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=params.k)
    if np.any(counts < 1):
        raise PreconditionError("every cluster needs at least one vertex")
    top = params.top_tree.tree
    b = TreeBuilder()
    weight: dict[int, float] = {}

    def expand(cluster: int) -> int:
        verts = np.flatnonzero(labels == cluster)
        level = [b.leaf(int(v)) for v in verts]
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                node = b.join(level[i], level[i + 1])
                weight[node] = params.alpha * params.p[cluster]
                nxt.append(node)
            if len(level) % 2:
                node = b.join(nxt[-1], level[-1])
                weight[node] = params.alpha * params.p[cluster]
                nxt[-1] = node
            level = nxt
        return level[0]

    roots: dict[int, int] = {}
    for node in top.postorder():
        if top.is_leaf(node):
            roots[int(node)] = expand(int(top.labels[node]))
        else:
            joined = b.join(roots[int(top.left[node])], roots[int(top.right[node])])
            weight[joined] = params.alpha * params.top_tree.node_weight[int(node)]
            roots[int(node)] = joined
    tree = b.build(roots[int(top.root)])
    return GeneratingTree(tree, weight, mode=SIM)


def expected_graph(
    params: HsbmParams, labels: np.ndarray | None = None
) -> tuple[WeightedGraph, GeneratingTree]:
    """Complete graph of edge probabilities plus a tree generating it."""
    if labels is None:
        labels = np.repeat(np.arange(params.k), _expected_counts(params))
    labels = np.asarray(labels)
    if len(labels) != params.n:
        raise PreconditionError("labels must assign all n vertices")
    q = _pair_probability_matrix(params)
    w = q[np.ix_(labels, labels)].copy()
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w, mode=SIM), ground_truth_tree(params, labels)


# ── spectral projection ─────────────────────────────────────────────────────

@dataclass(frozen=True)
class SpectralProjection:
    points: np.ndarray        # (n, k) coordinates in the singular basis
    basis: np.ndarray         # (n, k) orthonormal columns
    effective_rank: int
    converged: bool
    iterations: int

    def projected_columns(self) -> np.ndarray:
        """The adjacency columns projected back into R^n (n x n)."""
        return self.basis @ self.points.T


def spectral_project(
    adjacency: np.ndarray | WeightedGraph,
    k: int,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> SpectralProjection:
    """Project adjacency columns onto the span of the top-k singular directions.

    Deterministic orthogonal iteration (fixed internal start) run until the
    subspace residual ||A Q - Q (Q^T A Q)||_F / ||A Q||_F drops below
    ``tol``.  Rank deficiency keeps the full basis but is reported via
    ``effective_rank``.
    """
    a = adjacency.weights if isinstance(adjacency, WeightedGraph) else np.asarray(adjacency, float)
    n = a.shape[0]
    if not (1 <= k <= n):
        raise PreconditionError(f"k must be in 1..n, got {k}")
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        return SpectralProjection(np.zeros((n, k)), np.eye(n, k), 0, True, 0)
    rng = derive(0, "spectral-start", n, k)
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = a @ q
        q, _ = np.linalg.qr(z)
        aq = a @ q
        core = q.T @ aq
        resid = float(np.linalg.norm(aq - q @ core))
        denom = max(float(np.linalg.norm(aq)), 1e-300)
        if resid / denom <= tol:
            converged = True
            break
    core = q.T @ (a @ q)
    eigs = np.linalg.eigvalsh(core)
    sigma = np.abs(eigs)
    rank = int(np.sum(sigma > 1e-10 * max(sigma.max(), 1e-300)))
    points = (q.T @ a).T
    return SpectralProjection(points, q, rank, converged, it)


# ── recovery pipeline ───────────────────────────────────────────────────────

def _single_linkage_clusters(points: np.ndarray, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Geometric single linkage down to k clusters; ties broken at random."""
    n = points.shape[0]
    if k >= n:
        return [np.array([i]) for i in range(n)]
    iu, iv = np.triu_indices(n, 1)
    d2 = ((points[iu] - points[iv]) ** 2).sum(axis=1)
    order = np.lexsort((rng.random(len(d2)), d2))
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for e in order:
        if comps == k:
            break
        ra, rb = find(int(iu[e])), find(int(iv[e]))
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [np.array(sorted(g)) for g in groups.values()]


def _merge_clusters_by_avg_cut(
    w: np.ndarray, clusters: list[np.ndarray]
) -> tuple[ClusterTree, list[tuple[int, int]]]:
    """Merge the pair maximizing cut/(|Ci||Cj|) until one remains; expand
    bottom clusters to balanced trees."""
    b = TreeBuilder()
    node_of: list[int] = []
    for cl in clusters:
        level = [b.leaf(int(v)) for v in sorted(cl)]
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(b.join(level[i], level[i + 1]))
            if len(level) % 2:
                nxt[-1] = b.join(nxt[-1], level[-1])
            level = nxt
        node_of.append(level[0])

    members = [np.array(sorted(cl)) for cl in clusters]
    active = list(range(len(clusters)))
    merges: list[tuple[int, int]] = []
    while len(active) > 1:
        best = None
        best_pair = None
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                i, j = active[ai], active[aj]
                cut = float(w[np.ix_(members[i], members[j])].sum())
                val = cut / (len(members[i]) * len(members[j]))
                if best is None or val > best:
                    best, best_pair = val, (ai, aj)
        ai, aj = best_pair
        i, j = active[ai], active[aj]
        merges.append((i, j))
        node_of[i] = b.join(node_of[i], node_of[j])
        members[i] = np.concatenate([members[i], members[j]])
        active.pop(aj)
    return b.build(node_of[active[0]]), merges


def recover_tree(
    hsample: HsbmSample,
    k: int,
    objective: CostFunction | None = None,
    repetitions: int | None = None,
    seed: int = 0,
) -> tuple[ClusterTree, dict]:
    """Best-of-repetitions recovery; returns the min-cost tree and stats."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    g = hsample.graph
    n = g.n
    cf = objective if objective is not None else dasgupta(max(64, n + 1))
    reps = repetitions if repetitions is not None else max(1, math.ceil(2 * k * math.log(max(n, 2))))
    proj = spectral_project(g.weights, min(k, n))
    best_tree: ClusterTree | None = None
    best_cost = None
    best_clusters: list[tuple[int, ...]] = []
    chosen = -1
    per_rep = []
    for r in range(reps):
        rng = derive(seed, "recover", r)
        clusters = _single_linkage_clusters(proj.points, k, rng)
        tree, _ = _merge_clusters_by_avg_cut(g.weights, clusters)
        cost = evaluate(cf, g, tree).total
        per_rep.append(
            {"sizes": sorted(len(c) for c in clusters), "cost": cost}
        )
        if best_cost is None or cost < best_cost:
            best_cost, best_tree, chosen = cost, tree, r
            best_clusters = [tuple(int(v) for v in c) for c in clusters]
    stats = {
        "repetitions": per_rep,
        "chosen": chosen,
        "cost": best_cost,
        "clusters": best_clusters,
        "projection_rank": proj.effective_rank,
        "projection_converged": proj.converged,
    }
    return best_tree, stats


# ── config file ─────────────────────────────────────────────────────────────

def parse_hsbm_config(text: str, seed: int = 0) -> HsbmParams:
    """Key-value config: k, n, alpha, f list, p list, top_tree (weighted)."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = line.split("=", 1)
        fields[key.strip()] = val.strip()
    missing = {"k", "n", "f", "p", "top_tree"} - set(fields)
    if missing:
        raise FormatError(f"hsbm config missing keys: {sorted(missing)}")
    try:
        k = int(fields["k"])
        n = int(fields["n"])
        alpha = float(fields.get("alpha", "1.0"))
        f = tuple(float(x) for x in fields["f"].split())
        p = tuple(float(x) for x in fields["p"].split())
    except ValueError as e:
        raise FormatError(f"hsbm config: {e}") from None
    if k == 1:
        top = GeneratingTree(ClusterTree.leaf(0), {}, mode=SIM)
    else:
        tree, weights = parse_tree_with_weights(fields["top_tree"])
        top = GeneratingTree(tree, weights, mode=SIM)
    return HsbmParams(k=k, top_tree=top, p=p, f=f, n=n, alpha=alpha, seed=seed)


def dump_hsbm_config(params: HsbmParams) -> str:
    from .trees import serialize_tree

    lines = [
        f"k = {params.k}",
        f"n = {params.n}",
        f"alpha = {params.alpha!r}",
        "f = " + " ".join(repr(x) for x in params.f),
        "p = " + " ".join(repr(x) for x in params.p),
        "top_tree = "
        + (
            serialize_tree(params.top_tree.tree, params.top_tree.node_weight)
            if params.k > 1
            else "0"
        ),
    ]
    return "\n".join(lines) + "\n"
