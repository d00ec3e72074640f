"""Top-down algorithms: recursive cut trees (sparsest/densest, exact or
approximate), the linear-time ground-truth sparsest cut, local-search
densest cut, bisection 2-center, the fast pivot algorithm, and its robust
region-growing variant.

Every recursion here runs on an explicit work stack; caterpillar-shaped
outputs of a few thousand leaves must not hit the interpreter limit.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    InvariantError,
    PreconditionError,
)
from .graphs import DIS, SIM, Cut, WeightedGraph, dump_graph
from .rng import derive
from .trees import ClusterTree, TreeBuilder, union_tree

FINDER_KINDS = ("brute", "gt-fast", "local-search", "plugin")


@dataclass
class CutFinder:
    """A pluggable splitter for the recursive cut tree.

    kind "brute" is the exact sparsest (similarity) or densest
    (dissimilarity) cut; "gt-fast" the linear-time cut that is exact on
    ground-truth inputs; "local-search" the epsilon/n-locally-densest cut
    (dissimilarity only); "plugin" an external command reading the graph
    text format on stdin and printing one side of the cut.

    ``stats`` accumulates one record per found cut plus local-search
    iteration counters.
    """

    kind: str
    epsilon: float = 0.25
    command: tuple[str, ...] | None = None
    stats: dict = field(default_factory=lambda: {"cuts": [], "ls_iterations": []})

    def __post_init__(self):
        if self.kind not in FINDER_KINDS:
            raise PreconditionError(f"finder kind must be one of {FINDER_KINDS}")
        if self.kind == "local-search" and self.epsilon <= 0:
            raise PreconditionError("local-search epsilon must be > 0")
        if (self.kind == "plugin") != (self.command is not None):
            raise PreconditionError("plugin finders need a command, others must not")

    def find_cut(self, g: WeightedGraph, objective_mode: str) -> Cut:
        from .oracle import brute_densest_cut, brute_sparsest_cut

        if self.kind == "brute":
            cut, _ = (
                brute_sparsest_cut(g) if objective_mode == SIM else brute_densest_cut(g)
            )
        elif self.kind == "gt-fast":
            cut = (
                ground_truth_sparsest_cut(g)
                if objective_mode == SIM
                else ground_truth_densest_cut(g)
            )
        elif self.kind == "local-search":
            if objective_mode != DIS:
                raise PreconditionError(
                    "local-search densest cuts apply to dissimilarity inputs"
                )
            try:
                cut, ls_stats = local_search_densest_cut(g, self.epsilon)
                self.stats["ls_iterations"].append(ls_stats["iterations"])
            except DegenerateInputError:
                # all-zero subproblem: every cut has density 0, split trivially
                cut = Cut(frozenset([0]), frozenset(range(1, g.n)))
                self.stats["ls_iterations"].append(0)
        else:
            cut = self._plugin_cut(g)
        return cut

    def _plugin_cut(self, g: WeightedGraph) -> Cut:
        proc = subprocess.run(
            list(self.command),
            input=dump_graph(g),
            capture_output=True,
            text=True,
            check=False,
        )
        if proc.returncode != 0:
            raise InvariantError(
                f"plugin cut finder failed (exit {proc.returncode}): {proc.stderr.strip()}"
            )
        try:
            side = sorted({int(tok) for tok in proc.stdout.split()})
        except ValueError:
            raise InvariantError(f"plugin printed a non-vertex token: {proc.stdout!r}") from None
        if not side or any(v < 0 or v >= g.n for v in side) or len(side) >= g.n:
            raise InvariantError(f"plugin side must be a proper nonempty subset: {side}")
        rest = sorted(set(range(g.n)) - set(side))
        return Cut(frozenset(side), frozenset(rest))


def ground_truth_sparsest_cut(g: WeightedGraph) -> Cut:
    """O(n) sparsest cut, exact when ``g`` is a similarity ground-truth input.

    Probes vertex 0; the far side is everything at the minimum probe weight.
    """
    if g.n < 2:
        raise PreconditionError("need at least two vertices")
    w0 = g.weights[0, 1:]
    w_min = w0.min()
    side_a = frozenset([0]) | frozenset((np.flatnonzero(w0 > w_min) + 1).tolist())
    side_b = frozenset(range(g.n)) - side_a
    return Cut(side_a, side_b)


def ground_truth_densest_cut(g: WeightedGraph) -> Cut:
    """Mirror of the sparsest version for dissimilarity ground-truth inputs."""
    if g.n < 2:
        raise PreconditionError("need at least two vertices")
    w0 = g.weights[0, 1:]
    w_max = w0.max()
    side_a = frozenset([0]) | frozenset((np.flatnonzero(w0 < w_max) + 1).tolist())
    side_b = frozenset(range(g.n)) - side_a
    return Cut(side_a, side_b)


def local_search_densest_cut(
    g: WeightedGraph, epsilon: float
) -> tuple[Cut, dict]:
    """Single-vertex local search to an epsilon/n-locally-densest cut.

    Starts from A = {v} for (u, v) a maximum-weight edge (lexicographically
    smallest on ties) and repeatedly applies the lowest-index move that
    multiplies the density by more than (1 + epsilon/n).
    """
    if epsilon <= 0:
        raise PreconditionError("epsilon must be > 0")
    n = g.n
    w = g.weights
    if n < 2 or not np.any(w > 0):
        raise DegenerateInputError("local search needs at least one positive edge")
    iu, iv = np.nonzero(np.triu(w, 1) == np.triu(w, 1).max())
    u, v = int(iu[0]), int(iv[0])  # nonzero scans row-major: lexicographic min

    in_a = np.zeros(n, dtype=bool)
    in_a[v] = True
    deg = w.sum(axis=1)
    s_a = w[:, v].copy()  # s_a[x] = w(x, A)
    cut_val = float(deg[v])
    na, nb = 1, n - 1
    factor = 1.0 + epsilon / n
    iterations = 0
    # density strictly grows by > factor per move, so this cannot loop
    max_iter = int(np.ceil(np.log(max(n, 2)) / np.log(factor))) + 8

    while True:
        moved = False
        for x in range(n):
            if in_a[x]:
                if na == 1:
                    continue
                new_cut = cut_val + 2.0 * s_a[x] - deg[x]
                na2, nb2 = na - 1, nb + 1
            else:
                if nb == 1:
                    continue
                new_cut = cut_val + deg[x] - 2.0 * s_a[x]
                na2, nb2 = na + 1, nb - 1
            # new_cut/(na2*nb2) > factor * cut_val/(na*nb), cross-multiplied
            if new_cut * na * nb > factor * cut_val * na2 * nb2:
                if in_a[x]:
                    in_a[x] = False
                    s_a -= w[:, x]
                else:
                    in_a[x] = True
                    s_a += w[:, x]
                cut_val, na, nb = new_cut, na2, nb2
                iterations += 1
                moved = True
                break
        if not moved:
            break
        if iterations > max_iter:
            raise InvariantError(
                f"local search exceeded its iteration bound ({max_iter})"
            )

    side_a = frozenset(np.flatnonzero(in_a).tolist())
    side_b = frozenset(range(n)) - side_a
    return Cut(side_a, side_b), {"iterations": iterations, "seed_edge": (u, v)}


def recursive_cut_tree(
    g: WeightedGraph, finder: CutFinder, objective_mode: str | None = None
) -> ClusterTree:
    """Split by the finder's cut, recurse on both sides, join bottom-up."""
    mode = g.mode if objective_mode is None else objective_mode
    if mode not in (SIM, DIS):
        raise PreconditionError(f"bad objective mode {mode!r}")

    subtrees: dict[tuple[int, ...], ClusterTree] = {}
    stack: list[tuple[tuple[int, ...], bool]] = [(tuple(range(g.n)), False)]
    splits: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]] = {}
    while stack:
        verts, ready = stack.pop()
        if len(verts) == 1:
            subtrees[verts] = ClusterTree.leaf(verts[0])
            continue
        if ready:
            a, b = splits.pop(verts)
            subtrees[verts] = union_tree(subtrees.pop(a), subtrees.pop(b))
            continue
        idx = np.array(verts)
        sub = WeightedGraph(g.weights[np.ix_(idx, idx)], mode=g.mode)
        cut = finder.find_cut(sub, mode)
        a = tuple(verts[i] for i in sorted(cut.side_a))
        b = tuple(verts[i] for i in sorted(cut.side_b))
        if min(a) > min(b):
            a, b = b, a
        finder.stats["cuts"].append(
            {
                "vertices": verts,
                "side_a": a,
                "side_b": b,
                "cut_weight": float(
                    g.weights[np.ix_(np.array(a), np.array(b))].sum()
                ),
            }
        )
        splits[verts] = (a, b)
        stack.append((verts, True))
        stack.append((a, False))
        stack.append((b, False))
    return subtrees[tuple(range(g.n))]


def recursive_densest_cut_tree(g: WeightedGraph, epsilon: float) -> ClusterTree:
    """Recursive locally-densest-cut clustering for dissimilarity inputs."""
    if g.mode != DIS:
        raise PreconditionError("recursive densest cut expects a dissimilarity graph")
    return recursive_cut_tree(g, CutFinder("local-search", epsilon=epsilon), DIS)


def bisection_two_center(g: WeightedGraph, mode: str | None = None) -> ClusterTree:
    """Brute-force 2-center bisection, recursing on both parts.

    Similarity picks centers maximizing min over points of the better
    center similarity; dissimilarity minimizes the max over points of the
    nearer center distance.  Points tie toward the first center.
    """
    mode = g.mode if mode is None else mode
    w = g.weights

    def split(verts: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        idx = np.array(verts)
        k = len(idx)
        best_val = None
        best_pair = None
        for ii in range(k):
            for jj in range(ii + 1, k):
                rows = np.maximum(w[idx, idx[ii]], w[idx, idx[jj]]) if mode == SIM \
                    else np.minimum(w[idx, idx[ii]], w[idx, idx[jj]])
                others = np.delete(rows, [ii, jj])
                if others.size == 0:
                    val = np.inf if mode == SIM else -np.inf
                else:
                    val = others.min() if mode == SIM else others.max()
                better = (
                    best_val is None
                    or (val > best_val if mode == SIM else val < best_val)
                )
                if better:
                    best_val, best_pair = val, (ii, jj)
        ii, jj = best_pair
        wu = w[idx, idx[ii]]
        wv = w[idx, idx[jj]]
        to_u = wu >= wv if mode == SIM else wu <= wv
        to_u[ii] = True
        to_u[jj] = False
        a = tuple(int(x) for x in idx[to_u])
        b = tuple(int(x) for x in idx[~to_u])
        return a, b

    subtrees: dict[tuple[int, ...], ClusterTree] = {}
    splits: dict[tuple[int, ...], tuple] = {}
    stack: list[tuple[tuple[int, ...], bool]] = [(tuple(range(g.n)), False)]
    while stack:
        verts, ready = stack.pop()
        if len(verts) == 1:
            subtrees[verts] = ClusterTree.leaf(verts[0])
            continue
        if ready:
            a, b = splits.pop(verts)
            subtrees[verts] = union_tree(subtrees.pop(a), subtrees.pop(b))
            continue
        if len(verts) == 2:
            subtrees[verts] = union_tree(
                ClusterTree.leaf(verts[0]), ClusterTree.leaf(verts[1])
            )
            continue
        a, b = split(verts)
        splits[verts] = (a, b)
        stack.append((verts, True))
        stack.append((a, False))
        stack.append((b, False))
    return subtrees[tuple(range(g.n))]


def fast_pivot(g: WeightedGraph, seed: int = 0, tol: float = 0.0) -> ClusterTree:
    """Random-pivot bucketing: group by distinct pivot weight, recurse, fold.

    Exact on ground-truth similarity inputs.  Buckets use exact weight
    equality by default; ``tol`` groups weights within a tolerance for
    user data.
    """
    if g.mode != SIM:
        raise PreconditionError("fast_pivot expects a similarity graph")
    rng = derive(seed, "fast-pivot")
    w = g.weights

    def solve(verts: tuple[int, ...]) -> ClusterTree:
        # explicit stack: each frame buckets its vertices, then folds results
        result: dict[tuple[int, ...], ClusterTree] = {}
        stack: list[tuple[tuple[int, ...], bool, int, tuple]] = [(verts, False, -1, ())]
        while stack:
            vs, ready, pivot, buckets = stack.pop()
            if len(vs) == 1:
                result[vs] = ClusterTree.leaf(vs[0])
                continue
            if ready:
                tree = ClusterTree.leaf(pivot)
                for bucket in buckets:
                    tree = union_tree(tree, result.pop(bucket))
                result[vs] = tree
                continue
            pivot = vs[int(rng.integers(len(vs)))]
            others = np.array([x for x in vs if x != pivot])
            dists = w[pivot, others]
            order = np.argsort(-dists, kind="stable")
            buckets = []
            current = [int(others[order[0]])]
            cur_w = dists[order[0]]
            for t in order[1:]:
                if abs(dists[t] - cur_w) <= tol:
                    current.append(int(others[t]))
                else:
                    buckets.append(tuple(sorted(current)))
                    current = [int(others[t])]
                    cur_w = dists[t]
            buckets.append(tuple(sorted(current)))
            stack.append((vs, True, pivot, tuple(buckets)))
            for bucket in reversed(buckets):
                stack.append((bucket, False, -1, ()))
        return result[verts]

    return solve(tuple(range(g.n)))


def robust_pivot(g: WeightedGraph, delta: float = 1.0) -> ClusterTree:
    """Region-growing pivot clustering for perturbed ground-truth inputs.

    ``delta`` only declares the perturbation level the guarantee is for;
    the procedure itself is parameter-free.  From the pivot's component,
    repeatedly take the heaviest crossing edge (p1, p2), seed a bucket with
    p1's equal-weight neighbours outside the region, grow it by any vertex
    with an edge at least that heavy into the bucket or region, recurse per
    bucket, and fold in discovery order.
    """
    if delta < 1.0:
        raise PreconditionError(f"delta must be >= 1, got {delta}")
    if g.mode != SIM:
        raise PreconditionError("robust_pivot expects a similarity graph")
    w = g.weights

    result: dict[tuple[int, ...], ClusterTree] = {}
    stack: list[tuple[tuple[int, ...], bool, tuple]] = [(tuple(range(g.n)), False, ())]
    while stack:
        vs, ready, buckets = stack.pop()
        if len(vs) == 1:
            result[vs] = ClusterTree.leaf(vs[0])
            continue
        if ready:
            tree = ClusterTree.leaf(vs[0])
            for bucket in buckets:
                tree = union_tree(tree, result.pop(bucket))
            result[vs] = tree
            continue
        p = vs[0]
        region = [p]
        in_region = {p}
        buckets = []
        rest = [x for x in vs if x != p]
        while rest:
            reg = np.array(sorted(in_region))
            out = np.array(rest)
            block = w[np.ix_(reg, out)]
            w_i = block.max()
            ri, ci = np.nonzero(block == w_i)
            p1 = int(reg[ri[0]])  # row-major scan = lexicographic (p1, p2)
            bucket = set(int(x) for x in out[np.flatnonzero(w[p1, out] == w_i)])
            # closure: any outside vertex with an edge >= w_i into bucket+region
            while True:
                outside = np.array([x for x in rest if x not in bucket])
                if outside.size == 0:
                    break
                inside = np.array(sorted(bucket | in_region))
                gains = w[np.ix_(outside, inside)].max(axis=1) >= w_i
                if not gains.any():
                    break
                bucket.update(int(x) for x in outside[gains])
            buckets.append(tuple(sorted(bucket)))
            in_region.update(bucket)
            rest = [x for x in rest if x not in in_region]
        stack.append((vs, True, tuple(buckets)))
        for bucket in reversed(buckets):
            stack.append((bucket, False, ()))
    return result[tuple(range(g.n))]
