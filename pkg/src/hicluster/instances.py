"""Worst-case instance families and their certified adversarial runs.

Three generators: the unit path (bad for single/complete linkage on
similarities), the spine-of-paths family (bad for average linkage), and
the heavy-edge star (bad for most dissimilarity heuristics).  The
lower-bound reproductions need specific tie-breaking; those schedules ship
as scripts whose replay asserts every scripted merge is among the tied
optima at its step.  With the default lowest-index ties the bad outcomes
may not manifest.

Star complete-linkage follows the published worst-case trace, which merges
the pair of maximum dist: that is the similarity-mode merge rule applied
to the dissimilarity graph, and it is forced (no ties needed) because the
heavy edge dominates.  The min-merging variant would dodge the trap, so
the attack pins the merge-max rule explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .agglomerative import LinkagePolicy, MergeStep, linkage
from .divisive import bisection_two_center
from .errors import FormatError, InvariantError, PreconditionError
from .graphs import DIS, SIM, WeightedGraph
from .objectives import dasgupta, evaluate
from .rng import derive
from .trees import ClusterTree, TreeBuilder, balanced_tree, union_tree

Script = tuple[tuple[frozenset, frozenset], ...]


def make_path(n: int) -> WeightedGraph:
    """Unit-weight path on n vertices (similarity)."""
    if n < 2:
        raise PreconditionError("path needs n >= 2")
    w = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[idx, idx + 1] = w[idx + 1, idx] = 1.0
    return WeightedGraph(w, mode=SIM)


def spine_layout(k: int) -> tuple[list[int], dict[tuple[int, int], list[int]]]:
    """Vertex layout of the spine family: spine ids, then per-(i, j) path ids.

    Spine vertices are 0..k-1; path (i, j) occupies a block of k vertices
    whose last vertex attaches to spine vertex i.
    """
    spine = list(range(k))
    paths = {}
    for i in range(k):
        for j in range(k):
            start = k + (i * k + j) * k
            paths[(i, j)] = list(range(start, start + k))
    return spine, paths


def make_spine(k: int) -> WeightedGraph:
    """k^3 + k vertices: a k-path spine, k unit paths of length k per spine
    vertex, each attached by its last vertex (similarity)."""
    if k < 2:
        raise PreconditionError("spine needs k >= 2")
    n = k**3 + k
    w = np.zeros((n, n))
    spine, paths = spine_layout(k)
    for a, b in zip(spine, spine[1:]):
        w[a, b] = w[b, a] = 1.0
    for (i, _j), block in paths.items():
        for a, b in zip(block, block[1:]):
            w[a, b] = w[b, a] = 1.0
        w[block[-1], i] = w[i, block[-1]] = 1.0
    return WeightedGraph(w, mode=SIM)


def make_star(n: int, big_weight: float) -> WeightedGraph:
    """Dissimilarity clique of weight 1 with one heavy edge (v1, u) = W.

    Vertices 0..n-2 are v_1..v_{n-1}; vertex n-1 is u; requires W >= n^3.
    """
    if n < 3:
        raise PreconditionError("star needs n >= 3")
    if big_weight < n**3:
        raise PreconditionError(f"star needs W >= n^3 = {n**3}")
    w = np.ones((n, n)) - np.eye(n)
    w[0, n - 1] = w[n - 1, 0] = float(big_weight)
    return WeightedGraph(w, mode=DIS)


def star_u_split_tree(n: int) -> ClusterTree:
    """The good tree: u split off at the root (value >= n * W)."""
    return union_tree(balanced_tree(range(n - 1)), ClusterTree.leaf(n - 1))


def spine_reference_tree(k: int) -> ClusterTree:
    """Binarized version of the three-level spine tree with cost O(n^{4/3})."""
    spine, paths = spine_layout(k)

    def combine(trees: list[ClusterTree]) -> ClusterTree:
        level = list(trees)
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(union_tree(level[i], level[i + 1]))
            if len(level) % 2:
                nxt[-1] = union_tree(nxt[-1], level[-1])
            level = nxt
        return level[0]

    regions = []
    for i in spine:
        parts = [ClusterTree.leaf(i)]
        parts += [balanced_tree(paths[(i, j)]) for j in range(k)]
        regions.append(combine(parts))
    return combine(regions)


# ── adversarial schedules ───────────────────────────────────────────────────

def path_complete_script(n: int) -> Script:
    """Caterpillar schedule: grow {0..i} one vertex at a time."""
    return tuple(
        (frozenset(range(i + 1)), frozenset([i + 1])) for i in range(n - 1)
    )


def star_single_script(n: int) -> Script:
    """Merge (v1, v2), then absorb u while the min-dist still ties at 1."""
    return (
        (frozenset([0]), frozenset([1])),
        (frozenset([0, 1]), frozenset([n - 1])),
    )


def spine_average_script(k: int) -> Script:
    """A merge schedule forcing average linkage into the Omega(n^{5/3}) tree.

    For k a power of two the halving schedule applies: every round merges
    adjacent equal-size cluster pairs inside each path and inside the
    spine, so all positive dists tie and the adversary keeps paths and
    spine separate until only whole paths and the whole spine remain.  k=3
    uses a hand-built schedule with the same effect.
    """
    spine, paths = spine_layout(k)
    script: list[tuple[frozenset, frozenset]] = []
    if k == 3:
        for block in paths.values():
            script.append((frozenset([block[1]]), frozenset([block[2]])))
        script.append((frozenset([spine[0]]), frozenset([spine[1]])))
        script.append((frozenset(spine[:2]), frozenset([spine[2]])))
        for block in paths.values():
            script.append((frozenset([block[0]]), frozenset(block[1:])))
        return tuple(script)
    if k & (k - 1) != 0:
        raise PreconditionError(
            "adversarial spine schedule is built for k = 3 or k a power of two"
        )
    groups = [spine] + list(paths.values())
    size = 1
    while size < k:
        for block in groups:
            for start in range(0, k, 2 * size):
                a = frozenset(block[start : start + size])
                b = frozenset(block[start + size : start + 2 * size])
                script.append((a, b))
        size *= 2
    return tuple(script)


def _scripted_linkage(
    g: WeightedGraph, kind: str, merge_mode: str, script: Script | None
) -> tuple[ClusterTree, list[MergeStep]]:
    if script:
        policy = LinkagePolicy(kind=kind, mode=merge_mode, tie_break="script", script=script)
    else:
        policy = LinkagePolicy(kind=kind, mode=merge_mode)
    return linkage(g, policy)


def adversarial_path_complete(n: int) -> tuple[ClusterTree, float]:
    """Scripted complete linkage on the unit path; returns (tree, cost)."""
    g = make_path(n)
    tree, _ = _scripted_linkage(g, "complete", SIM, path_complete_script(n))
    return tree, evaluate(dasgupta(max(64, n + 1)), g, tree).total


def adversarial_star_single(n: int, big_weight: float) -> tuple[ClusterTree, float]:
    g = make_star(n, big_weight)
    tree, _ = _scripted_linkage(g, "single", DIS, star_single_script(n))
    return tree, evaluate(dasgupta(max(64, n + 1)), g, tree).total


def adversarial_star_complete(n: int, big_weight: float) -> tuple[ClusterTree, float]:
    """The published trace merges the max-dist pair, grabbing (v1, u) first."""
    g = make_star(n, big_weight)
    tree, trace = _scripted_linkage(g, "complete", SIM, None)
    first = {frozenset(trace[0].a), frozenset(trace[0].b)}
    if first != {frozenset([0]), frozenset([n - 1])}:
        raise InvariantError(f"star complete-linkage should merge (v1, u) first, got {trace[0]}")
    return tree, evaluate(dasgupta(max(64, n + 1)), g, tree).total


def adversarial_star_bisection(n: int, big_weight: float) -> tuple[ClusterTree, float]:
    """Bisection 2-center with adversarial but legal tie choices on the star.

    Centers (v2, v3) and the split {v1, v2, u} | rest; every choice is
    checked against the k-center objective before being applied.
    """
    g = make_star(n, big_weight)
    w = g.weights

    def center_value(c1: int, c2: int) -> float:
        others = [x for x in range(n) if x not in (c1, c2)]
        return max(min(w[x, c1], w[x, c2]) for x in others)

    best = min(center_value(a, b) for a in range(n) for b in range(a + 1, n))
    if center_value(1, 2) != best:
        raise InvariantError("centers (v2, v3) are not among the optimal center pairs")
    side_a = [0, 1, n - 1]
    side_b = [x for x in range(n) if x not in side_a]
    for x in side_a:
        if x != 1 and not w[x, 1] <= w[x, 2]:
            raise InvariantError(f"vertex {x} cannot legally join center v2's side")
    for x in side_b:
        if x != 2 and not w[x, 2] <= w[x, 1]:
            raise InvariantError(f"vertex {x} cannot legally join center v3's side")

    def solve(verts: list[int]) -> ClusterTree:
        if len(verts) == 1:
            return ClusterTree.leaf(verts[0])
        idx = np.array(verts)
        sub = WeightedGraph(w[np.ix_(idx, idx)], mode=DIS)
        local = bisection_two_center(sub)
        b = TreeBuilder()
        remap = {i: b.leaf(verts[i]) for i in range(len(verts))}
        order = local.postorder()
        nodes: dict[int, int] = {}
        for node in order:
            if local.is_leaf(node):
                nodes[int(node)] = remap[int(local.labels[node])]
            else:
                nodes[int(node)] = b.join(nodes[int(local.left[node])],
                                          nodes[int(local.right[node])])
        return b.build(nodes[int(local.root)])

    tree = union_tree(solve(side_a), solve(side_b))
    return tree, evaluate(dasgupta(max(64, n + 1)), g, tree).total


def adversarial_spine_average(k: int) -> tuple[ClusterTree, float]:
    g = make_spine(k)
    tree, _ = _scripted_linkage(g, "average", SIM, spine_average_script(k))
    n = g.n
    return tree, evaluate(dasgupta(max(64, n + 1)), g, tree).total


# ── script files ────────────────────────────────────────────────────────────

def dump_script(script: Script) -> str:
    lines = []
    for a, b in script:
        lines.append(" ".join(map(str, sorted(a))) + " | " + " ".join(map(str, sorted(b))))
    return "\n".join(lines) + "\n"


def load_script(text: str) -> Script:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "|" not in line:
            raise FormatError(f"script line {lineno}: expected 'a... | b...'")
        a, b = line.split("|", 1)
        try:
            fa = frozenset(int(x) for x in a.split())
            fb = frozenset(int(x) for x in b.split())
        except ValueError:
            raise FormatError(f"script line {lineno}: bad vertex id") from None
        if not fa or not fb or fa & fb:
            raise FormatError(f"script line {lineno}: sides must be disjoint and nonempty")
        out.append((fa, fb))
    return tuple(out)


# ── metric inputs (for the metric-sanity property) ──────────────────────────

def random_metric_graph(n: int, seed: int) -> WeightedGraph:
    """Random dissimilarity weights closed under the triangle inequality."""
    rng = derive(seed, "metric", n)
    w = rng.uniform(0.5, 2.0, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    # Floyd-Warshall closure makes it a metric
    for m in range(n):
        w = np.minimum(w, w[:, m : m + 1] + w[m : m + 1, :])
    np.fill_diagonal(w, 0.0)
    return WeightedGraph(w, mode=DIS)


# ── experiment driver ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class RatioRow:
    instance: str
    n: int
    seed: int
    algo: str
    objective_value: float
    oracle_or_bound: float
    ratio: float
    ok: bool


def ratio_experiment(
    family: str, algorithm: str, sizes: list[int], seeds: list[int] | None = None
) -> list[RatioRow]:
    """Growth-curve evidence for the worst-case separations.

    path/complete: scripted caterpillar vs the n*log2(n) optimum scale.
    path/sparsest: recursive exact sparsest cut vs exact OPT.
    star/{single,complete,bisect2c}: adversarial value vs n*W (ok if <= 4W).
    spine/average: scripted run vs 3*n^{4/3} (ok if >= n^{5/3}/4).
    """
    from .divisive import CutFinder, recursive_cut_tree
    from .oracle import exact_opt

    seeds = seeds or [0]
    rows: list[RatioRow] = []
    for size in sizes:
        for seed in seeds:
            if family == "path" and algorithm == "complete":
                _, cost = adversarial_path_complete(size)
                bound = size * math.log2(size)
                rows.append(RatioRow("path", size, seed, "complete-linkage",
                                     cost, bound, cost / bound, True))
            elif family == "path" and algorithm == "sparsest":
                g = make_path(size)
                tree = recursive_cut_tree(g, CutFinder("brute"), SIM)
                cost = evaluate(dasgupta(max(64, size + 1)), g, tree).total
                opt = exact_opt(dasgupta(max(64, size + 1)), g).value
                rows.append(RatioRow("path", size, seed, "recursive-sparsest",
                                     cost, opt, cost / opt, cost <= 6.75 * opt + 1e-9))
            elif family == "star":
                big = float(size) ** 3
                runner = {
                    "single": adversarial_star_single,
                    "complete": adversarial_star_complete,
                    "bisect2c": adversarial_star_bisection,
                }.get(algorithm)
                if runner is None:
                    raise PreconditionError(f"unknown star algorithm {algorithm!r}")
                _, val = runner(size, big)
                bound = size * big
                rows.append(RatioRow("star", size, seed, algorithm,
                                     val, bound, val / bound, val <= 4 * big))
            elif family == "spine" and algorithm == "average":
                g = make_spine(size)
                _, cost = adversarial_spine_average(size)
                n = g.n
                bound = 3.0 * n ** (4.0 / 3.0)
                rows.append(RatioRow("spine", n, seed, "average-linkage",
                                     cost, bound, cost / bound,
                                     cost >= n ** (5.0 / 3.0) / 4.0))
            else:
                raise PreconditionError(f"unknown experiment {family}/{algorithm}")
    return rows
