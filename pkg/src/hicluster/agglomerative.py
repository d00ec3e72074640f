"""The linkage family.

All three kinds share one dist table: single is the minimum cross edge,
complete the maximum, average the mean cross weight.  The policy's merge
direction follows the setting it is named for: similarity merges the pair
of maximum dist, dissimilarity the pair of minimum dist (for average
linkage that is exactly the classic dissimilarity algorithm).

Tie-breaking is part of the policy.  "lowest-index" orders tied pairs by
their smallest leaves; "highest-index" is the mirror (useful to exercise a
second deterministic schedule); a script pins the exact merge sequence and
replay verifies every scripted merge is among the tied optima at its step,
which is how the worst-case reproductions are validated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError, PreconditionError
from .graphs import DIS, SIM, WeightedGraph
from .objectives import dasgupta, evaluate
from .trees import ClusterTree, TreeBuilder

KINDS = ("single", "complete", "average")


@dataclass(frozen=True)
class MergeStep:
    a: tuple[int, ...]  # leaves of the side with the smaller minimum
    b: tuple[int, ...]
    value: float        # dist of the merged pair


@dataclass(frozen=True)
class LinkagePolicy:
    kind: str
    mode: str = SIM  # "sim": merge argmax dist; "dis": merge argmin dist
    tie_break: str = "lowest-index"  # "lowest-index" | "highest-index" | "script"
    script: tuple[tuple[frozenset, frozenset], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.mode not in (SIM, DIS):
            raise PreconditionError(f"bad mode {self.mode!r}")
        if self.tie_break not in ("lowest-index", "highest-index", "script"):
            raise PreconditionError(f"bad tie_break {self.tie_break!r}")
        if (self.tie_break == "script") != (self.script is not None):
            raise PreconditionError("script policies need a script, others must not have one")
        if self.script is not None:
            object.__setattr__(
                self,
                "script",
                tuple((frozenset(a), frozenset(b)) for a, b in self.script),
            )


def linkage(
    g: WeightedGraph, policy: LinkagePolicy
) -> tuple[ClusterTree, list[MergeStep]]:
    """Run the linkage algorithm; returns the tree and its merge trace.

    The returned tree's internal node for the t-th merge has node id
    ``g.n + t``, so merge levels map directly onto internal nodes.
    """
    n = g.n
    builder = TreeBuilder()
    node_of = [builder.leaf(i) for i in range(n)]
    if n == 1:
        return builder.build(node_of[0]), []

    w = g.weights
    # pairwise dist over active clusters; diagonal is never a candidate
    if policy.kind == "average":
        sums = w.copy()
        sizes = np.ones(n)
        dist = w.copy()
    else:
        dist = w.copy()
    active = np.ones(n, dtype=bool)
    members: list[np.ndarray | None] = [np.array([i]) for i in range(n)]
    minleaf = np.arange(n)
    maximize = policy.mode == SIM
    script = list(policy.script) if policy.script else []
    trace: list[MergeStep] = []

    np.fill_diagonal(dist, -np.inf if maximize else np.inf)

    for step in range(n - 1):
        sub = dist[np.ix_(active, active)]
        act_idx = np.flatnonzero(active)
        if maximize:
            best = sub.max()
        else:
            best = sub.min()
        ti, tj = np.nonzero(sub == best)
        keep = ti < tj
        cand = list(zip(act_idx[ti[keep]].tolist(), act_idx[tj[keep]].tolist()))
        # order candidates by the leaf-index rule
        keyed = sorted(
            cand,
            key=lambda p: tuple(sorted((minleaf[p[0]], minleaf[p[1]]))),
        )
        if script:
            want = (script[0][0], script[0][1])
            pick = None
            for i, j in keyed:
                fi = frozenset(members[i].tolist())
                fj = frozenset(members[j].tolist())
                if {fi, fj} == {want[0], want[1]}:
                    pick = (i, j)
                    break
            if pick is None:
                raise InvariantError(
                    f"scripted merge {tuple(sorted(want[0]))}|{tuple(sorted(want[1]))} "
                    f"is not among the tied optima at step {step}"
                )
            script.pop(0)
            i, j = pick
        elif policy.tie_break == "highest-index":
            i, j = keyed[-1]
        else:
            i, j = keyed[0]

        ma, mb = members[i], members[j]
        if minleaf[j] < minleaf[i]:
            ma, mb = mb, ma
        trace.append(MergeStep(tuple(ma.tolist()), tuple(mb.tolist()), float(best)))

        # merge j into i
        node_of[i] = builder.join(
            node_of[i] if minleaf[i] <= minleaf[j] else node_of[j],
            node_of[j] if minleaf[i] <= minleaf[j] else node_of[i],
        )
        members[i] = np.concatenate([members[i], members[j]])
        members[j] = None
        minleaf[i] = min(minleaf[i], minleaf[j])
        active[j] = False
        if policy.kind == "average":
            sums[i, :] += sums[j, :]
            sums[:, i] += sums[:, j]
            sizes[i] += sizes[j]
            dist[i, :] = sums[i, :] / (sizes[i] * sizes)
            dist[:, i] = dist[i, :]
        elif policy.kind == "single":
            dist[i, :] = np.minimum(dist[i, :], dist[j, :])
            dist[:, i] = dist[i, :]
        else:  # complete
            dist[i, :] = np.maximum(dist[i, :], dist[j, :])
            dist[:, i] = dist[i, :]
        dist[i, i] = -np.inf if maximize else np.inf
        dist[j, :] = dist[:, j] = -np.inf if maximize else np.inf

    if script:
        raise InvariantError(f"{len(script)} scripted merges were never reached")
    root = node_of[int(np.flatnonzero(active)[0])]
    return builder.build(root), trace


def tree_from_trace(n: int, trace: list[MergeStep]) -> ClusterTree:
    """Rebuild the cluster tree a trace describes, without re-running linkage."""
    if len(trace) != n - 1:
        raise PreconditionError(f"trace must have {n - 1} entries, got {len(trace)}")
    b = TreeBuilder()
    node_of = {frozenset([i]): b.leaf(i) for i in range(n)}
    for step in trace:
        fa, fb = frozenset(step.a), frozenset(step.b)
        if fa not in node_of or fb not in node_of:
            raise PreconditionError(f"trace step {step} does not match prior merges")
        node_of[fa | fb] = b.join(node_of[fa], node_of[fb])
        del node_of[fa], node_of[fb]
    (root,) = node_of.values()
    return b.build(root)


def replay(g: WeightedGraph, policy: LinkagePolicy, trace: list[MergeStep]) -> ClusterTree:
    """Re-run linkage forcing the trace's merges, validating each against ties."""
    scripted = LinkagePolicy(
        kind=policy.kind,
        mode=policy.mode,
        tie_break="script",
        script=tuple((frozenset(s.a), frozenset(s.b)) for s in trace),
    )
    tree, _ = linkage(g, scripted)
    return tree


@dataclass(frozen=True)
class BoundCheck:
    val: float
    bound: float
    ok: bool


def average_linkage_value_bound_check(g: WeightedGraph) -> BoundCheck:
    """Run dissimilarity average linkage; check val >= n * total_weight / 2."""
    if g.mode != DIS:
        raise PreconditionError("the value bound is about dissimilarity inputs")
    tree, _ = linkage(g, LinkagePolicy(kind="average", mode=DIS))
    cf = dasgupta(max(64, g.n + 1))
    val = evaluate(cf, g, tree).total
    bound = g.n * g.total_weight() / 2.0
    return BoundCheck(val=val, bound=bound, ok=val >= bound - 1e-9)
