"""Weighted graphs: the shared input type of every algorithm in the package.

A graph is a dense symmetric nonnegative weight matrix with zero diagonal;
a zero entry means "edge absent".  The ``mode`` flag records whether the
weights are similarities ("sim") or dissimilarities ("dis"); it changes
nothing about storage, only how algorithms and objectives interpret the
numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, PreconditionError

SIM = "sim"
DIS = "dis"

_GRAPH_MAGIC = "hicluster-graph"


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric nonnegative weights on ``n`` vertices."""

    weights: np.ndarray
    mode: str = SIM

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise PreconditionError(f"weights must be a square matrix, got shape {w.shape}")
        if w.shape[0] < 1:
            raise PreconditionError("graph needs at least one vertex")
        if not np.array_equal(w, w.T):
            raise PreconditionError("weights must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise PreconditionError("diagonal must be zero")
        if np.any(w < 0.0):
            raise PreconditionError("weights must be nonnegative")
        if self.mode not in (SIM, DIS):
            raise PreconditionError(f"mode must be {SIM!r} or {DIS!r}, got {self.mode!r}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def total_weight(self) -> float:
        """Sum of all edge weights (each unordered pair once)."""
        return float(np.triu(self.weights, 1).sum())

    def edges(self) -> list[tuple[int, int, float]]:
        """All positive-weight edges as (u, v, w) with u < v."""
        iu, iv = np.nonzero(np.triu(self.weights, 1))
        return [(int(u), int(v), float(self.weights[u, v])) for u, v in zip(iu, iv)]


@dataclass(frozen=True)
class Cut:
    """A proper bipartition of the vertex set."""

    side_a: frozenset[int]
    side_b: frozenset[int]

    def __post_init__(self):
        if not self.side_a or not self.side_b:
            raise PreconditionError("both cut sides must be nonempty")
        if self.side_a & self.side_b:
            raise PreconditionError("cut sides must be disjoint")
        object.__setattr__(self, "side_a", frozenset(self.side_a))
        object.__setattr__(self, "side_b", frozenset(self.side_b))


def _vset(g: WeightedGraph, vs) -> np.ndarray:
    arr = np.asarray(sorted(vs), dtype=np.intp)
    if arr.size and (arr[0] < 0 or arr[-1] >= g.n):
        raise PreconditionError(f"vertex out of range for n={g.n}")
    if arr.size != len(set(map(int, arr))):
        raise PreconditionError("duplicate vertices in set")
    return arr


def cut_weight(g: WeightedGraph, a, b) -> float:
    """Total weight between disjoint vertex sets ``a`` and ``b``."""
    a = _vset(g, a)
    b = _vset(g, b)
    if np.intersect1d(a, b).size:
        raise PreconditionError("cut_weight: sides overlap")
    if a.size == 0 or b.size == 0:
        return 0.0
    return float(g.weights[np.ix_(a, b)].sum())


def inner_weight(g: WeightedGraph, a) -> float:
    """Total weight over unordered pairs inside ``a``."""
    a = _vset(g, a)
    if a.size < 2:
        return 0.0
    return float(g.weights[np.ix_(a, a)].sum()) / 2.0


def induced_subgraph(g: WeightedGraph, s) -> tuple[WeightedGraph, list[int]]:
    """Subgraph on ``s``; returns (subgraph, vertices) with vertices[new] = old."""
    s = _vset(g, s)
    if s.size == 0:
        raise PreconditionError("induced_subgraph: empty vertex set")
    sub = WeightedGraph(g.weights[np.ix_(s, s)], mode=g.mode)
    return sub, [int(v) for v in s]


def cut_sparsity(g: WeightedGraph, cut: Cut) -> float:
    """w(A,B) / (|A|*|B|); the density of the cut under the other reading."""
    a, b = sorted(cut.side_a), sorted(cut.side_b)
    return cut_weight(g, a, b) / (len(a) * len(b))


# ── text format v1 ──────────────────────────────────────────────────────────

def format_weight(w: float) -> str:
    """Render a weight: integers without a decimal point, floats via repr."""
    if w == int(w) and abs(w) < 2**53:
        return str(int(w))
    return repr(float(w))


def dump_graph(g: WeightedGraph) -> str:
    """Serialize to the v1 text format."""
    edges = g.edges()
    lines = [f"{_GRAPH_MAGIC} 1 {g.n} {len(edges)} {g.mode}"]
    for u, v, w in edges:
        lines.append(f"{u} {v} {format_weight(w)}")
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> WeightedGraph:
    """Parse the v1 text format; unlisted pairs have weight zero."""
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty graph file", 0)
    head = lines[0].split()
    if len(head) != 5 or head[0] != _GRAPH_MAGIC or head[1] != "1":
        raise FormatError(f"bad graph header: {lines[0]!r}", 0)
    try:
        n, m = int(head[2]), int(head[3])
    except ValueError:
        raise FormatError(f"bad graph header counts: {lines[0]!r}", 0) from None
    mode = head[4]
    if mode not in (SIM, DIS):
        raise FormatError(f"bad graph mode {mode!r}", 0)
    if n < 1:
        raise FormatError("graph must have n >= 1", 0)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != m:
        raise FormatError(f"expected {m} edge lines, found {len(body)}")
    w = np.zeros((n, n))
    offset = len(lines[0]) + 1
    for ln in lines[1:]:
        if not ln.strip():
            offset += len(ln) + 1
            continue
        parts = ln.split()
        try:
            u, v, wt = int(parts[0]), int(parts[1]), float(parts[2])
            if len(parts) != 3:
                raise ValueError
        except (ValueError, IndexError):
            raise FormatError(f"bad edge line {ln!r}", offset) from None
        if not (0 <= u < v < n):
            raise FormatError(f"edge endpoints must satisfy 0 <= u < v < n: {ln!r}", offset)
        if wt < 0:
            raise FormatError(f"negative weight: {ln!r}", offset)
        if w[u, v] != 0.0:
            raise FormatError(f"duplicate edge: {ln!r}", offset)
        w[u, v] = w[v, u] = wt
        offset += len(ln) + 1
    return WeightedGraph(w, mode=mode)
