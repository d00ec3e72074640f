"""Admissible cost/value functions of the form sum over nodes of
``w(cut at N) * g(|left|, |right|)``.

A cost function is determined by its base sequence ``g(i, 1)``: the clique
cost ``kappa(n) = sum_{i<n} i*g(i,1)`` follows, and the full table comes
from the clique-invariance identity

    g(n1, n2) = (kappa(n1+n2) - kappa(n1) - kappa(n2)) / (n1*n2).

With base ``g(i,1) = i + 1`` this recovers g(a,b) = a + b.  ``g`` values
are computed from ``kappa`` on demand (an O(1) difference), which is exact
and avoids materializing the n_max^2 table; construction still validates
strict monotonicity over the whole declared range.

The same formula serves similarity graphs (cost, minimized) and
dissimilarity graphs (value, maximized); the interpretation travels with
the graph's mode, not with the function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AdmissibilityError, FormatError, PreconditionError, ResourceGuardError
from .graphs import WeightedGraph
from .trees import ClusterTree, lca

DEFAULT_N_MAX = 4096

_G_MAGIC = "hicluster-g"


@dataclass(frozen=True)
class CostFunction:
    name: str
    n_max: int
    base: np.ndarray     # base[i] = g(i, 1), valid for 1 <= i < n_max
    kappa: np.ndarray    # kappa[m] for 0 <= m <= n_max
    table: np.ndarray | None = None  # explicit override, testing only

    def g(self, n1, n2):
        """g(n1, n2), vectorized over numpy arrays."""
        n1 = np.asarray(n1, dtype=np.int64)
        n2 = np.asarray(n2, dtype=np.int64)
        if np.any(n1 < 1) or np.any(n2 < 1) or np.any(n1 + n2 > self.n_max):
            raise PreconditionError(
                f"g({n1}, {n2}) outside table range 1..{self.n_max}"
            )
        if self.table is not None:
            return self.table[n1, n2]
        k = self.kappa
        return (k[n1 + n2] - k[n1] - k[n2]) / (n1 * n2)

    def g_scalar(self, n1: int, n2: int) -> float:
        return float(self.g(n1, n2))

    def g_table(self, limit: int | None = None) -> np.ndarray:
        """Dense (limit+1)x(limit+1) table of g values, NaN outside range."""
        limit = self.n_max if limit is None else min(limit, self.n_max)
        tab = np.full((limit + 1, limit + 1), np.nan)
        for n1 in range(1, limit):
            n2 = np.arange(1, limit - n1 + 1)
            tab[n1, 1 : limit - n1 + 1] = self.g(np.full_like(n2, n1), n2)
        return tab


@dataclass(frozen=True)
class ObjectiveReport:
    total: float
    per_node: dict[int, float]


def _kappa_from_base(base: np.ndarray, n_max: int) -> np.ndarray:
    i = np.arange(n_max, dtype=np.float64)
    contrib = np.zeros(n_max)
    contrib[1:] = i[1:] * base[1:n_max]
    return np.concatenate([[0.0], np.cumsum(contrib)])


def from_base_sequence(base, n_max: int | None = None, name: str = "custom") -> CostFunction:
    """Build a CostFunction from its base sequence ``g(i, 1)``.

    ``base`` supplies g(i,1) for i = 1..len(base); the table range n_max
    defaults to len(base)+1.  Raises AdmissibilityError if the sequence is
    not positive with g(i,1)/(i+1) non-decreasing, or if the derived g is
    not strictly increasing somewhere in range.
    """
    vals = np.asarray(list(base), dtype=np.float64)
    if n_max is None:
        n_max = len(vals) + 1
    if len(vals) < n_max - 1:
        raise PreconditionError(f"need base values up to g({n_max - 1},1)")
    full = np.concatenate([[np.nan], vals])  # full[i] = g(i,1)
    if np.any(vals <= 0):
        raise AdmissibilityError("base sequence must be positive")
    ratios = full[1:n_max] / (np.arange(1, n_max) + 1.0)
    if np.any(np.diff(ratios) < -1e-12):
        i = int(np.flatnonzero(np.diff(ratios) < -1e-12)[0]) + 1
        raise AdmissibilityError(
            f"g(i,1)/(i+1) must be non-decreasing; first violation at i={i}"
        )
    kappa = _kappa_from_base(full, n_max)
    cf = CostFunction(name=name, n_max=n_max, base=full, kappa=kappa)
    _check_strict_monotone(cf)
    return cf


def _check_strict_monotone(cf: CostFunction):
    # derived symmetry is automatic from the kappa identity; monotonicity
    # g(n1+1, n2) > g(n1, n2) is what the base-sequence condition buys and
    # we verify it over the full table range.
    k = cf.kappa
    for n2 in range(1, cf.n_max - 1):
        n1 = np.arange(1, cf.n_max - n2)
        lo = (k[n1 + n2] - k[n1] - k[n2]) / (n1 * n2)
        hi = (k[n1 + 1 + n2] - k[n1 + 1] - k[n2]) / ((n1 + 1) * n2)
        bad = np.flatnonzero(hi <= lo)
        if bad.size:
            b = int(n1[bad[0]])
            raise AdmissibilityError(
                f"derived g not strictly increasing at (n1, n2) = ({b}, {n2})"
            )


@lru_cache(maxsize=None)
def dasgupta(n_max: int = DEFAULT_N_MAX) -> CostFunction:
    """The g(a, b) = a + b objective."""
    base = np.arange(1, n_max) + 1.0
    full = np.concatenate([[np.nan], base])
    cf = CostFunction(name="dasgupta", n_max=n_max, base=full,
                      kappa=_kappa_from_base(full, n_max))
    return cf


def _leafsets_for(g: WeightedGraph, t: ClusterTree) -> list[np.ndarray]:
    labels = t.leaf_labels()
    if len(labels) != g.n or labels[0] != 0 or labels[-1] != g.n - 1 or \
            not np.array_equal(labels, np.arange(g.n)):
        raise PreconditionError("tree leaves must be exactly the graph's vertices")
    return t.subtree_leaves()


def evaluate(cf: CostFunction, g: WeightedGraph, t: ClusterTree) -> ObjectiveReport:
    """Per-node cut costs and their total for tree ``t`` on graph ``g``."""
    if g.n > cf.n_max:
        raise PreconditionError(f"n={g.n} exceeds cost function range {cf.n_max}")
    leafsets = _leafsets_for(g, t)
    per_node: dict[int, float] = {}
    total = 0.0
    for node in t.internal_ids():
        a = leafsets[t.left[node]]
        b = leafsets[t.right[node]]
        cw = float(g.weights[np.ix_(a, b)].sum())
        val = cw * cf.g_scalar(len(a), len(b))
        per_node[int(node)] = val
        total += val
    return ObjectiveReport(total=total, per_node=per_node)


def evaluate_via_lca(cf: CostFunction, g: WeightedGraph, t: ClusterTree) -> float:
    """Independent evaluator: sum over edges of w(u,v)*g at the LCA's children."""
    if g.n > cf.n_max:
        raise PreconditionError(f"n={g.n} exceeds cost function range {cf.n_max}")
    _leafsets_for(g, t)  # validates leaf set
    sizes = t.subtree_sizes()
    total = 0.0
    iu, iv = np.nonzero(np.triu(g.weights, 1))
    for u, v in zip(iu.tolist(), iv.tolist()):
        node = lca(t, u, v)
        nl = int(sizes[t.left[node]])
        nr = int(sizes[t.right[node]])
        total += float(g.weights[u, v]) * cf.g_scalar(nl, nr)
    return total


def trivial_upper_bound(g: WeightedGraph) -> float:
    """n * (total edge weight): upper-bounds OPT in both settings."""
    return g.n * g.total_weight()


@dataclass(frozen=True)
class AdmissibilityReport:
    clique_invariant: bool
    symmetric: bool
    strictly_monotone: bool
    witness: str | None = None

    @property
    def admissible(self) -> bool:
        return self.clique_invariant and self.symmetric and self.strictly_monotone


def check_admissibility(cf: CostFunction, n_max: int = 8) -> AdmissibilityReport:
    """Executable check of the three admissibility conditions up to ``n_max``.

    Condition 1 (all trees on the unit clique K_n cost the same) is checked
    exhaustively through the exact oracle's min/max tree DP; conditions 2
    and 3 are checked on the g table directly.
    """
    from .oracle import enumerate_tree_costs  # local import, avoids cycle

    if n_max > 10:
        raise ResourceGuardError(f"check_admissibility capped at n_max=10, got {n_max}", n_max)
    if n_max > cf.n_max:
        raise PreconditionError(f"n_max={n_max} exceeds cost function range")
    witness = None

    clique_ok = True
    for n in range(2, n_max + 1):
        kn = WeightedGraph(np.ones((n, n)) - np.eye(n))
        res = enumerate_tree_costs(cf, kn)
        if res.distinct_count != 1:
            clique_ok = False
            witness = (
                f"K_{n}: tree {res.min_tree!r} costs {res.min_value}, "
                f"tree {res.max_tree!r} costs {res.max_value}"
            )
            break

    tab = cf.g_table(n_max)
    sym_ok = True
    mono_ok = True
    for n1 in range(1, n_max):
        for n2 in range(1, n_max - n1 + 1):
            if abs(tab[n1, n2] - tab[n2, n1]) > 1e-12 * max(1.0, abs(tab[n1, n2])):
                sym_ok = False
                witness = witness or f"g({n1},{n2}) != g({n2},{n1})"
            if n1 + n2 + 1 <= n_max and not tab[n1 + 1, n2] > tab[n1, n2]:
                mono_ok = False
                witness = witness or f"g({n1 + 1},{n2}) <= g({n1},{n2})"
    return AdmissibilityReport(clique_ok, sym_ok, mono_ok, witness)


# ── text format ─────────────────────────────────────────────────────────────

def dump_cost_function(cf: CostFunction) -> str:
    from .graphs import format_weight

    lines = [f"{_G_MAGIC} 1 {cf.n_max}"]
    lines += [format_weight(float(cf.base[i])) for i in range(1, cf.n_max)]
    return "\n".join(lines) + "\n"


def load_cost_function(text: str) -> CostFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty cost function file", 0)
    head = lines[0].split()
    if len(head) != 3 or head[0] != _G_MAGIC or head[1] != "1":
        raise FormatError(f"bad cost function header: {lines[0]!r}", 0)
    n_max = int(head[2])
    if len(lines) - 1 != n_max - 1:
        raise FormatError(f"expected {n_max - 1} base values, found {len(lines) - 1}")
    try:
        vals = [float(x) for x in lines[1:]]
    except ValueError as e:
        raise FormatError(f"bad base value: {e}") from None
    return from_base_sequence(vals, n_max=n_max, name="file")
