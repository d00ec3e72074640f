"""Brute-force ground truth: exact optimum over all cluster trees by
subset DP, exhaustive min/max tree costs, and brute-force sparsest and
densest cuts.

The DP solves OPT(S) = opt over bipartitions (A, S\\A) of
``cut(A, S\\A) * g(|A|, |S\\A|) + OPT(A) + OPT(S\\A)`` with singletons at 0,
iterating submasks (3^n work).  Inner weights of all 2^n subsets are
precomputed with a bit-doubling recurrence so each split costs O(1).

Guards: the DP refuses n > 16 by default (override via ``max_n`` or the
HICLUSTER_MAX_N environment variable, hard cap 20 since 3^20 submask steps
is beyond desk scale); tree-cost enumeration caps at n = 10 and the cut
brute force at n = 24.  Tie-breaking is deterministic: the optimizer picks
the lexicographically smallest side containing the least vertex.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ResourceGuardError
from .graphs import SIM, Cut, WeightedGraph
from .objectives import CostFunction
from .trees import ClusterTree, TreeBuilder

DP_DEFAULT_MAX_N = 16
DP_HARD_MAX_N = 20
ENUM_MAX_N = 10
CUT_MAX_N = 24

_pattern_cache: dict[int, np.ndarray] = {}


def _pattern(b: int) -> np.ndarray:
    """(2^b, b) 0/1 matrix whose row x is the binary expansion of x."""
    pat = _pattern_cache.get(b)
    if pat is None:
        xs = np.arange(1 << b, dtype=np.int64)
        pat = (xs[:, None] >> np.arange(b, dtype=np.int64)) & 1
        _pattern_cache[b] = pat
    return pat


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc[1 << i : 2 << i] = pc[: 1 << i] + 1
    return pc


def _inner_weight_table(w: np.ndarray) -> np.ndarray:
    """inner[S] = total weight of pairs inside subset S, for all 2^n masks."""
    n = w.shape[0]
    inner = np.zeros(1 << n)
    for i in range(n):
        block = 1 << i
        deg_i = np.zeros(block)
        for j in range(i):
            half = 1 << j
            deg_i[half : 2 * half] = deg_i[:half] + w[i, j]
        inner[block : 2 * block] = inner[:block] + deg_i
    return inner


def _lex_min_mask(cands: np.ndarray) -> int:
    """Lexicographically smallest vertex set among candidate bitmasks."""
    rem = cands
    stripped = cands.copy()
    while rem.size > 1:
        done = np.flatnonzero(stripped == 0)
        if done.size:
            return int(rem[done[0]])  # a shared prefix beats every extension
        b = (stripped & -stripped).min()
        keep = (stripped & b) != 0
        rem, stripped = rem[keep], stripped[keep] ^ b
    return int(rem[0])


def _mask_to_vertices(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _effective_dp_limit(max_n: int | None) -> int:
    limit = DP_DEFAULT_MAX_N
    env = os.environ.get("HICLUSTER_MAX_N")
    if env:
        try:
            limit = int(env)
        except ValueError:
            pass
    if max_n is not None:
        limit = max_n
    return min(limit, DP_HARD_MAX_N)


@dataclass(frozen=True)
class OptResult:
    value: float
    tree: ClusterTree
    table: dict[frozenset[int], float] | None = None


@dataclass(frozen=True)
class EnumResult:
    min_value: float
    max_value: float
    distinct_count: int  # 1 = all trees cost the same; 2 = at least two values
    min_tree: ClusterTree
    max_tree: ClusterTree


def _subset_dp(
    w: np.ndarray, gtab: np.ndarray, maximize: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (opt, choice) arrays over all masks; choice[S] = best A-side."""
    n = w.shape[0]
    size = 1 << n
    pc = _popcounts(n)
    inner = _inner_weight_table(w)
    opt = np.zeros(size)
    choice = np.zeros(size, dtype=np.int64)
    bitvals_all = 1 << np.arange(n, dtype=np.int64)
    order = np.argsort(pc, kind="stable")  # ascending popcount; subsets first
    for S in order:
        if pc[S] < 2:
            continue
        S = int(S)
        low = S & -S
        rest = S ^ low
        bits = bitvals_all[(rest & bitvals_all) != 0]
        b = len(bits)
        a_masks = low + (_pattern(b)[: (1 << b) - 1] @ bits)
        b_masks = S - a_masks
        vals = (inner[S] - inner[a_masks] - inner[b_masks]) * gtab[
            pc[a_masks], pc[b_masks]
        ] + opt[a_masks] + opt[b_masks]
        best = vals.max() if maximize else vals.min()
        ties = np.flatnonzero(vals == best)
        pick = a_masks[ties[0]] if ties.size == 1 else _lex_min_mask(a_masks[ties])
        opt[S] = best
        choice[S] = pick
    return opt, choice


def _tree_from_choice(choice: np.ndarray, full: int) -> ClusterTree:
    b = TreeBuilder()
    memo: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(full, False)]
    while stack:
        mask, ready = stack.pop()
        if mask in memo:
            continue
        if mask & (mask - 1) == 0:  # singleton
            memo[mask] = b.leaf(mask.bit_length() - 1)
            continue
        a = int(choice[mask])
        rest = mask ^ a
        if ready:
            memo[mask] = b.join(memo[a], memo[rest])
        else:
            stack.append((mask, True))
            stack.append((a, False))
            stack.append((rest, False))
    return b.build(memo[full])


def _gtab_for(cf: CostFunction, n: int) -> np.ndarray:
    gtab = np.zeros((n + 1, n + 1))
    for n1 in range(1, n):
        n2 = np.arange(1, n - n1 + 1)
        gtab[n1, 1 : n - n1 + 1] = cf.g(np.full_like(n2, n1), n2)
    return gtab


def exact_opt(
    cf: CostFunction,
    g: WeightedGraph,
    direction: str = "min",
    max_n: int | None = None,
    include_table: bool = False,
) -> OptResult:
    """Exact optimum of the objective over all cluster trees of ``g``."""
    if direction not in ("min", "max"):
        raise PreconditionError(f"direction must be 'min' or 'max', got {direction!r}")
    n = g.n
    if n == 1:
        return OptResult(0.0, ClusterTree.leaf(0), {frozenset([0]): 0.0} if include_table else None)
    limit = _effective_dp_limit(max_n)
    if n > limit:
        raise ResourceGuardError(
            f"exact_opt guard: n={n} exceeds limit {limit} "
            f"(raise via max_n or HICLUSTER_MAX_N, hard cap {DP_HARD_MAX_N})",
            n,
        )
    if n > cf.n_max:
        raise PreconditionError(f"n={n} exceeds cost function range {cf.n_max}")
    opt, choice = _subset_dp(g.weights, _gtab_for(cf, n), maximize=(direction == "max"))
    full = (1 << n) - 1
    table = None
    if include_table:
        table = {
            frozenset(_mask_to_vertices(m)): float(opt[m]) for m in range(1, full + 1)
        }
    return OptResult(float(opt[full]), _tree_from_choice(choice, full), table)


def enumerate_tree_costs(cf: CostFunction, g: WeightedGraph) -> EnumResult:
    """Min and max cost over ALL binary trees; distinct_count 1 certifies
    that every tree costs the same (clique invariance)."""
    n = g.n
    if n > ENUM_MAX_N:
        raise ResourceGuardError(f"enumerate_tree_costs guard: n={n} > {ENUM_MAX_N}", n)
    if n == 1:
        leaf = ClusterTree.leaf(0)
        return EnumResult(0.0, 0.0, 1, leaf, leaf)
    gtab = _gtab_for(cf, n)
    opt_min, ch_min = _subset_dp(g.weights, gtab, maximize=False)
    opt_max, ch_max = _subset_dp(g.weights, gtab, maximize=True)
    full = (1 << n) - 1
    lo, hi = float(opt_min[full]), float(opt_max[full])
    same = abs(hi - lo) <= 1e-9 * max(1.0, abs(hi))
    return EnumResult(
        lo, hi, 1 if same else 2,
        _tree_from_choice(ch_min, full), _tree_from_choice(ch_max, full),
    )


def _brute_cut(g: WeightedGraph, maximize: bool) -> tuple[Cut, float]:
    n = g.n
    if n < 2:
        raise PreconditionError("cuts need at least two vertices")
    if n > CUT_MAX_N:
        raise ResourceGuardError(f"brute cut guard: n={n} > {CUT_MAX_N}", n)
    pc = _popcounts(n)
    inner = _inner_weight_table(g.weights)
    full = (1 << n) - 1
    total = inner[full]
    best_val = -np.inf if maximize else np.inf
    best_masks: np.ndarray | None = None
    # A ranges over masks containing vertex 0: A = 2m + 1
    chunk = 1 << 20
    for start in range(0, 1 << (n - 1), chunk):
        m = np.arange(start, min(start + chunk, 1 << (n - 1)), dtype=np.int64)
        a = 2 * m + 1
        a = a[a != full]
        if a.size == 0:
            continue
        b = full - a
        vals = (total - inner[a] - inner[b]) / (pc[a] * pc[b])
        cand = vals.max() if maximize else vals.min()
        if (cand > best_val) if maximize else (cand < best_val):
            best_val = cand
            best_masks = a[vals == cand]
        elif cand == best_val:
            best_masks = np.concatenate([best_masks, a[vals == cand]])
    a_best = _lex_min_mask(best_masks)
    side_a = frozenset(_mask_to_vertices(a_best))
    side_b = frozenset(range(n)) - side_a
    return Cut(side_a, side_b), float(best_val)


def brute_sparsest_cut(g: WeightedGraph) -> tuple[Cut, float]:
    """Exact argmin of w(A,B)/(|A||B|) over proper cuts."""
    return _brute_cut(g, maximize=False)


def brute_densest_cut(g: WeightedGraph) -> tuple[Cut, float]:
    """Exact argmax of w(A,B)/(|A||B|) over proper cuts."""
    return _brute_cut(g, maximize=True)
