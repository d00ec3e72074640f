"""Reproducible experiment runner behind the ``bench`` subcommand.

A spec file is JSON: {"schema": 1, "experiments": [...]} where each
experiment is one of

  {"kind": "avg-linkage-bound", "n_min": 3, "n_max": 40, "seeds": 100}
  {"kind": "ratio", "family": "path", "algorithm": "complete",
   "sizes": [8, 16], "seeds": [0]}
  {"kind": "hsbm-recovery", "k": 3, "n": 300, "alpha": 1.0,
   "p": [0.9, 0.9, 0.9], "f": [0.34, 0.33, 0.33],
   "top_tree": "((0,1):0.5,2):0.1", "seeds": 20}

Rows come out in spec order then (n, seed) order regardless of execution
order, with fixed columns; judging the numbers is the acceptance suite's
job, so bench exits 0 even when a ratio looks bad.
"""

from __future__ import annotations

import json
import time

import numpy as np

from .agglomerative import average_linkage_value_bound_check
from .errors import FormatError
from .graphs import DIS, WeightedGraph
from .hsbm import HsbmParams, expected_graph, recover_tree, sample
from .groundtruth import GeneratingTree
from .instances import ratio_experiment
from .objectives import dasgupta, evaluate
from .rng import derive
from .trees import parse_tree_with_weights

COLUMNS = ("instance", "n", "seed", "algo", "objective_value",
           "oracle_or_bound", "ratio", "wall_ms", "ok")


def random_dissimilarity_graph(n: int, seed: int) -> WeightedGraph:
    """Random integer-weight dissimilarity graph with some missing edges."""
    rng = derive(seed, "random-dis", n)
    w = rng.integers(0, 9, size=(n, n)).astype(float)
    w = np.triu(w, 1)
    w = w + w.T
    return WeightedGraph(w, mode=DIS)


def load_spec(text: str) -> dict:
    try:
        spec = json.loads(text) if text.strip() else {"schema": 1, "experiments": []}
    except json.JSONDecodeError as e:
        raise FormatError(f"bench spec is not valid JSON: {e}") from None
    if spec.get("schema") != 1:
        raise FormatError("bench spec needs \"schema\": 1")
    if not isinstance(spec.get("experiments", []), list):
        raise FormatError("bench spec \"experiments\" must be a list")
    spec.setdefault("experiments", [])
    return spec


def _avg_linkage_rows(exp: dict) -> list[dict]:
    rows = []
    for n in range(int(exp.get("n_min", 3)), int(exp.get("n_max", 40)) + 1):
        for seed in range(int(exp.get("seeds", 1))):
            g = random_dissimilarity_graph(n, seed)
            t0 = time.perf_counter()
            chk = average_linkage_value_bound_check(g)
            ms = (time.perf_counter() - t0) * 1000.0
            rows.append({
                "instance": "random-dis", "n": n, "seed": seed,
                "algo": "average-linkage", "objective_value": chk.val,
                "oracle_or_bound": chk.bound,
                "ratio": chk.val / chk.bound if chk.bound else float("inf"),
                "wall_ms": ms, "ok": chk.ok,
            })
    return rows


def _ratio_rows(exp: dict) -> list[dict]:
    t0 = time.perf_counter()
    rr = ratio_experiment(
        exp["family"], exp["algorithm"],
        [int(s) for s in exp["sizes"]],
        [int(s) for s in exp.get("seeds", [0])],
    )
    ms = (time.perf_counter() - t0) * 1000.0 / max(len(rr), 1)
    return [{
        "instance": r.instance, "n": r.n, "seed": r.seed, "algo": r.algo,
        "objective_value": r.objective_value, "oracle_or_bound": r.oracle_or_bound,
        "ratio": r.ratio, "wall_ms": ms, "ok": r.ok,
    } for r in rr]


def _hsbm_rows(exp: dict) -> list[dict]:
    k = int(exp["k"])
    tree, weights = parse_tree_with_weights(exp["top_tree"])
    top = GeneratingTree(tree, weights)
    rows = []
    hits = 0
    seeds = int(exp.get("seeds", 1))
    for seed in range(seeds):
        params = HsbmParams(
            k=k, top_tree=top, p=tuple(exp["p"]), f=tuple(exp["f"]),
            n=int(exp["n"]), alpha=float(exp.get("alpha", 1.0)), seed=seed,
        )
        t0 = time.perf_counter()
        s = sample(params)
        rec, stats = recover_tree(s, k, seed=seed)
        ms = (time.perf_counter() - t0) * 1000.0
        _, gt = expected_graph(params, labels=s.labels)
        cf = dasgupta(max(64, params.n + 1))
        gt_cost = evaluate(cf, s.graph, gt.tree).total
        ratio = stats["cost"] / gt_cost if gt_cost else float("inf")
        ok = ratio <= 1.02
        hits += ok
        rows.append({
            "instance": f"hsbm-k{k}", "n": params.n, "seed": seed,
            "algo": "spectral-recover", "objective_value": stats["cost"],
            "oracle_or_bound": gt_cost, "ratio": ratio, "wall_ms": ms, "ok": ok,
        })
    rows.append({
        "instance": f"hsbm-k{k}", "n": int(exp["n"]), "seed": -1,
        "algo": "summary", "objective_value": hits / max(seeds, 1),
        "oracle_or_bound": 1.0, "ratio": hits / max(seeds, 1),
        "wall_ms": 0.0, "ok": hits / max(seeds, 1) >= 0.9,
    })
    return rows


def run_bench(spec: dict) -> list[dict]:
    rows: list[dict] = []
    for exp in spec["experiments"]:
        kind = exp.get("kind")
        if kind == "avg-linkage-bound":
            rows.extend(_avg_linkage_rows(exp))
        elif kind == "ratio":
            rows.extend(_ratio_rows(exp))
        elif kind == "hsbm-recovery":
            rows.extend(_hsbm_rows(exp))
        else:
            raise FormatError(f"unknown experiment kind {kind!r}")
    return rows


def _cell(v) -> str:
    from .graphs import format_weight

    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_weight(v) if v == int(v) else f"{v:.9g}"
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    out = [",".join(COLUMNS)]
    for r in rows:
        out.append(",".join(_cell(r[c]) for c in COLUMNS))
    return "\n".join(out) + "\n"


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps({"schema": 1, "rows": rows}, indent=2, default=float) + "\n"
