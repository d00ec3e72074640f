"""Command-line harness.

Subcommands: gen, perturb, cluster, eval, opt, check, bench.  Exit codes:
0 success, 2 usage or parse error, 3 resource guard, 4 internal invariant
breach.  Every run is fully determined by its flags and input files; all
randomness expands from the --seed flag through named PCG64 streams (see
rng.py), and HICLUSTER_MAX_N lifts the oracle guard at the user's risk.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .agglomerative import LinkagePolicy, linkage
from .divisive import (
    CutFinder,
    bisection_two_center,
    fast_pivot,
    recursive_cut_tree,
    robust_pivot,
)
from .errors import (
    FormatError,
    HiclusterError,
    InvariantError,
    PreconditionError,
    ResourceGuardError,
)
from .graphs import DIS, SIM, WeightedGraph, dump_graph, load_graph
from .groundtruth import (
    PerturbationSpec,
    dump_generating_tree,
    is_generating,
    load_generating_tree,
    perturb,
    random_generating_tree,
    realize,
)
from .hsbm import parse_hsbm_config, sample
from .instances import load_script, make_path, make_spine, make_star
from .objectives import (
    CostFunction,
    check_admissibility,
    dasgupta,
    evaluate,
    load_cost_function,
)
from .oracle import exact_opt
from .trees import parse_tree, serialize_tree

LINKAGE_ALGOS = ("single", "complete", "average")
DIVISIVE_ALGOS = ("sparsest", "densest-ls", "bisect2c", "pivot", "robust")


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
        digest = hashlib.sha256(text.encode()).hexdigest()[:16]
        print(f"{path} sha256:{digest}")


def _load_objective(spec: str, n_max_hint: int) -> CostFunction:
    if spec == "dasgupta":
        return dasgupta(max(64, n_max_hint + 1))
    if spec.startswith("file:"):
        return load_cost_function(Path(spec[5:]).read_text())
    raise PreconditionError(f"--objective must be 'dasgupta' or 'file:<path>', got {spec!r}")


def _cmd_gen(args) -> int:
    if args.family == "path":
        g = make_path(args.n)
        _write_output(dump_graph(g), args.out)
    elif args.family == "star":
        big = args.W if args.W is not None else float(args.n) ** 3
        _write_output(dump_graph(make_star(args.n, big)), args.out)
    elif args.family == "spine":
        _write_output(dump_graph(make_spine(args.k)), args.out)
    elif args.family == "ultrametric":
        gt = random_generating_tree(
            args.n, mode=args.mode, seed=args.seed, strict=args.strict
        )
        _write_output(dump_graph(realize(gt)), args.out)
        if args.gentree_out:
            _write_output(dump_generating_tree(gt), args.gentree_out)
    elif args.family == "hsbm":
        params = parse_hsbm_config(Path(args.config).read_text(), seed=args.seed)
        s = sample(params)
        _write_output(dump_graph(s.graph), args.out)
        labels_text = " ".join(str(int(x)) for x in s.labels) + "\n"
        _write_output(labels_text, args.labels_out or
                      ((args.out + ".labels") if args.out and args.out != "-" else "-"))
    return 0


def _cmd_perturb(args) -> int:
    g = load_graph(Path(args.input).read_text())
    out = perturb(g, PerturbationSpec(delta=args.delta, seed=args.seed))
    _write_output(dump_graph(out), args.out)
    return 0


def _policy_from_args(args, merge_mode: str) -> LinkagePolicy:
    if args.ties == "lowest":
        return LinkagePolicy(kind=args.algo, mode=merge_mode)
    if args.ties.startswith("script:"):
        script = load_script(Path(args.ties[7:]).read_text())
        return LinkagePolicy(kind=args.algo, mode=merge_mode,
                             tie_break="script", script=script)
    raise PreconditionError(f"--ties must be 'lowest' or 'script:<file>', got {args.ties!r}")


def _cmd_cluster(args) -> int:
    g = load_graph(Path(args.input).read_text())
    mode = args.mode or g.mode
    if mode != g.mode:
        g = WeightedGraph(g.weights, mode=mode)
    t0 = time.perf_counter()
    stats: dict = {"schema": 1, "algo": args.algo, "mode": mode, "n": g.n}
    if args.algo in LINKAGE_ALGOS:
        tree, trace = linkage(g, _policy_from_args(args, mode))
        if args.trace:
            stats["trace"] = [
                {"a": list(s.a), "b": list(s.b), "value": s.value} for s in trace
            ]
    elif args.algo == "sparsest":
        if args.cutfinder.startswith("plugin:"):
            finder = CutFinder("plugin", command=tuple(args.cutfinder[7:].split()))
        elif args.cutfinder == "gt-fast":
            finder = CutFinder("gt-fast")
        else:
            finder = CutFinder("brute")
        tree = recursive_cut_tree(g, finder, mode)
        stats["cuts"] = len(finder.stats["cuts"])
    elif args.algo == "densest-ls":
        if mode != DIS:
            raise PreconditionError("densest-ls applies to dissimilarity inputs (--mode dis)")
        finder = CutFinder("local-search", epsilon=args.epsilon)
        tree = recursive_cut_tree(g, finder, DIS)
        stats["ls_iterations"] = finder.stats["ls_iterations"]
    elif args.algo == "bisect2c":
        tree = bisection_two_center(g, mode)
    elif args.algo == "pivot":
        if mode != SIM:
            raise PreconditionError("pivot applies to similarity inputs (--mode sim)")
        tree = fast_pivot(g, seed=args.seed)
    elif args.algo == "robust":
        if mode != SIM:
            raise PreconditionError("robust applies to similarity inputs (--mode sim)")
        tree = robust_pivot(g, delta=args.delta)
    else:  # pragma: no cover - argparse restricts choices
        raise PreconditionError(f"unknown algo {args.algo!r}")
    stats["wall_ms"] = (time.perf_counter() - t0) * 1000.0
    cf = _load_objective(args.objective, g.n)
    report = evaluate(cf, g, tree)
    stats["objective_value"] = report.total
    _write_output(serialize_tree(tree) + "\n", args.out)
    if args.stats:
        Path(args.stats).write_text(json.dumps(stats, indent=2, default=float) + "\n")
    else:
        print(f"value {bench_mod._cell(report.total)}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    g = load_graph(Path(args.graph).read_text())
    tree = parse_tree(Path(args.tree).read_text())
    cf = _load_objective(args.objective, g.n)
    report = evaluate(cf, g, tree)
    print(bench_mod._cell(report.total))
    if args.per_node:
        for node, val in sorted(report.per_node.items()):
            print(f"node {node} {bench_mod._cell(val)}")
    return 0


def _cmd_opt(args) -> int:
    g = load_graph(Path(args.graph).read_text())
    cf = _load_objective(args.objective, g.n)
    direction = args.direction or ("max" if g.mode == DIS else "min")
    res = exact_opt(cf, g, direction=direction, max_n=args.max_n)
    print(bench_mod._cell(res.value))
    print(serialize_tree(res.tree))
    return 0


def _cmd_check(args) -> int:
    if args.generating:
        g = load_graph(Path(args.graph).read_text())
        tree = parse_tree(Path(args.tree).read_text())
        chk = is_generating(tree, g)
        if chk.ok:
            print("yes")
            for node, w in sorted(chk.node_weight.items()):
                print(f"node {node} W {bench_mod._cell(w)}")
        else:
            print(f"no {chk.witness}")
        return 0
    if args.admissible:
        cf = _load_objective(args.objective, args.n_max)
        rep = check_admissibility(cf, n_max=args.n_max)
        print("admissible" if rep.admissible else "not-admissible")
        print(f"clique-invariant {str(rep.clique_invariant).lower()}")
        print(f"symmetric {str(rep.symmetric).lower()}")
        print(f"strictly-monotone {str(rep.strictly_monotone).lower()}")
        if rep.witness:
            print(f"witness {rep.witness}")
        return 0
    raise PreconditionError("check needs --generating or --admissible")


def _cmd_bench(args) -> int:
    spec = bench_mod.load_spec(Path(args.spec).read_text())
    rows = bench_mod.run_bench(spec)
    text = bench_mod.rows_to_json(rows) if args.format == "json" else bench_mod.rows_to_csv(rows)
    _write_output(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hicluster",
                                description="hierarchical clustering toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate instances")
    gsub = g.add_subparsers(dest="family", required=True)
    for fam in ("path", "star", "spine", "ultrametric", "hsbm"):
        fp = gsub.add_parser(fam)
        fp.add_argument("-o", "--out", default="-")
        if fam in ("path", "star", "ultrametric"):
            fp.add_argument("--n", type=int, required=True)
        if fam == "star":
            fp.add_argument("--W", type=float, default=None)
        if fam == "spine":
            fp.add_argument("--k", type=int, required=True)
        if fam == "ultrametric":
            fp.add_argument("--mode", choices=(SIM, DIS), default=SIM)
            fp.add_argument("--strict", action="store_true")
            fp.add_argument("--seed", type=int, default=0)
            fp.add_argument("--gentree-out", default=None)
        if fam == "hsbm":
            fp.add_argument("--config", required=True)
            fp.add_argument("--seed", type=int, default=0)
            fp.add_argument("--labels-out", default=None)
    g.set_defaults(func=_cmd_gen)

    pp = sub.add_parser("perturb", help="inflate edge weights by uniform factors in [1, delta]")
    pp.add_argument("--input", required=True)
    pp.add_argument("--delta", type=float, required=True)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("-o", "--out", default="-")
    pp.set_defaults(func=_cmd_perturb)

    c = sub.add_parser("cluster", help="run a clustering algorithm")
    c.add_argument("--algo", choices=LINKAGE_ALGOS + DIVISIVE_ALGOS, required=True)
    c.add_argument("--mode", choices=(SIM, DIS), default=None)
    c.add_argument("--input", required=True)
    c.add_argument("--objective", default="dasgupta")
    c.add_argument("--epsilon", type=float, default=0.25)
    c.add_argument("--delta", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cutfinder", default="brute",
                   help="brute | gt-fast | plugin:<command>")
    c.add_argument("--ties", default="lowest", help="lowest | script:<file>")
    c.add_argument("--trace", action="store_true")
    c.add_argument("--stats", default=None)
    c.add_argument("-o", "--out", default="-")
    c.set_defaults(func=_cmd_cluster)

    e = sub.add_parser("eval", help="evaluate a tree against a graph")
    e.add_argument("--graph", required=True)
    e.add_argument("--tree", required=True)
    e.add_argument("--objective", default="dasgupta")
    e.add_argument("--per-node", action="store_true")
    e.set_defaults(func=_cmd_eval)

    o = sub.add_parser("opt", help="exact optimum by subset DP")
    o.add_argument("--graph", required=True)
    o.add_argument("--objective", default="dasgupta")
    o.add_argument("--direction", choices=("min", "max"), default=None)
    o.add_argument("--max-n", type=int, default=None)
    o.set_defaults(func=_cmd_opt)

    k = sub.add_parser("check", help="generating / admissibility verdicts")
    k.add_argument("--generating", action="store_true")
    k.add_argument("--admissible", action="store_true")
    k.add_argument("--graph")
    k.add_argument("--tree")
    k.add_argument("--objective", default="dasgupta")
    k.add_argument("--n-max", type=int, default=8)
    k.set_defaults(func=_cmd_check)

    b = sub.add_parser("bench", help="run an experiment spec")
    b.add_argument("--spec", required=True)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("-o", "--out", default="-")
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceGuardError as e:
        print(f"hicluster: resource guard: {e}", file=sys.stderr)
        return 3
    except (FormatError, PreconditionError) as e:
        print(f"hicluster: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"hicluster: {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"hicluster: invariant breach: {e}", file=sys.stderr)
        return 4
    except HiclusterError as e:
        print(f"hicluster: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
