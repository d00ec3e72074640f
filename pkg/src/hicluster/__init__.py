"""hicluster: hierarchical clustering toolkit.

Admissible cost/value functions, the full algorithm roster (three linkage
kinds, recursive sparsest/densest cuts, local-search densest cut,
bisection 2-center, fast and robust pivots, HSBM spectral recovery),
ground-truth input generators, worst-case families, and an exact
brute-force oracle.
"""

from .graphs import DIS, SIM, Cut, WeightedGraph, cut_weight, induced_subgraph, inner_weight
from .trees import ClusterTree, lca, parse_tree, serialize_tree, union_tree
from .objectives import (
    CostFunction,
    check_admissibility,
    dasgupta,
    evaluate,
    evaluate_via_lca,
    from_base_sequence,
    trivial_upper_bound,
)
from .groundtruth import (
    GeneratingTree,
    PerturbationSpec,
    is_generating,
    minimal_representation,
    perturb,
    random_generating_tree,
    realize,
)
from .oracle import brute_densest_cut, brute_sparsest_cut, enumerate_tree_costs, exact_opt
from .agglomerative import LinkagePolicy, average_linkage_value_bound_check, linkage
from .divisive import (
    CutFinder,
    bisection_two_center,
    fast_pivot,
    ground_truth_sparsest_cut,
    local_search_densest_cut,
    recursive_cut_tree,
    recursive_densest_cut_tree,
    robust_pivot,
)
from .hsbm import HsbmParams, HsbmSample, expected_graph, recover_tree, sample, spectral_project

__version__ = "0.1.0"
