"""Submodular norms: norm oracles, property checks, online facility location,
stochastic probing and load balancing."""
from .generators import gen_lower_bound_tree, gen_random_euclidean, gen_random_probing, gen_star
from .loadbal import LoadBalInstance, brute_force_assign, greedy_assign, symmetric_reduction
from .metric import EuclideanMetric, MatrixMetric, TreeMetric
from .norms import (LpNorm, NormOracle, OrderedNorm, TopKNorm, evaluate, lovasz_norm, lp_norm,
                    marginal, norm_from_descriptor, norm_to_descriptor, ordered_norm,
                    prefix_indicator, rho, top_k_norm, unit_vector)
from .ofl import (OflInstance, offline_opt, run_ensemble, run_naive_uniform, run_nonuniform,
                  run_symmetric, run_uniform, stage_costs, verify_bounds)
from .ordered import ordered_approx
from .probing import (DiscreteDistribution, ProbingInstance, adaptive_opt, adaptivity_gap,
                      nonadaptive_opt, sweep_small_instances)
from .submodularity import check_dr_submodular, check_norm_axioms, check_submodular, scan_binary
from .utils import BudgetError, NonMonotoneError, ValidationError

__version__ = "1.0.0"

__all__ = [
    "BudgetError", "DiscreteDistribution", "EuclideanMetric", "LoadBalInstance", "LpNorm",
    "MatrixMetric", "NonMonotoneError", "NormOracle", "OflInstance", "OrderedNorm",
    "ProbingInstance", "TopKNorm", "TreeMetric", "ValidationError", "adaptive_opt",
    "adaptivity_gap", "brute_force_assign", "check_dr_submodular", "check_norm_axioms",
    "check_submodular", "evaluate", "gen_lower_bound_tree", "gen_random_euclidean",
    "gen_random_probing", "gen_star", "greedy_assign", "lovasz_norm", "lp_norm", "marginal",
    "nonadaptive_opt", "norm_from_descriptor", "norm_to_descriptor", "offline_opt",
    "ordered_approx", "ordered_norm", "prefix_indicator", "rho", "run_ensemble",
    "run_naive_uniform", "run_nonuniform", "run_symmetric", "run_uniform", "scan_binary",
    "stage_costs", "sweep_small_instances", "symmetric_reduction", "top_k_norm", "unit_vector",
    "verify_bounds",
]
