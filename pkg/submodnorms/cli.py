"""Command-line interface.

    submodnorms norms   check|approx|rho
    submodnorms ofl     run|naive|opt|bounds|lowerbound
    submodnorms probe   adap|na|gap|sweep
    submodnorms loadbal greedy|opt
    submodnorms gen     star|tree|euclid|probing

Tables go to CSV and documents to JSON, on standard output unless --output is
given. Exit status: 0 on success, 1 on invalid input or usage, 2 when an
enumeration budget would be exceeded.
"""
import argparse
import json
import logging
import math
import sys

import numpy as np
import pandas as pd
from pydantic import ValidationError as PydanticValidationError

from . import generators, io, loadbal, ofl, ordered, probing, submodularity
from .norms import lp_norm, norm_from_descriptor, rho
from .schemas import Budgets, ExperimentConfig
from .utils import RTOL, BudgetError, NonMonotoneError, ValidationError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# Helpers

def _load_norm(value):
    text = value.strip()
    if text.startswith("{"):
        try:
            return norm_from_descriptor(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--norm is not valid JSON: {exc}") from exc
    return norm_from_descriptor(io.read_json(value))


def _config(args):
    try:
        return ExperimentConfig(
            seed=args.seed,
            ensemble=getattr(args, "seeds", 1),
            workers=getattr(args, "workers", 1),
            output=args.output,
            budgets=Budgets(
                max_candidates=getattr(args, "max_candidates", ofl.MAX_CANDIDATES),
                max_assignments=getattr(args, "max_assignments", loadbal.MAX_ASSIGNMENTS),
                max_probe_states=getattr(args, "max_states", probing.MAX_PROBE_STATES),
            ),
        )
    except PydanticValidationError as exc:
        raise ValidationError(f"Invalid experiment configuration: {exc}") from exc


def _emit_frame(df, output):
    if output:
        io.write_csv(df, output)
        logger.info("Wrote %d rows to %s", len(df), output)
    else:
        sys.stdout.write(io.frame_to_csv(df))


def _emit_json(obj, output):
    if output:
        io.write_json(obj, output)
        logger.info("Wrote %s", output)
    else:
        sys.stdout.write(io.dumps_json(obj))


# norms

def cmd_norms_check(args):
    norm = _load_norm(args.norm)
    rows = []
    wanted = args.characterization
    for char in ([1, 2, 3, 4, "dr", "axioms"] if wanted == "all" else [wanted]):
        if char == "axioms":
            report = submodularity.check_norm_axioms(norm, trials=args.trials, tol=args.tol, seed=args.seed)
            count = len(report.homogeneity) + len(report.triangle) + len(report.monotonicity)
            rows.append({"check": "norm-axioms", "trials": report.trials, "violations": count,
                         "worst_slack": np.nan, "passed": report.passed})
            continue
        if char == "dr":
            report = submodularity.check_dr_submodular(norm, trials=args.trials, tol=args.tol, seed=args.seed)
        elif args.exhaustive:
            report = submodularity.scan_binary(norm, int(char), tol=args.tol)
        else:
            report = submodularity.check_submodular(norm, trials=args.trials, tol=args.tol,
                                                    characterization=int(char), seed=args.seed)
        worst = report.worst()
        rows.append({"check": report.name, "trials": report.trials,
                     "violations": len(report.violations),
                     "worst_slack": worst.slack if worst else np.nan, "passed": report.passed})
        if worst is not None:
            logger.info("%s witness: x=%s y=%s lhs=%.12g rhs=%.12g", report.name,
                        worst.x.tolist(), worst.y.tolist(), worst.lhs, worst.rhs)
    _emit_frame(pd.DataFrame(rows), args.output)
    return 0


def cmd_norms_approx(args):
    norm = _load_norm(args.norm)
    approx = ordered.ordered_approx(norm, tol=args.tol, seed=args.seed)
    _emit_json({"levels": approx.levels, "rho": approx.rho, "factor": approx.factor,
                "norm": approx.norm.descriptor()}, args.output)
    return 0


def cmd_norms_rho(args):
    _emit_json({"rho": rho(_load_norm(args.norm))}, args.output)
    return 0


# ofl

def _ensemble(args, runner):
    config = _config(args)
    instance = io.load_ofl_instance(args.instance)
    runner = runner or args.runner or ("uniform" if instance.is_uniform else "nonuniform")
    opt = ofl.offline_opt(instance, max_candidates=config.budgets.max_candidates)
    traces = ofl.run_ensemble(instance, runner, config.seeds(), config.workers)
    report = ofl.verify_bounds(traces, opt, instance)
    if args.traces:
        io.write_csv(ofl.ensemble_table(traces), args.traces)
    if args.step_trace:
        seed = config.seed if args.trace_seed is None else args.trace_seed
        if seed < 0:
            raise ValidationError(f"--trace-seed must be non-negative, got {seed}")
        trace = ofl.RUNNERS[runner](instance, seed)
        io.write_csv(trace.to_frame(), args.step_trace)
        logger.info("Wrote the %d-step %s trace for seed %d to %s", len(trace.steps), runner, seed,
                    args.step_trace)
    return config, instance, opt, traces, report


def cmd_ofl_run(args, runner=None):
    config, _, _, traces, report = _ensemble(args, runner)
    _emit_frame(ofl.ensemble_summary(traces, report), config.output)
    return 0


def cmd_ofl_naive(args):
    return cmd_ofl_run(args, runner="naive")


def cmd_ofl_opt(args):
    config = _config(args)
    instance = io.load_ofl_instance(args.instance)
    opt = ofl.offline_opt(instance, max_candidates=config.budgets.max_candidates)
    _emit_json({"facilities": opt.facilities, "distances": opt.distances,
                "opening_cost": opt.opening_cost, "connection_cost": opt.connection_cost,
                "cost": opt.cost, "clusters": {str(i): q for i, q in opt.clusters.items()}},
               config.output)
    return 0


def cmd_ofl_bounds(args):
    config, instance, opt, traces, report = _ensemble(args, None)
    summary = ofl.ensemble_summary(traces, report)
    if args.stages:
        stages = [ofl.stage_costs(t, opt, instance) for t in traces]
        summary["ld_mean"] = np.mean([s.long_distance for s in stages])
        summary["sd_mean"] = np.mean([s.short_distance for s in stages])
        summary["ld_bound"] = stages[0].ld_bound
        summary["sd_bound"] = stages[0].sd_bound
    _emit_frame(summary, config.output)
    return 0


def cmd_ofl_lowerbound(args):
    config = _config(args)
    if args.norm:
        norms = [_load_norm(args.norm)]
    else:
        norms = [lp_norm(k ** k, 1) for k in args.k]

    rows = []
    for norm in norms:
        ratios = []
        info = None
        for seed in config.seeds():
            instance, info = generators.gen_lower_bound_tree(norm, arity=args.arity, seed=seed)
            opt = ofl.offline_opt(instance, max_candidates=config.budgets.max_candidates)
            trace = ofl.run_uniform(instance, seed)
            ratios.append(trace.total_cost / opt.cost)
        ratios = np.array(ratios)
        stderr = ratios.std(ddof=1) / math.sqrt(ratios.size) if ratios.size > 1 else 0.0
        rows.append({"k": info.k, "n": norm.n, "arity": info.arity, "seeds": ratios.size,
                     "mean_ratio": ratios.mean(), "stderr": stderr, "k_over_4": info.k / 4.0,
                     "opt_bound": info.opt_bound, "estimate": "finite-arity"})
    _emit_frame(pd.DataFrame(rows), config.output)
    return 0


# probe

def cmd_probe_adap(args):
    config = _config(args)
    instance = io.load_probing_instance(args.instance)
    policy, value = probing.adaptive_opt(instance, max_states=config.budgets.max_probe_states)
    _emit_json({"adaptive": value, "policy_nodes": policy.size(),
                "probe_sets": [list(s) for s in policy.probe_sets()]}, config.output)
    return 0


def cmd_probe_na(args):
    config = _config(args)
    instance = io.load_probing_instance(args.instance)
    chosen, value = probing.nonadaptive_opt(instance, max_states=config.budgets.max_probe_states)
    _emit_json({"nonadaptive": value, "set": list(chosen)}, config.output)
    return 0


def cmd_probe_gap(args):
    config = _config(args)
    budget = config.budgets.max_probe_states
    instance = io.load_probing_instance(args.instance)
    _, adap = probing.adaptive_opt(instance, max_states=budget)
    _, na = probing.nonadaptive_opt(instance, max_states=budget)
    _emit_json({"adaptive": adap, "nonadaptive": na,
                "ratio": probing.adaptivity_gap(instance, max_states=budget)}, config.output)
    return 0


def cmd_probe_sweep(args):
    table = probing.sweep_small_instances(n=args.n, workers=args.workers)
    _emit_frame(table, args.output)
    return 0


# loadbal

def _loadbal_instance(args):
    instance = io.load_loadbal_instance(args.instance)
    if args.symmetric:
        instance = loadbal.symmetric_reduction(instance)
    return instance


def cmd_loadbal_greedy(args):
    config = _config(args)
    instance = _loadbal_instance(args)
    order = None
    if args.order_seed is not None:
        order = np.random.default_rng(args.order_seed).permutation(instance.jobs).tolist()
    greedy = loadbal.greedy_assign(instance, order)
    opt = loadbal.brute_force_assign(instance, config.budgets.max_assignments) if args.with_opt else None
    _emit_frame(loadbal.loadbal_report(instance, greedy, opt), config.output)
    return 0


def cmd_loadbal_opt(args):
    config = _config(args)
    instance = _loadbal_instance(args)
    opt = loadbal.brute_force_assign(instance, config.budgets.max_assignments)
    _emit_frame(loadbal.loadbal_report(instance, opt), config.output)
    return 0


# gen

def cmd_gen_star(args):
    norm = _load_norm(args.norm) if args.norm else None
    _emit_json(io.ofl_instance_to_dict(generators.gen_star(args.n, args.f, norm)), args.output)
    return 0


def cmd_gen_tree(args):
    norm = _load_norm(args.norm) if args.norm else lp_norm(args.n, 1)
    instance, info = generators.gen_lower_bound_tree(norm, arity=args.arity, seed=args.seed)
    logger.info("Tree instance: k=%d, levels=%s, path=%s", info.k, info.levels, info.path)
    _emit_json(io.ofl_instance_to_dict(instance), args.output)
    return 0


def cmd_gen_euclid(args):
    norm = _load_norm(args.norm) if args.norm else None
    instance = generators.gen_random_euclidean(args.n, args.dim, args.seed, n_points=args.points,
                                               norm=norm, costs=args.costs, f=args.f)
    _emit_json(io.ofl_instance_to_dict(instance), args.output)
    return 0


def cmd_gen_probing(args):
    norm = _load_norm(args.norm) if args.norm else None
    instance = generators.gen_random_probing(args.n, args.support, args.seed, args.family, norm)
    _emit_json(io.probing_instance_to_dict(instance), args.output)
    return 0


# Parser

def build_parser():
    parser = ArgumentParser(prog="submodnorms",
                            description="Submodular and symmetric norm experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")

    common = ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="Write the result here instead of standard output")
    common.add_argument("--seed", type=int, default=0, help="Base random seed (default: 0)")

    groups = parser.add_subparsers(dest="group", required=True, metavar="{norms,ofl,probe,loadbal,gen}")

    # norms
    norms_parser = groups.add_parser("norms", help="Norm property checks")
    norms_cmds = norms_parser.add_subparsers(dest="command", required=True)
    p = norms_cmds.add_parser("check", parents=[common], help="Sampled submodularity and axiom checks")
    p.add_argument("--norm", required=True, help="Norm descriptor: JSON file or inline JSON")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=RTOL)
    p.add_argument("--characterization", default="all",
                   choices=["1", "2", "3", "4", "dr", "axioms", "all"])
    p.add_argument("--exhaustive", action="store_true", help="Scan all 0/1 vectors instead of sampling")
    p.set_defaults(func=cmd_norms_check)
    p = norms_cmds.add_parser("approx", parents=[common], help="Ordered approximation of a symmetric norm")
    p.add_argument("--norm", required=True)
    p.add_argument("--tol", type=float, default=RTOL)
    p.set_defaults(func=cmd_norms_approx)
    p = norms_cmds.add_parser("rho", parents=[common], help="||1|| / min ||e_i||")
    p.add_argument("--norm", required=True)
    p.set_defaults(func=cmd_norms_rho)

    # ofl
    ofl_parser = groups.add_parser("ofl", help="Online facility location")
    ofl_cmds = ofl_parser.add_subparsers(dest="command", required=True)
    ensemble = ArgumentParser(add_help=False, parents=[common])
    ensemble.add_argument("--instance", required=True)
    ensemble.add_argument("--seeds", type=int, default=1000, help="Ensemble size (default: 1000)")
    ensemble.add_argument("--workers", type=int, default=1)
    ensemble.add_argument("--max-candidates", type=int, default=20)
    ensemble.add_argument("--traces", help="Also write the per-seed cost table here")
    ensemble.add_argument("--step-trace", help="Also write the per-step trace of one seed here")
    ensemble.add_argument("--trace-seed", type=int, help="Seed of the --step-trace run (default: --seed)")
    p = ofl_cmds.add_parser("run", parents=[ensemble], help="Ensemble of online runs with bound check")
    p.add_argument("--runner", choices=["uniform", "nonuniform", "symmetric"])
    p.set_defaults(func=cmd_ofl_run)
    p = ofl_cmds.add_parser("naive", parents=[ensemble], help="Ensemble of the uncapped rule")
    p.set_defaults(func=cmd_ofl_naive)
    p = ofl_cmds.add_parser("bounds", parents=[ensemble], help="Bound check with stage costs")
    p.add_argument("--runner", choices=["uniform", "nonuniform", "symmetric"])
    p.add_argument("--stages", action="store_true", help="Add long/short-distance stage costs")
    p.set_defaults(func=cmd_ofl_bounds)
    p = ofl_cmds.add_parser("opt", parents=[common], help="Brute-force offline optimum")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-candidates", type=int, default=20)
    p.set_defaults(func=cmd_ofl_opt)
    p = ofl_cmds.add_parser("lowerbound", parents=[common], help="Tree lower-bound experiment")
    p.add_argument("--norm", help="Norm descriptor (default: l1 with n = k^k for each --k)")
    p.add_argument("--k", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--arity", type=int, default=generators.DEFAULT_ARITY)
    p.add_argument("--seeds", type=int, default=500)
    p.add_argument("--max-candidates", type=int, default=20)
    p.set_defaults(func=cmd_ofl_lowerbound)

    # probe
    probe_parser = groups.add_parser("probe", help="Stochastic probing")
    probe_cmds = probe_parser.add_subparsers(dest="command", required=True)
    for name, func, text in (("adap", cmd_probe_adap, "Optimal adaptive policy"),
                             ("na", cmd_probe_na, "Optimal fixed set"),
                             ("gap", cmd_probe_gap, "Adaptivity gap")):
        p = probe_cmds.add_parser(name, parents=[common], help=text)
        p.add_argument("--instance", required=True)
        p.add_argument("--max-states", type=int, default=probing.MAX_PROBE_STATES)
        p.set_defaults(func=func)
    p = probe_cmds.add_parser("sweep", parents=[common], help="Exhaustive small-instance gap sweep")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_probe_sweep)

    # loadbal
    lb_parser = groups.add_parser("loadbal", help="Generalized load balancing")
    lb_cmds = lb_parser.add_subparsers(dest="command", required=True)
    for name, func, text in (("greedy", cmd_loadbal_greedy, "Min-marginal greedy"),
                             ("opt", cmd_loadbal_opt, "Brute-force optimum")):
        p = lb_cmds.add_parser(name, parents=[common], help=text)
        p.add_argument("--instance", required=True)
        p.add_argument("--symmetric", action="store_true",
                       help="Replace symmetric inner norms by their ordered approximations")
        p.add_argument("--max-assignments", type=int, default=loadbal.MAX_ASSIGNMENTS)
        p.set_defaults(func=func)
    lb_cmds.choices["greedy"].add_argument("--order-seed", type=int,
                                           help="Process jobs in a random order from this seed")
    lb_cmds.choices["greedy"].add_argument("--with-opt", action="store_true",
                                           help="Also compute the brute-force optimum")

    # gen
    gen_parser = groups.add_parser("gen", help="Instance generators")
    gen_cmds = gen_parser.add_subparsers(dest="command", required=True)
    p = gen_cmds.add_parser("star", parents=[common], help="Star K_{1,n}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", type=float, default=1.0)
    p.add_argument("--norm", help="Norm descriptor (default: l-infinity)")
    p.set_defaults(func=cmd_gen_star)
    p = gen_cmds.add_parser("tree", parents=[common], help="Lower-bound tree")
    p.add_argument("--n", type=int, default=256, help="Dimension of the default l1 norm")
    p.add_argument("--norm")
    p.add_argument("--arity", type=int, default=generators.DEFAULT_ARITY)
    p.set_defaults(func=cmd_gen_tree)
    p = gen_cmds.add_parser("euclid", parents=[common], help="Random Euclidean instance")
    p.add_argument("--n", type=int, required=True, help="Number of requests")
    p.add_argument("--points", type=int, help="Number of points (default: n)")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--costs", choices=["uniform", "power_of_two"], default="uniform")
    p.add_argument("--f", type=float, default=1.0)
    p.add_argument("--norm", help="Norm descriptor (default: l1)")
    p.set_defaults(func=cmd_gen_euclid)
    p = gen_cmds.add_parser("probing", parents=[common], help="Random probing instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--support", type=int, choices=[2, 3], default=2)
    p.add_argument("--family", choices=["explicit", "cardinality", "matroid"], default="explicit")
    p.add_argument("--norm", help="Norm descriptor (default: l-infinity)")
    p.set_defaults(func=cmd_gen_probing)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format=LOG_FORMAT, stream=sys.stderr)
    try:
        return args.func(args)
    except BudgetError as exc:
        logger.error("Budget exceeded: %s", exc)
        return 2
    except (ValidationError, NonMonotoneError) as exc:
        logger.error("%s", exc)
        if isinstance(exc, NonMonotoneError):
            logger.error("Step state: %s", exc.dump)
        return 1


if __name__ == "__main__":
    sys.exit(main())
