import math

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chi2_contingency

from submodnorms.generators import gen_random_euclidean, gen_star
from submodnorms.metric import MatrixMetric
from submodnorms.norms import lp_norm, top_k_norm, value_oracle_norm
from submodnorms.ofl import (OflInstance, _finish, _sample_level, cap_root, cost_levels,
                             ensemble_summary, ensemble_table, offline_opt, round_down_pow2,
                             run_ensemble, run_naive_uniform, run_nonuniform, run_symmetric,
                             run_uniform, stage_costs, tau_solve, verify_bounds)
from submodnorms.utils import BudgetError, NonMonotoneError, ValidationError


def line_instance(norm=None, costs=None):
    """Four points on a line at 0, 1, 2, 4; requests at 3, 0, 1, 0."""
    pos = np.array([0.0, 1.0, 2.0, 4.0])
    metric = MatrixMetric(np.abs(pos[:, None] - pos[None, :]))
    norm = norm or lp_norm(4, 1)
    if costs is None:
        return OflInstance.uniform(metric, [3, 0, 1, 0], 1.0, norm)
    return OflInstance(metric, [3, 0, 1, 0], costs, norm)


class TestInstance:
    def test_norm_dimension_must_match_requests(self):
        with pytest.raises(ValidationError, match="Norm dimension"):
            OflInstance.uniform(MatrixMetric([[0, 1], [1, 0]]), [0, 1], 1.0, lp_norm(3, 1))

    def test_requests_in_range(self):
        with pytest.raises(ValidationError, match="outside"):
            OflInstance.uniform(MatrixMetric([[0, 1], [1, 0]]), [0, 2], 1.0, lp_norm(2, 1))

    def test_candidates(self):
        instance = gen_star(3)
        assert instance.candidates == [0, 1, 2, 3]
        assert instance.is_uniform


class TestCapRoot:
    def test_cap_binds(self):
        z = cap_root(lp_norm(3, 1), np.zeros(3), 0, 2.0, 5.0)
        assert z == pytest.approx(2.0, rel=1e-8)
        assert z <= 2.0

    def test_cap_inactive_returns_upper(self):
        assert cap_root(lp_norm(3, 1), np.zeros(3), 0, 2.0, 1.5) == 1.5

    def test_unbounded_upper(self):
        z = cap_root(lp_norm(3, "inf"), np.array([3.0, 0, 0]), 1, 1.0, math.inf)
        assert z == pytest.approx(4.0, rel=1e-8)

    def test_marginal_never_exceeds_cost(self, rng):
        norm = top_k_norm(6, 2)
        for _ in range(50):
            prefix = rng.random(6) * 3
            i = int(rng.integers(6))
            f = rng.random() + 0.1
            z = cap_root(norm, prefix, i, f, math.inf)
            base = prefix.copy()
            base[i:] = 0.0
            extended = base.copy()
            extended[i] = z
            assert norm(extended) - norm(base) <= f + 1e-9

    def test_linf_cap_above_prefix_max(self):
        z = cap_root(lp_norm(3, "inf"), np.array([2.0, 0, 0]), 1, 1.0, 10.0)
        assert z == pytest.approx(3.0, rel=1e-8)

    def test_top2_cap(self):
        # Top-2 of (4, 2, z) minus 6 is z - 2.5 once z passes 2.
        z = cap_root(top_k_norm(5, 2), np.array([4.0, 2.0, 0, 0, 0]), 2, 1.5, 10.0)
        assert z == pytest.approx(3.5, rel=1e-8)
        assert z <= 3.5

    def test_bounded_marginal_raises(self):
        norm = value_oracle_norm(2, lambda x: min(float(x.sum()), 1.0))
        with pytest.raises(NonMonotoneError) as excinfo:
            cap_root(norm, np.zeros(2), 0, 5.0, math.inf)
        assert excinfo.value.dump["i"] == 0


class TestUniform:
    def test_star_naive_opens_everywhere(self, star):
        trace = run_naive_uniform(star, seed=0)
        assert trace.total_cost == 100
        assert len(trace.facilities) == 100

    def test_star_capped_is_deterministic(self, star):
        for seed in range(5):
            trace = run_uniform(star, seed)
            assert trace.facilities == [1, 2]
            assert trace.total_cost == pytest.approx(4.0)

    def test_star_offline_opt(self, star):
        opt = offline_opt(star)
        assert opt.cost == 2
        assert opt.facilities == [0]
        assert opt.clusters[0] == 0

    def test_star_ensemble_within_bound(self, star):
        traces = run_ensemble(star, "uniform", range(1000))
        report = verify_bounds(traces, offline_opt(star), star)
        assert report.bound == pytest.approx(10.0)
        assert report.mean <= 8.0
        assert report.passed

    def test_trace_bookkeeping(self):
        trace = run_uniform(line_instance(), seed=7)
        assert trace.method == "uniform"
        assert len(trace.steps) == 4
        assert trace.opening_cost == len(trace.facilities)
        frame = trace.to_frame()
        assert list(frame.columns) == ["step", "request", "opened", "level", "d", "dhat", "tau",
                                       "p0", "p1"]
        np.testing.assert_allclose(frame[["p0", "p1"]].sum(axis=1), 1.0)

    def test_first_request_always_opens(self):
        for seed in range(20):
            trace = run_uniform(line_instance(), seed)
            assert trace.facilities[0] == 3
            assert trace.steps[0]["probs"] == [0.0, 1.0]

    def test_same_seed_same_trace(self):
        a, b = run_uniform(line_instance(), 11), run_uniform(line_instance(), 11)
        assert a.facilities == b.facilities
        np.testing.assert_array_equal(a.d, b.d)

    def test_requires_uniform_costs(self):
        with pytest.raises(ValidationError, match="uniform-cost"):
            run_uniform(line_instance(costs=[1, 2, 1, 2]), 0)


class TestStepInvariants:
    NORMS = {"l1": lp_norm(8, 1), "l2": lp_norm(8, 2), "linf": lp_norm(8, "inf"),
             "top3": top_k_norm(8, 3)}

    @staticmethod
    def assert_trace_invariants(trace, norm, f=None):
        assert np.all(trace.d <= trace.dhat + 1e-9)
        for step in trace.steps:
            probs = np.asarray(step["probs"])
            assert np.all((probs >= 0) & (probs <= 1))
            assert probs.sum() == pytest.approx(1.0)
            if f is not None:
                assert step["delta"] <= f + 1e-9
        assert math.fsum(s["delta"] for s in trace.steps) == pytest.approx(norm(trace.dhat), rel=1e-9)
        assert trace.norm_dhat == pytest.approx(norm(trace.dhat))

    @pytest.mark.parametrize("norm_name", sorted(NORMS))
    def test_uniform_runner(self, norm_name):
        norm = self.NORMS[norm_name]
        for instance_seed in range(8):
            instance = gen_random_euclidean(8, seed=instance_seed, n_points=6, norm=norm)
            for seed in range(5):
                self.assert_trace_invariants(run_uniform(instance, seed), norm, instance.uniform_cost)

    @pytest.mark.parametrize("norm_name", sorted(NORMS))
    def test_nonuniform_runner(self, norm_name):
        norm = self.NORMS[norm_name]
        for instance_seed in range(8):
            instance = gen_random_euclidean(8, seed=instance_seed, n_points=6, norm=norm,
                                            costs="power_of_two")
            for seed in range(5):
                self.assert_trace_invariants(run_nonuniform(instance, seed), norm)

    def test_broken_telescoping_raises(self):
        instance = line_instance()
        trace = run_uniform(instance, seed=3)
        deltas = [s["delta"] for s in trace.steps]
        deltas[-1] += 0.5
        with pytest.raises(NonMonotoneError, match="Marginals sum"):
            _finish("uniform", 3, instance, trace.steps, trace.facilities, trace.opening_cost,
                    trace.d, trace.dhat, deltas, trace.levels, delta_cap=1.0)

    def test_distance_above_cap_raises(self):
        instance = line_instance()
        trace = run_uniform(instance, seed=3)
        with pytest.raises(NonMonotoneError, match="exceeds dhat") as excinfo:
            _finish("uniform", 3, instance, trace.steps, trace.facilities, trace.opening_cost,
                    trace.dhat + 1.0, trace.dhat, None, trace.levels)
        assert excinfo.value.dump["step"] == 0


class TestNonUniform:
    def test_round_down_pow2(self):
        assert round_down_pow2(3) == 2
        assert round_down_pow2(1) == 1
        assert round_down_pow2(0.3) == 0.25
        with pytest.raises(ValidationError):
            round_down_pow2(0)

    def test_cost_levels(self):
        levels = cost_levels(line_instance(costs=[3.0, 1.0, 1.5, 0.5]))
        assert levels.levels == [0.0, 0.5, 1.0, 2.0]
        assert levels.level_of == {0: 3, 1: 2, 3: 1}
        assert levels.m == 3

    def test_tau_uncapped(self):
        solution = tau_solve(lp_norm(2, 1), np.zeros(2), 0, [1.0, 0.5, 0.0], [0.0, 1.0, 2.0])
        assert not solution.capped
        np.testing.assert_allclose(solution.probs, [0.25, 0.5, 0.25])

    def test_tau_capped(self):
        solution = tau_solve(lp_norm(2, 1), np.zeros(2), 0, [math.inf, 2.0, 0.0], [0.0, 1.0, 2.0])
        assert solution.capped
        assert solution.tau == pytest.approx(2.0, rel=1e-8)
        np.testing.assert_allclose(solution.probs, [0.0, 0.0, 1.0], atol=1e-7)

    def test_sample_level_order(self):
        probs = np.array([0.25, 0.5, 0.25])
        assert _sample_level(probs, 0.1) == 1
        assert _sample_level(probs, 0.6) == 2
        assert _sample_level(probs, 0.9) == 0

    def test_probabilities_form_distributions(self):
        instance = gen_random_euclidean(10, seed=3, n_points=8, costs="power_of_two")
        trace = run_nonuniform(instance, seed=5)
        levels = cost_levels(instance)
        for step in trace.steps:
            probs = np.asarray(step["probs"])
            assert np.all(probs >= 0)
            assert probs.sum() == pytest.approx(1.0)
        assert set(trace.facilities) <= set(instance.candidates)
        assert trace.opening_cost == pytest.approx(sum(levels.rounded[q] for q in trace.facilities))

    def test_coupled_with_uniform_runner(self):
        for seed in range(10):
            instance = gen_random_euclidean(10, seed=seed, n_points=8, norm=top_k_norm(10, 3))
            for run in range(5):
                a, b = run_uniform(instance, run), run_nonuniform(instance, run)
                assert a.facilities == b.facilities
                assert a.total_cost == pytest.approx(b.total_cost, rel=1e-6)

    @pytest.mark.slow
    def test_facility_count_distributions_match(self):
        instance = gen_random_euclidean(10, seed=1, n_points=8, norm=lp_norm(10, 2))
        uniform = [len(t.facilities) for t in run_ensemble(instance, "uniform", range(600))]
        nonuniform = [len(t.facilities)
                      for t in run_ensemble(instance, "nonuniform", range(600, 1200))]
        counts = pd.crosstab(np.repeat(["uniform", "nonuniform"], 600), uniform + nonuniform)
        _, p_value, _, _ = chi2_contingency(counts.to_numpy())
        assert p_value > 1e-3


class TestSymmetric:
    def test_reports_true_norm(self):
        instance = gen_star(6, norm=top_k_norm(6, 3))
        trace = run_symmetric(instance, seed=2)
        assert trace.method == "symmetric"
        assert trace.norm_d == pytest.approx(instance.norm(trace.d))


class TestOfflineOpt:
    def test_line(self):
        opt = offline_opt(line_instance())
        # Open 0 and 3: cost 2, every request at distance 0 except 1 -> 1.
        assert opt.cost == pytest.approx(3.0)
        assert opt.facilities == [0, 3]

    def test_matches_exhaustive_enumeration(self):
        instance = gen_random_euclidean(6, seed=4, n_points=5, norm=top_k_norm(6, 2))
        best = math.inf
        for mask in range(1, 1 << 5):
            sites = [q for q in range(5) if mask >> q & 1]
            d = [min(instance.metric.distance(x, q) for q in sites) for x in instance.requests]
            best = min(best, len(sites) + instance.norm(d))
        assert offline_opt(instance).cost == pytest.approx(best, abs=1e-12)

    def test_budget(self):
        instance = gen_random_euclidean(25, seed=0)
        with pytest.raises(BudgetError):
            offline_opt(instance)

    def test_no_requests(self):
        instance = OflInstance.uniform(MatrixMetric([[0.0]]), [], 1.0, lp_norm(0, 1), openable=[0])
        assert offline_opt(instance).cost == 0


class TestBounds:
    def test_stage_costs_telescope(self, small_star):
        opt = offline_opt(small_star)
        for seed in range(5):
            trace = run_uniform(small_star, seed)
            stages = stage_costs(trace, opt, small_star)
            assert stages.long_distance + stages.short_distance == pytest.approx(trace.total_cost)
            assert len(stages.table) == small_star.n
            assert stages.sd_bound == pytest.approx(8 * opt.connection_cost)

    def test_ensemble_summary(self, small_star):
        traces = run_ensemble(small_star, "naive", [2, 0, 1])
        assert [t.seed for t in traces] == [0, 1, 2]
        report = verify_bounds(traces, offline_opt(small_star), small_star)
        summary = ensemble_summary(traces, report)
        assert list(summary.columns) == ["method", "kind", "seeds", "mean", "stderr", "bound",
                                         "opt", "ratio", "rho", "passed"]
        assert summary.loc[0, "mean"] == 5
        assert summary.loc[0, "stderr"] == 0
        assert len(ensemble_table(traces)) == 3

    def test_unknown_runner(self, small_star):
        with pytest.raises(ValidationError, match="Unknown runner"):
            run_ensemble(small_star, "greedy", [0])

    def test_process_pool_matches_serial(self, small_star):
        serial = run_ensemble(small_star, "uniform", range(6))
        pooled = run_ensemble(small_star, "uniform", range(6), workers=2)
        assert [t.total_cost for t in serial] == [t.total_cost for t in pooled]

    @pytest.mark.slow
    @pytest.mark.parametrize("norm_name", ["l1", "linf", "top3"])
    def test_uniform_bound_on_random_instances(self, norm_name):
        norm = {"l1": lp_norm(10, 1), "linf": lp_norm(10, "inf"), "top3": top_k_norm(10, 3)}[norm_name]
        for seed in range(20):
            instance = gen_random_euclidean(10, seed=seed, n_points=8, norm=norm)
            opt = offline_opt(instance)
            report = verify_bounds(run_ensemble(instance, "uniform", range(100)), opt, instance)
            assert report.passed, (seed, report)

    @pytest.mark.slow
    @pytest.mark.parametrize("norm_name", ["l1", "linf", "top3"])
    def test_nonuniform_bound_on_random_instances(self, norm_name):
        norm = {"l1": lp_norm(10, 1), "linf": lp_norm(10, "inf"), "top3": top_k_norm(10, 3)}[norm_name]
        for seed in range(20):
            instance = gen_random_euclidean(10, seed=seed, n_points=8, norm=norm,
                                            costs="power_of_two")
            opt = offline_opt(instance)
            report = verify_bounds(run_ensemble(instance, "nonuniform", range(100)), opt, instance)
            assert report.kind == "nonuniform"
            assert report.passed, (seed, report)
