"""Online facility location with monotone-norm connection costs.

Runners process requests strictly in arrival order and draw one uniform number
per step from ``step_rng(seed, step)``, so the uniform and non-uniform runners
make the same decision on a uniform-cost instance under a shared seed.
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .norms import rho
from .ordered import ordered_approx
from .utils import (ATOL, MAX_BISECTION_ITERATIONS, RTOL, BudgetError, NonMonotoneError,
                    ValidationError, compensated_sum, create_step_log, format_step_table,
                    step_rng, tolerance)

logger = logging.getLogger(__name__)

MAX_CANDIDATES = 20


@dataclass
class OflInstance:
    """Requests x_1..x_n on a metric, per-point facility costs and a norm of dimension n.

    Facilities may open at any request location or listed openable point.
    ``uniform_cost`` is set when every point shares one facility cost.
    """

    metric: object
    requests: List[int]
    costs: np.ndarray
    norm: object
    openable: List[int] = field(default_factory=list)
    uniform_cost: Optional[float] = None

    def __post_init__(self):
        self.requests = [int(x) for x in self.requests]
        self.openable = sorted({int(q) for q in self.openable})
        self.metric.check_points(self.requests, "requests")
        self.metric.check_points(self.openable, "openable")
        if self.norm.n != len(self.requests):
            raise ValidationError(
                f"Norm dimension {self.norm.n} does not match the {len(self.requests)} requests")
        self.costs = np.asarray(self.costs, dtype=float)
        if self.costs.shape != (self.metric.size,):
            raise ValidationError(
                f"Need one facility cost per point ({self.metric.size}), got {self.costs.shape}")
        if np.any(self.costs < 0) or np.any(np.isnan(self.costs)):
            raise ValidationError("Facility costs must be non-negative")

    @classmethod
    def uniform(cls, metric, requests, f, norm, openable=()):
        if f < 0:
            raise ValidationError(f"Facility cost must be non-negative, got {f}")
        return cls(metric, list(requests), np.full(metric.size, float(f)), norm,
                   list(openable), uniform_cost=float(f))

    @property
    def n(self):
        return len(self.requests)

    @property
    def is_uniform(self):
        return self.uniform_cost is not None

    @property
    def candidates(self):
        return sorted(set(self.requests) | set(self.openable))

    def with_norm(self, norm):
        return replace(self, norm=norm)


@dataclass
class OflTrace:
    method: str
    seed: int
    steps: List[dict]
    facilities: List[int]
    opening_cost: float
    d: np.ndarray
    dhat: np.ndarray
    norm_d: float
    norm_dhat: float
    levels: List[float] = field(default_factory=lambda: [0.0])

    @property
    def total_cost(self):
        return self.opening_cost + self.norm_d

    @property
    def connection_cost(self):
        return self.norm_d

    def to_frame(self):
        """One row per step: step, request, opened, level, d, dhat, tau, p0..pm."""
        m = len(self.levels) - 1
        rows = []
        for s in self.steps:
            row = {"step": s["step"], "request": s["request"],
                   "opened": s["opened"] if s["opened"] is not None else np.nan,
                   "level": s["level"], "d": s["d"], "dhat": s["dhat"],
                   "tau": s["tau"] if s["tau"] is not None else np.nan}
            for j in range(m + 1):
                row[f"p{j}"] = s["probs"][j]
            rows.append(row)
        columns = ["step", "request", "opened", "level", "d", "dhat", "tau"] + [f"p{j}" for j in range(m + 1)]
        return format_step_table(rows, columns=columns)


# Capped auxiliary distance (uniform costs)

def _marginal_fn(norm, prefix, i):
    work = np.zeros(norm.n)
    work[:i] = prefix[:i]
    before = norm._evaluate(work)

    def marginal(z):
        work[i] = z
        return norm._evaluate(work) - before

    return marginal, before


def cap_root(norm, prefix, i, f, upper, tol=RTOL):
    """Largest z in [0, upper] whose marginal ||prefix + z e_i|| - ||prefix|| stays <= f.

    Returns ``upper`` exactly when the cap is inactive. Otherwise bisects and
    returns the feasible endpoint, so the marginal at the result never exceeds f.
    """
    if not 0 <= i < norm.n:
        raise ValidationError(f"Index {i} out of range for dimension {norm.n}")
    if f < 0 or upper < 0:
        raise ValidationError(f"f and upper must be non-negative, got f={f}, upper={upper}")

    marginal, _ = _marginal_fn(norm, prefix, i)
    if math.isfinite(upper) and marginal(upper) <= f:
        return float(upper)

    lo = 0.0
    if math.isfinite(upper):
        hi = float(upper)
    else:
        hi = 1.0
        for _ in range(MAX_BISECTION_ITERATIONS):
            if marginal(hi) > f:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise NonMonotoneError("Marginal never exceeds the facility cost on an unbounded ray",
                                   dump={"i": i, "f": f, "hi": hi})

    iterations = 0
    while hi - lo > ATOL + tol * hi and iterations < MAX_BISECTION_ITERATIONS:
        mid = 0.5 * (lo + hi)
        if marginal(mid) <= f:
            lo = mid
        else:
            hi = mid
        iterations += 1

    lo_value, hi_value = marginal(lo), marginal(hi)
    if lo_value > hi_value + tolerance(hi_value, tol) or lo_value > f + tolerance(f, tol):
        raise NonMonotoneError(
            f"Marginal is not monotone on [{lo}, {hi}]: {lo_value} vs {hi_value}",
            dump={"i": i, "f": f, "lo": lo, "hi": hi, "marginal_lo": lo_value,
                  "marginal_hi": hi_value, "prefix": np.asarray(prefix[:i]).tolist()})
    logger.debug("cap_root step %d: z=%.12g after %d iterations", i, lo, iterations)
    return lo


def run_uniform(instance, seed):
    """Open a facility at x_i with probability delta_i / f, delta_i taken on the capped distances."""
    if not instance.is_uniform:
        raise ValidationError("run_uniform needs a uniform-cost instance")
    f = instance.uniform_cost
    if f <= 0:
        raise ValidationError(f"Uniform facility cost must be positive, got {f}")

    norm, metric = instance.norm, instance.metric
    n = instance.n
    d, dhat = np.zeros(n), np.zeros(n)
    deltas = []
    facilities = []
    steps = []
    previous = 0.0

    for i, x in enumerate(instance.requests):
        dist, _ = metric.nearest(x, facilities)
        z = cap_root(norm, dhat, i, f, dist)
        capped = z < dist
        dhat[i] = z
        current = norm._evaluate(dhat)
        delta = current - previous
        deltas.append(delta)
        previous = current

        prob = 1.0 if capped else min(1.0, max(0.0, delta) / f)
        u = step_rng(seed, i).random()
        opened = None
        if u < prob:
            if x not in facilities:
                facilities.append(x)
                opened = x
            d[i] = 0.0
        else:
            d[i] = dist

        steps.append(create_step_log(
            i, f"Request {i} at point {x}", request=x, opened=opened, level=int(u < prob),
            cost=f if opened is not None else 0.0, d=d[i], dhat=z,
            tau=z if capped else None, delta=delta, probs=[1.0 - prob, prob]))

    logger.debug("run_uniform seed=%s: %d facilities", seed, len(facilities))
    return _finish("uniform", seed, instance, steps, facilities, len(facilities) * f, d, dhat,
                   deltas, [0.0, f], delta_cap=f)


def run_naive_uniform(instance, seed):
    """Uncapped rule on the true distances: open at x_i with probability min(1, delta_i / f)."""
    if not instance.is_uniform:
        raise ValidationError("run_naive_uniform needs a uniform-cost instance")
    f = instance.uniform_cost
    if f <= 0:
        raise ValidationError(f"Uniform facility cost must be positive, got {f}")

    norm, metric = instance.norm, instance.metric
    n = instance.n
    d = np.zeros(n)
    facilities = []
    steps = []
    previous = 0.0

    for i, x in enumerate(instance.requests):
        dist, _ = metric.nearest(x, facilities)
        if math.isinf(dist):
            delta, prob = math.inf, 1.0
        else:
            d[i] = dist
            current = norm._evaluate(d)
            delta = current - previous
            prob = min(1.0, max(0.0, delta) / f)

        u = step_rng(seed, i).random()
        opened = None
        if u < prob:
            if x not in facilities:
                facilities.append(x)
                opened = x
            d[i] = 0.0
        previous = norm._evaluate(d)

        steps.append(create_step_log(
            i, f"Request {i} at point {x}", request=x, opened=opened, level=int(u < prob),
            cost=f if opened is not None else 0.0, d=d[i], dhat=d[i], tau=None,
            delta=delta, probs=[1.0 - prob, prob]))

    return _finish("naive", seed, instance, steps, facilities, len(facilities) * f, d, d.copy(),
                   None, [0.0, f])


def _check_steps(method, seed, steps, d, dhat, delta_cap):
    for s, di, hi in zip(steps, d, dhat):
        probs = s["probs"]
        dump = {"method": method, "seed": seed, "step": s["step"], "d": float(di),
                "dhat": float(hi), "delta": s["delta"], "probs": list(probs)}
        if di > hi + tolerance(hi):
            raise NonMonotoneError(f"Step {s['step']}: d = {di} exceeds dhat = {hi}", dump=dump)
        if min(probs) < -ATOL or max(probs) > 1.0 + ATOL or abs(math.fsum(probs) - 1.0) > tolerance(1.0):
            raise NonMonotoneError(f"Step {s['step']}: level probabilities {probs} are not a distribution",
                                   dump=dump)
        if delta_cap is not None and s["delta"] > delta_cap + tolerance(delta_cap):
            raise NonMonotoneError(f"Step {s['step']}: marginal {s['delta']} exceeds f = {delta_cap}",
                                   dump=dump)


def _finish(method, seed, instance, steps, facilities, opening_cost, d, dhat, deltas, levels,
            delta_cap=None):
    norm = instance.norm
    norm_dhat = norm._evaluate(dhat)
    _check_steps(method, seed, steps, d, dhat, delta_cap)
    if deltas is not None and deltas:
        telescoped = compensated_sum(deltas)
        if abs(telescoped - norm_dhat) > tolerance(norm_dhat):
            raise NonMonotoneError(f"Marginals sum to {telescoped!r} but ||dhat|| = {norm_dhat!r}",
                                   dump={"method": method, "seed": seed, "deltas": list(deltas)})
    return OflTrace(method, seed, steps, list(facilities), float(opening_cost), d, dhat,
                    norm._evaluate(d), norm_dhat, list(levels))


# Non-uniform costs

@dataclass
class CostLevels:
    """Distinct rounded-down powers of two f^(1) < ... < f^(m) with f^(0) = 0."""

    levels: List[float]
    level_of: Dict[int, int]
    rounded: Dict[int, float]

    @property
    def m(self):
        return len(self.levels) - 1


def round_down_pow2(c):
    if c <= 0:
        raise ValidationError(f"Facility costs must be positive to round, got {c}")
    return 2.0 ** (math.frexp(c)[1] - 1)


def cost_levels(instance):
    rounded = {q: round_down_pow2(instance.costs[q]) for q in instance.candidates}
    levels = [0.0] + sorted(set(rounded.values()))
    index = {c: j for j, c in enumerate(levels)}
    return CostLevels(levels, {q: index[c] for q, c in rounded.items()}, rounded)


@dataclass
class TauSolution:
    tau: Optional[float]
    dhat: float
    dhat_levels: np.ndarray
    deltas: np.ndarray
    probs: np.ndarray
    iterations: int

    @property
    def capped(self):
        return self.tau is not None


def _level_probabilities(marginal, level_distances, levels, tau):
    """d-hat per level, delta per level and p^(1..m) for cap tau (None = uncapped)."""
    D = np.asarray(level_distances, dtype=float)
    dh = D.copy() if tau is None else np.minimum(D, tau)
    if dh[0] <= 0:
        zeros = np.zeros(len(levels))
        return dh, zeros, zeros[1:]
    delta = dh / dh[0] * marginal(dh[0])
    p = (delta[:-1] - delta[1:]) / np.asarray(levels[1:], dtype=float)
    return dh, delta, np.maximum(p, 0.0)


def tau_solve(norm, prefix, i, level_distances, levels, tol=RTOL):
    """Cap tau making the opening probabilities over cost levels sum to at most one.

    level_distances[j] = d(x_i, W^(j)), non-increasing, with the last entry 0;
    level_distances[0] may be infinite when nothing is open yet.
    """
    marginal, _ = _marginal_fn(norm, prefix, i)
    D = np.asarray(level_distances, dtype=float)
    if D.shape != (len(levels),):
        raise ValidationError(f"Need {len(levels)} level distances, got {D.shape}")

    def g(tau):
        if tau <= 0:
            return 0.0
        return float(np.sum(_level_probabilities(marginal, D, levels, tau)[2]))

    if math.isfinite(D[0]):
        dh, delta, p = _level_probabilities(marginal, D, levels, None)
        if p.sum() <= 1.0 + tolerance(1.0, tol):
            probs = np.concatenate([[max(0.0, 1.0 - p.sum())], p])
            return TauSolution(None, float(dh[0]), dh, delta, probs, 0)
        lo, hi = 0.0, float(D[0])
    else:
        lo, hi = 0.0, 1.0
        previous = 0.0
        for _ in range(MAX_BISECTION_ITERATIONS):
            value = g(hi)
            if value < previous - tolerance(previous, tol):
                raise NonMonotoneError("Constraint sum decreased while bracketing tau",
                                       dump={"i": i, "hi": hi, "value": value, "previous": previous})
            if value > 1.0:
                break
            previous = value
            lo, hi = hi, 2.0 * hi
        else:
            raise NonMonotoneError("Constraint sum never exceeds 1 on an unbounded ray",
                                   dump={"i": i, "hi": hi})

    iterations = 0
    while hi - lo > ATOL + tol * hi and iterations < MAX_BISECTION_ITERATIONS:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1

    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 1.0 + tolerance(1.0, tol) or g_lo > g_hi + tolerance(g_hi, tol):
        raise NonMonotoneError(
            f"Constraint sum is not monotone in tau on [{lo}, {hi}]: {g_lo} vs {g_hi}",
            dump={"i": i, "lo": lo, "hi": hi, "g_lo": g_lo, "g_hi": g_hi,
                  "level_distances": D.tolist(), "levels": list(levels),
                  "prefix": np.asarray(prefix[:i]).tolist()})

    dh, delta, p = _level_probabilities(marginal, D, levels, lo)
    total = p.sum()
    p = p / total if total > 0 else p
    probs = np.concatenate([[0.0], p])
    logger.debug("tau_solve step %d: tau=%.12g after %d iterations", i, lo, iterations)
    return TauSolution(lo, float(dh[0]), dh, delta, probs, iterations)


def _sample_level(probs, u):
    """Levels 1..m in order, then 0; never returns a level of probability zero."""
    cumulative = np.cumsum(probs[1:])
    j = int(np.searchsorted(cumulative, u, side="right")) + 1
    if j < len(probs):
        return j
    if probs[0] > 0:
        return 0
    return int(np.flatnonzero(probs > 0).max())


def run_nonuniform(instance, seed):
    """Sample one cost level per step and serve x_i from the nearest location at that level."""
    levels = cost_levels(instance)
    norm, metric = instance.norm, instance.metric
    n, m = instance.n, levels.m
    by_level = [[q for q in instance.candidates if levels.level_of[q] <= j] for j in range(m + 1)]

    d, dhat = np.zeros(n), np.zeros(n)
    deltas = []
    facilities = []
    steps = []
    opening_cost = 0.0
    previous = 0.0

    for i, x in enumerate(instance.requests):
        nearest = []
        for j in range(m + 1):
            pool = sorted(set(facilities) | set(by_level[j])) if j else facilities
            nearest.append(metric.nearest(x, pool))
        D = [dist for dist, _ in nearest]

        solution = tau_solve(norm, dhat, i, D, levels.levels)
        dhat[i] = solution.dhat
        current = norm._evaluate(dhat)
        deltas.append(current - previous)
        previous = current

        j = _sample_level(solution.probs, step_rng(seed, i).random())
        dist, site = nearest[j]
        opened = None
        cost = 0.0
        if j > 0 and site not in facilities:
            facilities.append(site)
            opened = site
            cost = levels.rounded[site]
            opening_cost += cost
        d[i] = dist

        steps.append(create_step_log(
            i, f"Request {i} at point {x}", request=x, opened=opened, level=j, cost=cost,
            d=dist, dhat=solution.dhat, tau=solution.tau, delta=solution.deltas[0],
            probs=solution.probs.tolist()))

    logger.debug("run_nonuniform seed=%s: %d facilities, %d levels", seed, len(facilities), m)
    return _finish("nonuniform", seed, instance, steps, facilities, opening_cost, d, dhat,
                   deltas, levels.levels)


def run_symmetric(instance, seed):
    """Run on the ordered approximation of a symmetric norm; report the true norm of d."""
    approx = ordered_approx(instance.norm)
    surrogate = instance.with_norm(approx.norm)
    runner = run_uniform if instance.is_uniform else run_nonuniform
    trace = runner(surrogate, seed)
    trace.method = "symmetric"
    trace.norm_d = instance.norm._evaluate(trace.d)
    trace.norm_dhat = instance.norm._evaluate(trace.dhat)
    return trace


RUNNERS = {
    "uniform": run_uniform,
    "naive": run_naive_uniform,
    "nonuniform": run_nonuniform,
    "symmetric": run_symmetric,
}


# Offline optimum

@dataclass
class OfflineOpt:
    facilities: List[int]
    distances: np.ndarray
    opening_cost: float
    connection_cost: float
    clusters: Dict[int, int]

    @property
    def cost(self):
        return self.opening_cost + self.connection_cost


def _subset_count(size, largest):
    return sum(math.comb(size, k) for k in range(1, largest + 1))


def offline_opt(instance, candidates=None, max_candidates=MAX_CANDIDATES):
    """Exact minimum of opening cost plus ||d|| over non-empty facility sets.

    Sets are enumerated by size. A size k is skipped once the k cheapest
    candidates already cost at least the best total found, so only sizes whose
    opening cost can beat the best single facility are searched. The number of
    such subsets must stay within 2^max_candidates, which always holds for at
    most max_candidates candidates.
    """
    candidates = sorted(set(instance.candidates if candidates is None else candidates))
    if instance.n == 0:
        return OfflineOpt([], np.zeros(0), 0.0, 0.0, {})
    if not candidates:
        raise ValidationError("offline_opt needs at least one candidate facility")

    norm = instance.norm
    D = np.array([instance.metric.distances(x, candidates) for x in instance.requests])
    costs = instance.costs[candidates]
    cheapest = np.cumsum(np.sort(costs))

    singles = [costs[c] + norm._evaluate(D[:, c]) for c in range(len(candidates))]
    best_cost = min(singles)
    largest = int(np.searchsorted(cheapest, best_cost, side="left"))
    if len(candidates) > max_candidates and _subset_count(len(candidates), largest) > 2 ** max_candidates:
        raise BudgetError(
            f"{len(candidates)} candidates exceed the enumeration budget of {max_candidates}")

    best_cols = [int(np.argmin(singles))]
    best_opening = float(costs[best_cols[0]])
    best_conn = best_cost - best_opening
    for k in range(2, largest + 1):
        if cheapest[k - 1] >= best_cost:
            break
        for cols in itertools.combinations(range(len(candidates)), k):
            cols = list(cols)
            opening = float(costs[cols].sum())
            if opening >= best_cost:
                continue
            conn = norm._evaluate(D[:, cols].min(axis=1))
            if opening + conn < best_cost:
                best_cost, best_cols, best_opening, best_conn = opening + conn, cols, opening, conn

    sub = D[:, best_cols]
    nearest = sub.argmin(axis=1)
    facilities = [candidates[c] for c in best_cols]
    clusters = {i: facilities[int(k)] for i, k in enumerate(nearest)}
    logger.debug("offline_opt: F*=%s cost=%.12g", facilities, best_cost)
    return OfflineOpt(facilities, sub.min(axis=1), best_opening, best_conn, clusters)


# Bound verification

@dataclass
class BoundReport:
    kind: str
    seeds: int
    mean: float
    stderr: float
    bound: float
    opt_cost: float
    rho: float

    @property
    def passed(self):
        return self.mean <= self.bound + 3.0 * self.stderr + tolerance(self.bound)

    @property
    def ratio(self):
        if self.opt_cost > 0:
            return self.mean / self.opt_cost
        return 1.0 if self.mean <= ATOL else math.inf


def competitive_bound(kind, opt, instance, rho_value):
    if kind == "nonuniform":
        centers = sum(instance.costs[q] for q in opt.facilities)
        return 36.0 * opt.connection_cost + 48.0 * (math.log2(rho_value) + 1.0) * centers
    f = instance.uniform_cost
    L = math.ceil(math.log2(rho_value) - 1e-9)
    return 2.0 * (L + 1) * len(opt.facilities) * f + 8.0 * opt.connection_cost


def verify_bounds(traces, opt, instance, kind=None):
    """Empirical mean cost of an ensemble against the explicit competitive bound."""
    kind = kind or ("uniform" if instance.is_uniform else "nonuniform")
    costs = np.array([t.total_cost for t in sorted(traces, key=lambda t: t.seed)], dtype=float)
    if costs.size == 0:
        raise ValidationError("verify_bounds needs at least one trace")

    mean = compensated_sum(costs) / costs.size
    stderr = float(costs.std(ddof=1) / math.sqrt(costs.size)) if costs.size > 1 else 0.0
    if instance.n == 0:
        return BoundReport(kind, costs.size, mean, stderr, 0.0, opt.cost, 1.0)

    rho_value = rho(instance.norm)
    report = BoundReport(kind, costs.size, mean, stderr,
                         competitive_bound(kind, opt, instance, rho_value), opt.cost, rho_value)
    if not report.passed:
        logger.warning("Mean cost %.6g exceeds the %s bound %.6g (+3 stderr %.3g)",
                       mean, kind, report.bound, 3 * stderr)
    return report


@dataclass
class StageCosts:
    long_distance: float
    short_distance: float
    ld_bound: float
    sd_bound: float
    table: pd.DataFrame


def stage_costs(trace, opt, instance):
    """Split a trace's cost into long- and short-distance stages using OPT's rings.

    Ring radius r = ||d*|| / ||1||, L = ceil(log2 rho). Request i in ring l of
    its OPT cluster is long-distance while its center is farther than 2^l r from
    every facility opened before step i.
    """
    norm, metric = instance.norm, instance.metric
    n = instance.n
    rho_value = rho(norm)
    L = math.ceil(math.log2(rho_value) - 1e-9)
    r = opt.connection_cost / norm._evaluate(np.ones(n))

    facilities = []
    prefix = np.zeros(n)
    previous = 0.0
    rows = []
    for i, (x, step) in enumerate(zip(instance.requests, trace.steps)):
        center = opt.clusters[i]
        radius = metric.distance(x, center)
        ring = 0 if radius <= r + ATOL else min(L, math.ceil(math.log2(radius / r) - 1e-9))
        long_distance = metric.distance_to_set(center, facilities) > 2.0 ** ring * r + ATOL

        prefix[i] = trace.d[i]
        current = norm._evaluate(prefix)
        cost = step["cost"] + (current - previous)
        previous = current
        if step["opened"] is not None:
            facilities.append(step["opened"])
        rows.append({"step": i, "center": center, "ring": ring,
                     "stage": "LD" if long_distance else "SD", "cost": cost})

    table = pd.DataFrame(rows, columns=["step", "center", "ring", "stage", "cost"])
    ld = float(table.loc[table["stage"] == "LD", "cost"].sum())
    sd = float(table.loc[table["stage"] == "SD", "cost"].sum())
    if instance.is_uniform:
        ld_bound = 2.0 * (L + 1) * len(opt.facilities) * instance.uniform_cost
        sd_bound = 8.0 * opt.connection_cost
    else:
        ld_bound = 48.0 * (math.log2(rho_value) + 1.0) * sum(instance.costs[q] for q in opt.facilities)
        sd_bound = 36.0 * opt.connection_cost
    return StageCosts(ld, sd, ld_bound, sd_bound, table)


# Ensembles

def _run_one(args):
    runner, instance, seed = args
    return RUNNERS[runner](instance, seed)


def run_ensemble(instance, runner, seeds, workers=1):
    """Independent runs, one per seed, returned in seed order."""
    if runner not in RUNNERS:
        raise ValidationError(f"Unknown runner {runner!r}; choose from {sorted(RUNNERS)}")
    seeds = sorted(int(s) for s in seeds)
    jobs = [(runner, instance, s) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one, jobs))
    else:
        traces = [_run_one(job) for job in jobs]
    return traces


def ensemble_table(traces):
    return pd.DataFrame(
        [{"seed": t.seed, "method": t.method, "facilities": len(t.facilities),
          "opening_cost": t.opening_cost, "connection_cost": t.norm_d,
          "total_cost": t.total_cost} for t in sorted(traces, key=lambda t: t.seed)])


def ensemble_summary(traces, report):
    """One-row summary: mean, stderr and bound columns for the ensemble."""
    method = traces[0].method if traces else ""
    return pd.DataFrame([{
        "method": method, "kind": report.kind, "seeds": report.seeds, "mean": report.mean,
        "stderr": report.stderr, "bound": report.bound, "opt": report.opt_cost,
        "ratio": report.ratio, "rho": report.rho, "passed": report.passed,
    }])
