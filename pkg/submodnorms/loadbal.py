"""Generalized load balancing with an l1 outer norm and monotone inner norms per machine."""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from .ordered import ordered_approx
from .utils import ATOL, RTOL, BudgetError, ValidationError, compensated_sum, tolerance

logger = logging.getLogger(__name__)

MAX_ASSIGNMENTS = 10 ** 6


@dataclass
class LoadBalInstance:
    """Processing times p[i][j] of job j on machine i and one inner norm per machine."""

    p: np.ndarray
    inner_norms: list
    approximation_factors: Optional[List[float]] = None
    source_norms: Optional[list] = None

    def __post_init__(self):
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if self.p.ndim != 2:
            raise ValidationError(f"Processing times must form an m x n matrix, got {self.p.shape}")
        if np.any(self.p < 0) or np.any(np.isnan(self.p)):
            raise ValidationError("Processing times must be non-negative")
        m, n = self.p.shape
        if len(self.inner_norms) != m:
            raise ValidationError(f"Need one inner norm per machine ({m}), got {len(self.inner_norms)}")
        for i, psi in enumerate(self.inner_norms):
            if psi.n != n:
                raise ValidationError(f"Inner norm of machine {i} has dimension {psi.n}, expected {n}")

    @property
    def machines(self):
        return self.p.shape[0]

    @property
    def jobs(self):
        return self.p.shape[1]


@dataclass
class Assignment:
    sigma: List[int]
    loads: np.ndarray
    method: str = ""
    marginals: List[float] = field(default_factory=list)

    @property
    def total_cost(self):
        return compensated_sum(self.loads)


def load_vectors(instance, sigma):
    """Row i is (p_ij if job j runs on machine i else 0)_j."""
    m, n = instance.p.shape
    vectors = np.zeros((m, n))
    for j, i in enumerate(sigma):
        vectors[i, j] = instance.p[i, j]
    return vectors


def machine_loads(instance, sigma):
    if len(sigma) != instance.jobs or any(not 0 <= i < instance.machines for i in sigma):
        raise ValidationError(f"Assignment {list(sigma)} does not map every job to a machine")
    vectors = load_vectors(instance, sigma)
    return np.array([psi._evaluate(v) for psi, v in zip(instance.inner_norms, vectors)])


def greedy_assign(instance, job_order=None):
    """Assign each job, in order, to the machine whose load grows least; ties to the lowest index."""
    m, n = instance.p.shape
    order = list(range(n)) if job_order is None else [int(j) for j in job_order]
    if sorted(order) != list(range(n)):
        raise ValidationError(f"Job order must be a permutation of range({n})")

    vectors = np.zeros((m, n))
    current = np.zeros(m)
    sigma = [-1] * n
    marginals = []
    for j in order:
        best, best_increase, best_value = None, math.inf, 0.0
        for i, psi in enumerate(instance.inner_norms):
            vectors[i, j] = instance.p[i, j]
            value = psi._evaluate(vectors[i])
            vectors[i, j] = 0.0
            increase = value - current[i]
            if increase < -tolerance(current[i], RTOL):
                raise ValidationError(
                    f"Inner norm of machine {i} decreased when adding job {j}: not monotone")
            if increase < best_increase:
                best, best_increase, best_value = i, increase, value
        sigma[j] = best
        vectors[best, j] = instance.p[best, j]
        current[best] = best_value
        marginals.append(max(0.0, best_increase))

    return Assignment(sigma, machine_loads(instance, sigma), "greedy-min-marginal", marginals)


def brute_force_assign(instance, max_assignments=MAX_ASSIGNMENTS):
    """Exact minimum of the summed machine loads over all m^n assignments."""
    m, n = instance.p.shape
    if m ** n > max_assignments:
        raise BudgetError(f"{m}^{n} assignments exceed the budget of {max_assignments}")

    best_sigma, best_cost = None, math.inf
    for sigma in itertools.product(range(m), repeat=n):
        cost = compensated_sum(machine_loads(instance, sigma))
        if cost < best_cost:
            best_sigma, best_cost = list(sigma), cost
    return Assignment(best_sigma, machine_loads(instance, best_sigma), "brute-force")


def symmetric_reduction(instance):
    """Replace every symmetric inner norm by its ordered approximation."""
    approximations = [ordered_approx(psi) for psi in instance.inner_norms]
    return LoadBalInstance(instance.p, [a.norm for a in approximations],
                           approximation_factors=[a.factor for a in approximations],
                           source_norms=list(instance.inner_norms))


def greedy_bound(n):
    return 4.0 * (1.0 + math.log(max(n, 1)))


def loadbal_report(instance, greedy, opt=None):
    """Per-machine table with the greedy cost, OPT, their ratio and approximation factors."""
    n = instance.jobs
    greedy_cost = greedy.total_cost
    opt_cost = opt.total_cost if opt is not None else np.nan
    if opt is None:
        ratio = np.nan
    elif opt_cost > ATOL:
        ratio = greedy_cost / opt_cost
    else:
        ratio = 1.0 if greedy_cost <= ATOL else math.inf

    bound = greedy_bound(n)
    if opt is not None and ratio > bound:
        logger.warning("Greedy cost %.6g is %.3g x OPT, above the 4(1 + ln n) = %.3g check",
                       greedy_cost, ratio, bound)

    vectors = load_vectors(instance, greedy.sigma)
    rows = []
    for i in range(instance.machines):
        row = {"machine": i, "jobs": sum(1 for s in greedy.sigma if s == i),
               "greedy_load": float(greedy.loads[i]),
               "opt_load": float(opt.loads[i]) if opt is not None else np.nan,
               "factor": (instance.approximation_factors[i]
                          if instance.approximation_factors is not None else 1.0)}
        if instance.source_norms is not None:
            row["source_load"] = instance.source_norms[i]._evaluate(vectors[i])
        row.update({"greedy_cost": greedy_cost, "opt_cost": opt_cost, "ratio": ratio,
                    "bound": bound, "method": greedy.method})
        rows.append(row)
    return pd.DataFrame(rows)
