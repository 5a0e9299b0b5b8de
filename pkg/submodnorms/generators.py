"""Seeded instance generators: star, lower-bound tree, random Euclidean and random probing."""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .matroids import random_partition_matroid
from .metric import EuclideanMetric, MatrixMetric, TreeMetric
from .norms import NormOracle, lp_norm, norm_from_descriptor, prefix_indicator, restricted_norm, unit_vector
from .ofl import OflInstance
from .probing import (CardinalityFamily, DiscreteDistribution, ExplicitFamily, MatroidFamily,
                      ProbingInstance)
from .utils import RTOL, ValidationError, mask_to_set, tolerance

logger = logging.getLogger(__name__)

DEFAULT_ARITY = 8


def _as_norm(norm, n):
    if norm is None:
        return lp_norm(n, np.inf)
    if not isinstance(norm, NormOracle):
        norm = norm_from_descriptor(norm)
    if norm.n != n:
        raise ValidationError(f"Norm has dimension {norm.n}, expected {n}")
    return norm


def gen_star(n, f=1.0, norm=None):
    """K_{1,n}: center 0, leaves 1..n, unit edges; the leaves are the requests."""
    if n < 1:
        raise ValidationError(f"Star needs n >= 1 leaves, got {n}")
    D = np.full((n + 1, n + 1), 2.0)
    D[0, :] = D[:, 0] = 1.0
    np.fill_diagonal(D, 0.0)
    leaves = list(range(1, n + 1))
    return OflInstance.uniform(MatrixMetric(D), leaves, f, _as_norm(norm, n),
                               openable=range(n + 1))


@dataclass
class TreeLowerBound:
    k: int
    arity: int
    sigma: float
    levels: List[int]
    path: List[int]
    facility_cost: float
    unit: float

    @property
    def opt_bound(self):
        """k + sum_j k^-j (k^j + 1) <= 2k + 2, in units of max ||e_i||."""
        return (2 * self.k + 2) * self.unit


def gen_lower_bound_tree(norm, n=None, arity=DEFAULT_ARITY, seed=0):
    """Adversarial tree instance: demands along a random root-to-leaf path.

    k is the largest integer with k^k <= sigma = ||1|| / max ||e_i||. Node v_j at
    depth j of the path is requested m_j - m_{j-1} times, in depth order, where
    m_j is the least m with ||1_{<=m}|| >= k^j max ||e_i||. Returns the instance
    and a TreeLowerBound description.
    """
    if not isinstance(norm, NormOracle):
        norm = norm_from_descriptor(norm)
    n = norm.n if n is None else n
    if n != norm.n:
        raise ValidationError(f"Norm has dimension {norm.n}, expected {n}")
    if arity < 2:
        raise ValidationError(f"Tree arity must be >= 2, got {arity}")

    unit = max(norm._evaluate(unit_vector(n, i)) for i in range(n))
    sigma = norm._evaluate(np.ones(n)) / unit
    k = 1
    while (k + 1) ** (k + 1) <= sigma + tolerance(sigma, RTOL):
        k += 1
    if k < 2:
        raise ValidationError(f"sigma = {sigma:.6g} is below 4; the tree construction needs k >= 2")

    def prefix(m):
        return norm._evaluate(prefix_indicator(n, m))

    levels = []
    lo = 1
    for j in range(k + 1):
        threshold = k ** j * unit
        threshold -= tolerance(threshold, RTOL)
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if prefix(mid) >= threshold:
                hi = mid
            else:
                lo = mid + 1
        levels.append(lo)

    metric = TreeMetric(arity, k, [float(k) ** -j for j in range(k)])
    rng = np.random.default_rng(seed)
    path = [0]
    for _ in range(k):
        path.append(metric.child(path[-1], int(rng.integers(arity))))

    requests = []
    previous = 0
    for node, m in zip(path, levels):
        requests.extend([node] * (m - previous))
        previous = m

    demand_norm = restricted_norm(len(requests), norm)
    facility_cost = k * unit
    instance = OflInstance.uniform(metric, requests, facility_cost, demand_norm, openable=path)
    logger.debug("Lower-bound tree: k=%d sigma=%.6g levels=%s path=%s", k, sigma, levels, path)
    return instance, TreeLowerBound(k, arity, sigma, levels, path, facility_cost, unit)


def gen_random_euclidean(n, dim=2, seed=0, n_points=None, norm=None, costs="uniform", f=1.0):
    """Uniform points in the unit cube; requests drawn from the points; every point openable.

    costs="power_of_two" draws per-point costs from {1/4, 1/2, 1, 2}.
    """
    n_points = n if n_points is None else n_points
    if n < 0 or n_points < 1 or dim < 1:
        raise ValidationError(f"Need n >= 0, n_points >= 1 and dim >= 1, got {n}, {n_points}, {dim}")
    rng = np.random.default_rng(seed)
    points = np.round(rng.random((n_points, dim)), 6)
    requests = rng.integers(0, n_points, size=n).tolist()
    metric = EuclideanMetric(points)
    norm = lp_norm(n, 1) if norm is None else _as_norm(norm, n)

    if costs == "uniform":
        return OflInstance.uniform(metric, requests, f, norm, openable=range(n_points))
    if costs == "power_of_two":
        per_point = 2.0 ** rng.integers(-2, 2, size=n_points)
        return OflInstance(metric, requests, per_point, norm, list(range(n_points)))
    raise ValidationError(f"costs must be 'uniform' or 'power_of_two', got {costs!r}")


def _random_downward_closed(n, rng):
    """Downward closure of a few random subsets."""
    masks = {0}
    for _ in range(int(rng.integers(1, 4))):
        top = int(rng.integers(0, 1 << n))
        sub = top
        while True:
            masks.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & top
    return [sorted(mask_to_set(m)) for m in sorted(masks)]


def gen_random_probing(n, support_size=2, seed=0, family="explicit", norm=None):
    """Random two- or three-point distributions on a grid, a random family and a norm."""
    if support_size not in (2, 3):
        raise ValidationError(f"support_size must be 2 or 3, got {support_size}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)

    distributions = []
    for _ in range(n):
        support = sorted(rng.choice(np.arange(0, 21) / 20.0, size=support_size, replace=False))
        weights = rng.integers(1, 5, size=support_size)
        probs = weights / weights.sum()
        probs[-1] = 1.0 - math.fsum(probs[:-1])
        distributions.append(DiscreteDistribution(support, probs))

    if family == "explicit":
        feasible = ExplicitFamily(n, _random_downward_closed(n, rng))
    elif family == "cardinality":
        feasible = CardinalityFamily(n, int(rng.integers(1, n + 1)))
    elif family == "matroid":
        feasible = MatroidFamily(random_partition_matroid(n, rng))
    else:
        raise ValidationError(f"Unknown family kind {family!r}")

    return ProbingInstance(distributions, feasible, _as_norm(norm, n))

