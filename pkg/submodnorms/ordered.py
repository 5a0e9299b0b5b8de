"""Ordered approximation of symmetric norms and the approximation-gap fixtures."""
import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .norms import LpNorm, MaxLinearNorm, OrderedNorm, PartialSumNorm, SymmetricMaxNorm, prefix_indicator
from .utils import ATOL, RTOL, ValidationError, sort_descending, tolerance, validate_vector

logger = logging.getLogger(__name__)

SYMMETRY_TRIALS = 32


@dataclass
class OrderedApprox:
    """Levels m_j and weights b_j of the ordered norm ||x||' = 2 * sum_j <b_j, x sorted>."""

    source: object
    levels: List[int]
    weight_vectors: List[np.ndarray]
    rho: float
    factor: float
    unit: float

    @property
    def norm(self):
        return OrderedNorm(2.0 * np.sum(self.weight_vectors, axis=0))

    def evaluate(self, x):
        x = validate_vector(x, self.source.n)
        xs, _ = sort_descending(x)
        return 2.0 * float(sum(np.dot(b, xs) for b in self.weight_vectors))


def check_symmetric(norm, trials=SYMMETRY_TRIALS, tol=RTOL, seed=0):
    """Raise ValidationError if a random permutation changes the value of a random vector."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = rng.random(norm.n)
        x[rng.random(norm.n) < 0.3] = 0.0
        base = norm._evaluate(x)
        permuted = norm._evaluate(x[rng.permutation(norm.n)])
        if abs(base - permuted) > tolerance(max(base, permuted), tol):
            raise ValidationError(
                f"Norm is not symmetric: permuting {x.tolist()} changed the value "
                f"from {base} to {permuted}")


def ordered_approx(norm, n=None, tol=RTOL, seed=0):
    """Ordered norm within factor 2(floor(log2 rho) + 1) of a symmetric norm.

    Uses only evaluations on prefix indicators: each level m_j is the least m
    with ||1_{<=m}|| >= 2^j ||e_1||, found by binary search over [m_{j-1}, n].
    """
    n = norm.n if n is None else n
    if n != norm.n:
        raise ValidationError(f"Dimension {n} does not match the norm dimension {norm.n}")
    if n < 1:
        raise ValidationError("ordered_approx needs dimension n >= 1")

    check_symmetric(norm, tol=tol, seed=seed)

    def prefix(m):
        return norm._evaluate(prefix_indicator(n, m))

    unit = prefix(1)
    if unit <= ATOL:
        raise ValidationError(f"Degenerate norm: ||e_1|| = {unit}")
    rho = prefix(n) / unit
    top = int(math.floor(math.log2(rho) + 1e-9))

    levels, weights = [], []
    lo = 1
    for j in range(top + 1):
        threshold = (2.0 ** j) * unit
        threshold -= tolerance(threshold, tol)
        hi = n
        while lo < hi:
            mid = (lo + hi) // 2
            if prefix(mid) >= threshold:
                hi = mid
            else:
                lo = mid + 1
        levels.append(lo)
        weights.append(prefix(lo) / lo * prefix_indicator(n, lo))

    factor = 2.0 * (top + 1)
    logger.debug("ordered_approx(%r): rho=%.6g levels=%s factor=%g", norm, rho, levels, factor)
    return OrderedApprox(norm, levels, weights, rho, factor, unit)


def make_tightness_norm(n, eps):
    """max_k k^(-eps) * (sum of the k largest entries)."""
    if not 0 < eps < 0.5:
        raise ValidationError(f"eps must lie in (0, 1/2), got {eps}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rows = [k ** (-eps) * prefix_indicator(n, k) for k in range(1, n + 1)]
    return SymmetricMaxNorm(rows)


def tightness_witness(n, eps):
    """y_k = (k^eps - (k-1)^eps) / eps, on which the tightness norm equals 1/eps."""
    if not 0 < eps < 0.5:
        raise ValidationError(f"eps must lie in (0, 1/2), got {eps}")
    k = np.arange(1, n + 1, dtype=float)
    return (k ** eps - (k - 1) ** eps) / eps


def partial_lp_fixture(n):
    """||x_A||_inf + ||x_B||_1 with A the first and B the second half of the coordinates."""
    if n < 2 or n % 2:
        raise ValidationError(f"Partial-lp fixture needs an even n >= 2, got {n}")
    half = n // 2
    return PartialSumNorm(n, [(range(half), LpNorm(half, np.inf)),
                              (range(half, n), LpNorm(half, 1))])


def block_max_fixture(n):
    """max over sqrt(n) consecutive blocks of the block sum."""
    side = math.isqrt(n)
    if n < 1 or side * side != n:
        raise ValidationError(f"Block-max fixture needs a perfect square n, got {n}")
    rows = np.kron(np.eye(side), np.ones(side))
    return MaxLinearNorm(rows)


def make_gap_fixtures(n):
    return partial_lp_fixture(n), block_max_fixture(n)


@dataclass
class BlockWitness:
    y: np.ndarray
    chosen: List[int]
    value: float
    upper_value: float

    @property
    def ratio(self):
        return self.upper_value / self.value if self.value > 0 else math.inf


def greedy_block_witness(n, upper_norm):
    """Activate one coordinate per block, each time the one that raises upper_norm most.

    Stops once upper_norm(y) >= sqrt(n)/2. For a submodular upper_norm that
    dominates the block-max norm, the result has block-max value 1 and
    upper_norm value at least sqrt(n)/2.
    """
    block = block_max_fixture(n)
    if upper_norm.n != n:
        raise ValidationError(f"Upper norm has dimension {upper_norm.n}, expected {n}")

    side = math.isqrt(n)
    target = side / 2.0
    y = np.zeros(n)
    chosen = []
    current = 0.0

    for k in range(side):
        if current >= target:
            break
        best, best_value = None, -math.inf
        for i in range(k * side, (k + 1) * side):
            y[i] = 1.0
            value = upper_norm._evaluate(y)
            y[i] = 0.0
            if value > best_value + ATOL:
                best, best_value = i, value
        y[best] = 1.0
        chosen.append(best)
        current = best_value

    return BlockWitness(y, chosen, block._evaluate(y), upper_norm._evaluate(y))
