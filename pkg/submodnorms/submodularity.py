"""Sampled and exhaustive property engines for monotone norms.

Characterizations of continuous submodularity tested here (all equivalent):

1. lattice:        f(x v y) + f(x ^ y) <= f(x) + f(y)
2. disjoint:       f(x) + f(x + y + z) <= f(x + y) + f(x + z), supp(y), supp(z) disjoint
3. restricted DR:  f(w + a e_i) - f(w) <= f(x + a e_i) - f(x), x <= w, x_i = w_i
4. two-coordinate: f(x) + f(x + a e_i + b e_j) <= f(x + a e_i) + f(x + b e_j), i != j

DR-submodularity drops the x_i = w_i requirement of (3); among norms only
rescaled l1 satisfies it.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .utils import RTOL, ValidationError, tolerance

logger = logging.getLogger(__name__)

CHARACTERIZATIONS = {
    1: "lattice",
    2: "disjoint-support",
    3: "restricted-diminishing-returns",
    4: "two-coordinate",
    "dr": "diminishing-returns",
}


@dataclass
class Violation:
    x: np.ndarray
    y: np.ndarray
    lhs: float
    rhs: float
    slack: float
    allowed: float
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SubmodCheckReport:
    trials: int
    violations: List[Violation]
    characterization: Any
    tolerance: float

    @property
    def passed(self):
        return not self.violations

    @property
    def name(self):
        return CHARACTERIZATIONS[self.characterization]

    def worst(self):
        return max(self.violations, key=lambda v: v.slack) if self.violations else None


@dataclass
class NormAxiomReport:
    trials: int
    homogeneity: List[tuple]
    triangle: List[tuple]
    monotonicity: List[tuple]
    tolerance: float

    @property
    def passed(self):
        return not (self.homogeneity or self.triangle or self.monotonicity)


def default_sampler(n):
    """Mixture of uniform, sparse and capped heavy-tailed non-negative vectors.

    Violations of submodularity concentrate on sparse, spiky inputs, so a third
    of the draws are sparse and a third Pareto-like.
    """
    def sample(rng):
        mode = rng.integers(3)
        if mode == 0:
            return rng.random(n)
        if mode == 1:
            x = rng.random(n)
            x[rng.random(n) < 0.6] = 0.0
            return x
        return np.minimum(rng.pareto(1.5, size=n), 50.0)

    return sample


def _record(violations, lhs, rhs, tol, x, y, **detail):
    allowed = tolerance(max(abs(lhs), abs(rhs)), tol)
    if lhs > rhs + allowed:
        violations.append(Violation(np.array(x, dtype=float), np.array(y, dtype=float),
                                    float(lhs), float(rhs), float(lhs - rhs), allowed, detail))


def _check_lattice(f, x, y, tol, violations):
    lhs = f(np.maximum(x, y)) + f(np.minimum(x, y))
    rhs = f(x) + f(y)
    _record(violations, lhs, rhs, tol, x, y)


def _check_disjoint(f, x, y, z, tol, violations):
    lhs = f(x) + f(x + y + z)
    rhs = f(x + y) + f(x + z)
    _record(violations, lhs, rhs, tol, x, x + y, z=z)


def _check_dr(f, x, w, i, a, tol, violations):
    step = np.zeros_like(x)
    step[i] = a
    lhs = f(w + step) - f(w)
    rhs = f(x + step) - f(x)
    _record(violations, lhs, rhs, tol, x, w, i=int(i), a=float(a))


def _check_two_coordinate(f, x, i, j, a, b, tol, violations):
    ei = np.zeros_like(x)
    ej = np.zeros_like(x)
    ei[i] = a
    ej[j] = b
    lhs = f(x) + f(x + ei + ej)
    rhs = f(x + ei) + f(x + ej)
    _record(violations, lhs, rhs, tol, x, x + ei + ej, i=int(i), j=int(j), a=float(a), b=float(b))


def check_submodular(norm, sampler=None, trials=10_000, tol=RTOL, characterization=1, seed=0):
    """Sample `trials` instances of one characterization and report every violation."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if characterization not in (1, 2, 3, 4):
        raise ValidationError(f"characterization must be 1, 2, 3 or 4, got {characterization}")

    n = norm.n
    if characterization == 4 and n < 2:
        logger.info("Two-coordinate check skipped: %r has fewer than two coordinates", norm)
        return SubmodCheckReport(0, [], characterization, tol)

    f = norm._evaluate
    sampler = sampler or default_sampler(n)
    rng = np.random.default_rng(seed)
    violations = []

    for _ in range(trials):
        x = sampler(rng)
        if characterization == 1:
            _check_lattice(f, x, sampler(rng), tol, violations)
        elif characterization == 2:
            owner = rng.integers(0, 3, size=n)
            y, z = sampler(rng), sampler(rng)
            _check_disjoint(f, x, np.where(owner == 1, y, 0.0), np.where(owner == 2, z, 0.0),
                            tol, violations)
        elif characterization == 3:
            i = rng.integers(n)
            w = x + sampler(rng)
            w[i] = x[i]
            _check_dr(f, x, w, i, sampler(rng)[i] + rng.random(), tol, violations)
        else:
            i, j = rng.choice(n, size=2, replace=False)
            a, b = rng.random(2) * (1.0 + x.max(initial=0.0))
            _check_two_coordinate(f, x, i, j, a, b, tol, violations)

    logger.debug("check_submodular(%r, char=%s): %d/%d violations",
                 norm, characterization, len(violations), trials)
    return SubmodCheckReport(trials, violations, characterization, tol)


def check_dr_submodular(norm, sampler=None, trials=10_000, tol=RTOL, seed=0):
    """Diminishing returns for all x <= w, without requiring x_i = w_i."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")

    n = norm.n
    f = norm._evaluate
    sampler = sampler or default_sampler(n)
    rng = np.random.default_rng(seed)
    violations = []

    for _ in range(trials):
        x = sampler(rng)
        w = x + sampler(rng)
        i = rng.integers(n)
        _check_dr(f, x, w, i, rng.random() * (1.0 + w.max(initial=0.0)), tol, violations)

    return SubmodCheckReport(trials, violations, "dr", tol)


def scan_binary(norm, characterization=1, tol=RTOL):
    """Exhaustive scan of one characterization over 0/1 vectors (a = b = 1); small n only."""
    n = norm.n
    if n > 8:
        raise ValidationError(f"Exhaustive binary scan limited to n <= 8, got {n}")

    f = norm._evaluate
    cube = [np.array(bits, dtype=float) for bits in itertools.product((0, 1), repeat=n)]
    violations = []
    trials = 0

    if characterization == 1:
        for x, y in itertools.product(cube, repeat=2):
            trials += 1
            _check_lattice(f, x, y, tol, violations)
    elif characterization == 2:
        for x in cube:
            for owner in itertools.product((0, 1, 2), repeat=n):
                owner = np.array(owner)
                trials += 1
                _check_disjoint(f, x, (owner == 1).astype(float), (owner == 2).astype(float),
                                tol, violations)
    elif characterization == 3:
        for x, w in itertools.product(cube, repeat=2):
            if np.any(x > w):
                continue
            for i in np.flatnonzero(x == w):
                trials += 1
                _check_dr(f, x, w, i, 1.0, tol, violations)
    elif characterization == 4:
        for x in cube:
            for i, j in itertools.permutations(range(n), 2):
                trials += 1
                _check_two_coordinate(f, x, i, j, 1.0, 1.0, tol, violations)
    else:
        raise ValidationError(f"characterization must be 1, 2, 3 or 4, got {characterization}")

    return SubmodCheckReport(trials, violations, characterization, tol)


def scan_dr_grid(norm, grid=(0.0, 0.5, 1.0, 2.0), tol=RTOL):
    """Targeted DR search: every x <= w on a value grid, every coordinate, a in grid."""
    n = norm.n
    if len(grid) ** (2 * n) > 10 ** 6:
        raise ValidationError("DR grid search too large; use a smaller grid or dimension")

    f = norm._evaluate
    points = [np.array(v, dtype=float) for v in itertools.product(grid, repeat=n)]
    steps = [a for a in grid if a > 0]
    violations = []
    trials = 0
    for x, w in itertools.product(points, repeat=2):
        if np.any(x > w):
            continue
        for i in range(n):
            for a in steps:
                trials += 1
                _check_dr(f, x, w, i, a, tol, violations)

    return SubmodCheckReport(trials, violations, "dr", tol)


def check_norm_axioms(norm, sampler=None, trials=10_000, tol=RTOL, seed=0):
    """Sampled homogeneity, triangle inequality and monotonicity."""
    n = norm.n
    f = norm._evaluate
    sampler = sampler or default_sampler(n)
    rng = np.random.default_rng(seed)
    homogeneity, triangle, monotone = [], [], []

    for _ in range(trials):
        x, y = sampler(rng), sampler(rng)
        c = rng.random() * 10.0
        fx, fy = f(x), f(y)

        scaled = f(c * x)
        if abs(scaled - c * fx) > tolerance(max(scaled, c * fx), tol):
            homogeneity.append((x, c, scaled, c * fx))

        joint = f(x + y)
        if joint > fx + fy + tolerance(fx + fy, tol):
            triangle.append((x, y, joint, fx + fy))

        upper = f(x + y)
        if fx > upper + tolerance(upper, tol):
            monotone.append((x, x + y, fx, upper))

    return NormAxiomReport(trials, homogeneity, triangle, monotone, tol)


def first_violation(reports) -> Optional[Violation]:
    for report in reports:
        if report.violations:
            return report.violations[0]
    return None
