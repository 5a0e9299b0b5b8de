"""Exact adaptive and non-adaptive stochastic probing on small instances.

Element i takes the value ``support[k]`` with probability ``probs[k]``,
independently of the others. A probed set must stay in a downward-closed
family F; the objective is the norm of the realized values, zero outside the
probed set.
"""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .matroids import BudgetAdditiveFunction, CoverageFunction, matroid_from_descriptor
from .norms import LovaszNorm, lp_norm, top_k_norm
from .utils import (ATOL, RTOL, BudgetError, ValidationError, compensated_sum, mask_to_set,
                    set_to_mask, step_rng, tolerance)

logger = logging.getLogger(__name__)

MAX_PROBE_STATES = 65536
MAX_GROUND_SET = 16


class DiscreteDistribution:
    def __init__(self, support, probs):
        support = [float(v) for v in support]
        probs = [float(p) for p in probs]
        if not support or len(support) != len(probs):
            raise ValidationError(
                f"Distribution needs matching non-empty support and probs, got {len(support)} and {len(probs)}")
        if any(v < 0 for v in support):
            raise ValidationError(f"Support values must be non-negative, got {support}")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValidationError(f"Probabilities must be non-negative and sum to 1, got {probs}")
        self.support = support
        self.probs = probs

    def __len__(self):
        return len(self.support)

    def mean(self):
        return compensated_sum(v * p for v, p in zip(self.support, self.probs))

    def sample_index(self, rng):
        return int(rng.choice(len(self.support), p=self.probs))

    def descriptor(self):
        return {"support": self.support, "probs": self.probs}

    def __repr__(self):
        return f"DiscreteDistribution({self.support}, {self.probs})"


# Feasible families

class FeasibleFamily:
    kind = "family"

    def __init__(self, n):
        if not 0 <= n <= MAX_GROUND_SET:
            raise ValidationError(f"Ground set size must lie in [0, {MAX_GROUND_SET}], got {n}")
        self.n = int(n)

    def contains(self, mask):
        raise NotImplementedError

    def can_add(self, mask, i):
        return self.contains(mask | 1 << i)

    def members(self):
        return [mask for mask in range(1 << self.n) if self.contains(mask)]

    def descriptor(self):
        raise NotImplementedError


class ExplicitFamily(FeasibleFamily):
    """Listed sets; downward-closedness is checked exhaustively on construction."""

    kind = "explicit"

    def __init__(self, n, sets):
        super().__init__(n)
        masks = set()
        for s in sets:
            if any(not 0 <= int(i) < n for i in s):
                raise ValidationError(f"Set {list(s)} has elements outside [0, {n})")
            masks.add(set_to_mask(s))
        if 0 not in masks:
            raise ValidationError("A downward-closed family must contain the empty set")
        for mask in masks:
            for i in range(n):
                if mask >> i & 1 and mask & ~(1 << i) not in masks:
                    raise ValidationError(
                        f"Family is not downward closed: {sorted(mask_to_set(mask))} is a member "
                        f"but {sorted(mask_to_set(mask & ~(1 << i)))} is not")
        self.masks = frozenset(masks)

    def contains(self, mask):
        return mask in self.masks

    def members(self):
        return sorted(self.masks)

    def descriptor(self):
        return {"kind": "explicit", "n": self.n,
                "sets": [sorted(mask_to_set(m)) for m in sorted(self.masks)]}


class CardinalityFamily(FeasibleFamily):
    kind = "cardinality"

    def __init__(self, n, k):
        super().__init__(n)
        if k < 0:
            raise ValidationError(f"Cardinality bound must be non-negative, got {k}")
        self.k = int(k)

    def contains(self, mask):
        return bin(mask).count("1") <= self.k

    def descriptor(self):
        return {"kind": "cardinality", "n": self.n, "k": self.k}


class MatroidFamily(FeasibleFamily):
    kind = "matroid"

    def __init__(self, matroid):
        super().__init__(matroid.n)
        self.matroid = matroid

    def contains(self, mask):
        return self.matroid.is_independent(list(mask_to_set(mask)))

    def descriptor(self):
        return {"kind": "matroid", "n": self.n, "matroid": self.matroid.descriptor()}


def family_from_descriptor(spec):
    kind = spec.get("kind")
    if kind == "explicit":
        return ExplicitFamily(spec["n"], spec.get("sets") or [])
    if kind == "cardinality":
        return CardinalityFamily(spec["n"], spec["k"])
    if kind == "matroid":
        matroid = matroid_from_descriptor(spec["matroid"])
        if matroid.n != spec["n"]:
            raise ValidationError(f"Matroid ground set {matroid.n} does not match n={spec['n']}")
        return MatroidFamily(matroid)
    raise ValidationError(f"Unknown family kind {kind!r}")


@dataclass
class ProbingInstance:
    distributions: List[DiscreteDistribution]
    family: FeasibleFamily
    norm: object

    def __post_init__(self):
        n = len(self.distributions)
        if self.family.n != n or self.norm.n != n:
            raise ValidationError(
                f"{n} distributions, family on {self.family.n} elements and norm of dimension "
                f"{self.norm.n} must agree")

    @property
    def n(self):
        return len(self.distributions)

    def realized(self, outcome):
        """Realized vector for a tuple of support indices, -1 for unprobed elements."""
        return np.array([self.distributions[i].support[k] if k >= 0 else 0.0
                         for i, k in enumerate(outcome)])


# Policies

@dataclass
class PolicyNode:
    element: Optional[int]
    value: float
    children: Dict[int, "PolicyNode"] = field(default_factory=dict)

    @property
    def is_leaf(self):
        return self.element is None


@dataclass
class Policy:
    root: PolicyNode
    value: float
    norm: object

    def probe_sets(self):
        """Every root-to-leaf probed set, as sorted tuples."""
        found = set()

        def walk(node, probed):
            if node.is_leaf:
                found.add(tuple(sorted(probed)))
                return
            for child in node.children.values():
                walk(child, probed + [node.element])

        walk(self.root, [])
        return sorted(found)

    def size(self):
        def count(node):
            return 1 + sum(count(c) for c in node.children.values())
        return count(self.root)


def _check_budget(instance, max_states):
    if instance.n > MAX_GROUND_SET:
        raise BudgetError(f"Probing limited to n <= {MAX_GROUND_SET}, got {instance.n}")
    sizes = [len(X) for X in instance.distributions]
    states = 0
    for mask in instance.family.members():
        states += math.prod(sizes[i] for i in mask_to_set(mask))
        if states > max_states:
            raise BudgetError(f"Probing state space exceeds the budget of {max_states} states")
    return states


def adaptive_opt(instance, max_states=MAX_PROBE_STATES):
    """Optimal adaptive policy by memoized DP over (probed set, realized values).

    Returns (policy, value). Stopping wins ties, so the policy never probes an
    element that cannot raise the expected objective.
    """
    states = _check_budget(instance, max_states)
    n = instance.n
    dists = instance.distributions
    family = instance.family
    f = instance.norm._evaluate
    memo = {}
    objective_cache = {}

    def objective(outcome):
        value = objective_cache.get(outcome)
        if value is None:
            value = objective_cache[outcome] = f(instance.realized(outcome))
        return value

    def solve(mask, outcome):
        key = (mask, outcome)
        if key in memo:
            return memo[key][0]
        best, choice = objective(outcome), None
        for i in range(n):
            if mask >> i & 1 or not family.can_add(mask, i):
                continue
            cont = compensated_sum(
                p * solve(mask | 1 << i, outcome[:i] + (k,) + outcome[i + 1:])
                for k, p in enumerate(dists[i].probs))
            if cont > best:
                best, choice = cont, i
        memo[key] = (best, choice)
        return best

    def build(mask, outcome):
        value, choice = memo[(mask, outcome)]
        if choice is None:
            return PolicyNode(None, value)
        children = {k: build(mask | 1 << choice, outcome[:choice] + (k,) + outcome[choice + 1:])
                    for k in range(len(dists[choice]))}
        return PolicyNode(choice, value, children)

    start = tuple([-1] * n)
    value = solve(0, start)
    logger.debug("adaptive_opt: %d memo entries (budgeted %d states), value %.12g",
                 len(memo), states, value)
    return Policy(build(0, start), value, instance.norm), value


def expected_value(instance, elements):
    """E[f(X_S)] by enumerating the product distribution over S."""
    elements = sorted(elements)
    dists = instance.distributions
    f = instance.norm._evaluate
    x = np.zeros(instance.n)
    terms = []
    for combo in itertools.product(*(range(len(dists[i])) for i in elements)):
        p = 1.0
        for i, k in zip(elements, combo):
            x[i] = dists[i].support[k]
            p *= dists[i].probs[k]
        terms.append(p * f(x))
    return compensated_sum(terms)


def nonadaptive_opt(instance, max_states=MAX_PROBE_STATES):
    """Best fixed feasible set. Returns (sorted tuple S, E[f(X_S)])."""
    _check_budget(instance, max_states)
    best_set, best_value = (), 0.0
    for mask in instance.family.members():
        elements = sorted(mask_to_set(mask))
        value = expected_value(instance, elements)
        if value > best_value:
            best_set, best_value = tuple(elements), value
    return best_set, best_value


def _gap(instance, max_states=MAX_PROBE_STATES):
    _, adap = adaptive_opt(instance, max_states)
    _, na = nonadaptive_opt(instance, max_states)
    if adap < na - tolerance(na, RTOL):
        raise RuntimeError(f"Adaptive optimum {adap} below the non-adaptive optimum {na}")
    if na <= ATOL:
        if adap > ATOL:
            raise RuntimeError(f"Non-adaptive optimum is 0 but the adaptive optimum is {adap}")
        return adap, na, 1.0
    return adap, na, max(1.0, adap / na)


def adaptivity_gap(instance, max_states=MAX_PROBE_STATES):
    """Adap / NA, at least 1."""
    return _gap(instance, max_states)[2]


def sample_path_strategy(policy, instance, seed):
    """Run the policy on one sample to pick S, then score S on an independent sample.

    Returns (S, f(X'_S)). Averaged over seeds this is a non-adaptive strategy
    selecting each S with the policy's probabilities.
    """
    path_rng, value_rng = step_rng(seed, 0), step_rng(seed, 1)
    node = policy.root
    probed = []
    while not node.is_leaf:
        i = node.element
        probed.append(i)
        node = node.children[instance.distributions[i].sample_index(path_rng)]

    x = np.zeros(instance.n)
    for i in probed:
        X = instance.distributions[i]
        x[i] = X.support[X.sample_index(value_rng)]
    return tuple(sorted(probed)), policy.norm._evaluate(x)


# Sweeps

def all_downward_closed_families(n):
    """Every downward-closed family on {0..n-1} containing the empty set, as sorted mask tuples."""
    if not 0 <= n <= 5:
        raise ValidationError(f"Downward-closed enumeration limited to n <= 5, got {n}")
    order = sorted(range(1, 1 << n), key=lambda m: (bin(m).count("1"), m))
    families = []

    def extend(index, chosen):
        if index == len(order):
            families.append(tuple(sorted(chosen)))
            return
        mask = order[index]
        extend(index + 1, chosen)
        if all(mask & ~(1 << i) in chosen for i in range(n) if mask >> i & 1):
            chosen.add(mask)
            extend(index + 1, chosen)
            chosen.remove(mask)

    extend(0, {0})
    return sorted(families, key=lambda fam: (len(fam), fam))


def two_point_distributions(values=(0.0, 0.5, 1.0), probs=(0.25, 0.5, 0.75)):
    """All (a < b) pairs from values, with P(X = b) taken from probs."""
    return [DiscreteDistribution([a, b], [1.0 - q, q])
            for a, b in itertools.combinations(sorted(values), 2) for q in probs]


def default_sweep_norms(n):
    """L1, L-infinity, Top-2 and Lovász extensions of a coverage and a budget-additive function."""
    coverage = CoverageFunction([[u % (n + 1), (u + 1) % (n + 1)] for u in range(n)],
                                [1.0] * (n + 1))
    budget = BudgetAdditiveFunction([1.0 + 0.5 * i for i in range(n)], budget=1.5 + 0.5 * n)
    return [lp_norm(n, 1), lp_norm(n, np.inf), top_k_norm(n, min(2, n)),
            LovaszNorm(coverage), LovaszNorm(budget)]


def _norm_label(norm):
    if isinstance(norm, LovaszNorm):
        return f"lovasz:{norm.set_function.descriptor()['type']}"
    return norm.kind


def _sweep_one(job):
    instance_id, dists, family, norm = job
    instance = ProbingInstance(list(dists), family, norm)
    adap, na, ratio = _gap(instance)
    return {"instance": instance_id, "adap": adap, "na": na, "ratio": ratio,
            "norm": _norm_label(norm), "family": family.kind,
            "family_size": len(family.members())}


def sweep_small_instances(n=3, values=(0.0, 0.5, 1.0), probs=(0.25, 0.5, 0.75),
                          norms=None, workers=1):
    """Exhaustive gap table over all downward-closed families and two-point distributions."""
    norms = default_sweep_norms(n) if norms is None else norms
    distributions = two_point_distributions(values, probs)
    families = [ExplicitFamily(n, [sorted(mask_to_set(m)) for m in fam])
                for fam in all_downward_closed_families(n)]

    jobs = []
    for family in families:
        for norm in norms:
            for dists in itertools.product(distributions, repeat=n):
                jobs.append((len(jobs), dists, family, norm))

    logger.info("Sweeping %d probing instances", len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs, chunksize=256))
    else:
        rows = [_sweep_one(job) for job in jobs]

    table = pd.DataFrame(rows).sort_values("instance", kind="stable").reset_index(drop=True)
    table["max_ratio"] = table["ratio"].max() if len(table) else np.nan
    return table
