"""Independence oracles and monotone submodular set functions.

Both families are plain picklable objects with a ``descriptor()`` so that norms
and feasible families built on them survive JSON round trips and process pools.
Set arguments are iterables of 0-based ground-set indices.
"""
import numpy as np

from .utils import ValidationError, powerset

MAX_EXHAUSTIVE_N = 10


class Matroid:
    """Base class: subclasses implement ``is_independent``."""

    kind = "matroid"

    def __init__(self, n):
        if n < 0:
            raise ValidationError(f"Ground set size must be non-negative, got {n}")
        self.n = int(n)

    def is_independent(self, items):
        raise NotImplementedError

    def rank(self, items):
        """Greedy rank; correct for matroids by the exchange property."""
        basis = []
        for i in sorted(set(items)):
            if self.is_independent(basis + [i]):
                basis.append(i)
        return len(basis)

    def descriptor(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, n, k):
        super().__init__(n)
        if not 0 <= k <= n:
            raise ValidationError(f"Uniform matroid rank k={k} must lie in [0, {n}]")
        self.k = int(k)

    def is_independent(self, items):
        return len(set(items)) <= self.k

    def descriptor(self):
        return {"type": "uniform", "n": self.n, "k": self.k}


class PartitionMatroid(Matroid):
    kind = "partition"

    def __init__(self, n, blocks, capacities):
        super().__init__(n)
        if len(blocks) != len(capacities):
            raise ValidationError(
                f"Partition matroid needs one capacity per block ({len(blocks)} blocks, "
                f"{len(capacities)} capacities)")
        self.blocks = [sorted(int(i) for i in b) for b in blocks]
        self.capacities = [int(c) for c in capacities]
        seen = sorted(i for b in self.blocks for i in b)
        if seen != list(range(n)):
            raise ValidationError("Partition matroid blocks must partition the ground set")
        if any(c < 0 for c in self.capacities):
            raise ValidationError("Partition capacities must be non-negative")
        self._block_of = {i: b for b, block in enumerate(self.blocks) for i in block}

    def is_independent(self, items):
        counts = [0] * len(self.blocks)
        for i in set(items):
            counts[self._block_of[i]] += 1
        return all(c <= cap for c, cap in zip(counts, self.capacities))

    def descriptor(self):
        return {"type": "partition", "n": self.n, "blocks": self.blocks,
                "capacities": self.capacities}


class GraphicMatroid(Matroid):
    """Ground set = edges of a multigraph; independent sets are forests."""

    kind = "graphic"

    def __init__(self, edges):
        super().__init__(len(edges))
        self.edges = [(int(u), int(v)) for u, v in edges]

    def is_independent(self, items):
        parent = {}

        def find(a):
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in set(items):
            u, v = self.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def descriptor(self):
        return {"type": "graphic", "edges": [list(e) for e in self.edges]}


def matroid_from_descriptor(spec):
    kind = spec.get("type")
    if kind == "uniform":
        return UniformMatroid(spec["n"], spec["k"])
    if kind == "partition":
        return PartitionMatroid(spec["n"], spec["blocks"], spec["capacities"])
    if kind == "graphic":
        return GraphicMatroid(spec["edges"])
    raise ValidationError(f"Unknown matroid type {kind!r}")


class SetFunction:
    """Monotone set function with f(empty) = 0, queried on frozensets."""

    def __init__(self, n):
        self.n = int(n)

    def __call__(self, items):
        raise NotImplementedError

    def descriptor(self):
        raise NotImplementedError

    def validate(self, tol=1e-9):
        """Exhaustive monotonicity and diminishing-returns check; small n only.

        Raises ValidationError naming the first violating pair A subset B and element i.
        """
        if self.n > MAX_EXHAUSTIVE_N:
            raise ValidationError(f"Exhaustive set function check limited to n <= {MAX_EXHAUSTIVE_N}")
        ground = range(self.n)
        for b in powerset(ground):
            B = frozenset(b)
            for i in ground:
                if i in B:
                    continue
                gain_b = self(B | {i}) - self(B)
                if gain_b < -tol:
                    raise ValidationError(f"Set function is not monotone: adding {i} to {sorted(B)} "
                                          f"changes it by {gain_b}")
                for a in powerset(b):
                    A = frozenset(a)
                    gain_a = self(A | {i}) - self(A)
                    if gain_b > gain_a + tol:
                        raise ValidationError(
                            f"Set function is not submodular: adding {i} gains {gain_b} on "
                            f"{sorted(B)} but only {gain_a} on {sorted(A)}")


class CoverageFunction(SetFunction):
    """f(S) = total weight of universe items covered by the sets indexed by S."""

    def __init__(self, sets, weights):
        super().__init__(len(sets))
        self.sets = [sorted(int(u) for u in s) for s in sets]
        self.weights = [float(w) for w in weights]
        if any(w < 0 for w in self.weights):
            raise ValidationError("Coverage weights must be non-negative")
        universe = {u for s in self.sets for u in s}
        if universe and max(universe) >= len(self.weights):
            raise ValidationError("Coverage sets reference items without a weight")

    def __call__(self, items):
        covered = set()
        for i in items:
            covered.update(self.sets[i])
        return float(sum(self.weights[u] for u in covered))

    def descriptor(self):
        return {"type": "coverage", "sets": self.sets, "weights": self.weights}


class BudgetAdditiveFunction(SetFunction):
    """f(S) = min(sum of w_i over S, budget)."""

    def __init__(self, weights, budget):
        super().__init__(len(weights))
        self.weights = [float(w) for w in weights]
        self.budget = float(budget)
        if any(w < 0 for w in self.weights) or self.budget < 0:
            raise ValidationError("Budget-additive weights and budget must be non-negative")

    def __call__(self, items):
        return min(sum(self.weights[i] for i in items), self.budget)

    def descriptor(self):
        return {"type": "budget_additive", "weights": self.weights, "budget": self.budget}


class ConcaveCardinalityFunction(SetFunction):
    """f(S) = |S| ** alpha with alpha in (0, 1]."""

    def __init__(self, n, alpha):
        super().__init__(n)
        if not 0 < alpha <= 1:
            raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha = float(alpha)

    def __call__(self, items):
        return float(len(set(items)) ** self.alpha)

    def descriptor(self):
        return {"type": "concave_cardinality", "n": self.n, "alpha": self.alpha}


class MatroidRankFunction(SetFunction):
    def __init__(self, matroid):
        super().__init__(matroid.n)
        self.matroid = matroid

    def __call__(self, items):
        return float(self.matroid.rank(items))

    def descriptor(self):
        return {"type": "matroid_rank", "matroid": self.matroid.descriptor()}


class TableFunction(SetFunction):
    """Explicit table indexed by bitmask: values[mask] = f({i : bit i of mask set})."""

    def __init__(self, values):
        values = [float(v) for v in values]
        n = len(values).bit_length() - 1
        if len(values) != 1 << n:
            raise ValidationError(f"Table length {len(values)} is not a power of two")
        super().__init__(n)
        self.values = values

    def __call__(self, items):
        mask = 0
        for i in items:
            mask |= 1 << i
        return self.values[mask]

    def descriptor(self):
        return {"type": "table", "values": self.values}


def set_function_from_descriptor(spec):
    kind = spec.get("type")
    if kind == "coverage":
        return CoverageFunction(spec["sets"], spec["weights"])
    if kind == "budget_additive":
        return BudgetAdditiveFunction(spec["weights"], spec["budget"])
    if kind == "concave_cardinality":
        return ConcaveCardinalityFunction(spec["n"], spec["alpha"])
    if kind == "matroid_rank":
        return MatroidRankFunction(matroid_from_descriptor(spec["matroid"]))
    if kind == "table":
        return TableFunction(spec["values"])
    raise ValidationError(f"Unknown set function type {kind!r}")


def random_partition_matroid(n, rng):
    """Partition matroid with random blocks and capacities in [1, block size]."""
    labels = rng.integers(0, max(1, n // 2 + 1), size=n)
    blocks = [np.flatnonzero(labels == b).tolist() for b in np.unique(labels)]
    capacities = [int(rng.integers(1, len(b) + 1)) for b in blocks]
    return PartitionMatroid(n, blocks, capacities)
