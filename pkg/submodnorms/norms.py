"""Monotone norm oracles on the non-negative orthant.

Every oracle is immutable after construction. ``norm(x)`` validates its input
(dimension, non-negativity); ``norm._evaluate(x)`` is the unchecked fast path
used by the solvers on vectors they built themselves.
"""
import logging

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .matroids import (MAX_EXHAUSTIVE_N, Matroid, SetFunction, matroid_from_descriptor,
                       set_function_from_descriptor)
from .schemas import (ConicalSpec, LovaszSpec, LpSpec, MatroidRankSpec, MaxLinearSpec,
                      NormDocument, OrderedSpec, PartialSumSpec, RescaledSpec,
                      RestrictedSpec, SymmetricMaxSpec, TopKSpec)
from .utils import ATOL, ValidationError, validate_vector

logger = logging.getLogger(__name__)

CLOSED_FORM = "closed-form"
VALUE_ORACLE = "value-oracle"


def _weights(values, name):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValidationError(f"{name} must be a vector")
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise ValidationError(f"All entries of {name} must be non-negative")
    return values


def _check_descending(a, name):
    if np.any(np.diff(a) > ATOL):
        raise ValidationError(f"{name} must be sorted in descending order, got {a.tolist()}")


class NormOracle:
    """Base class for evaluable monotone norms of a fixed dimension n."""

    kind = "norm"
    provenance = CLOSED_FORM
    symmetric = False

    def __init__(self, n):
        if n < 0:
            raise ValidationError(f"Norm dimension must be non-negative, got {n}")
        self.n = int(n)

    def __call__(self, x):
        return self._evaluate(validate_vector(x, self.n))

    def _evaluate(self, x):
        raise NotImplementedError

    def descriptor(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class LpNorm(NormOracle):
    kind = "lp"
    symmetric = True

    def __init__(self, n, p):
        super().__init__(n)
        p = float(p)
        if not p >= 1:
            raise ValidationError(f"p must lie in [1, inf], got {p}")
        self.p = p

    def _evaluate(self, x):
        if x.size == 0:
            return 0.0
        if self.p == 1:
            return float(x.sum())
        if np.isinf(self.p):
            return float(x.max())
        return float(np.linalg.norm(x, ord=self.p))

    def descriptor(self):
        return {"kind": "lp", "n": self.n, "p": "inf" if np.isinf(self.p) else self.p}

    def __repr__(self):
        return f"LpNorm(n={self.n}, p={self.p})"


class TopKNorm(NormOracle):
    """Sum of the k largest coordinates."""

    kind = "top_k"
    symmetric = True

    def __init__(self, n, k):
        super().__init__(n)
        if not 1 <= k <= n:
            raise ValidationError(f"Top-k requires 1 <= k <= n, got k={k}, n={n}")
        self.k = int(k)

    def _evaluate(self, x):
        return float(np.partition(x, self.n - self.k)[self.n - self.k:].sum())

    def descriptor(self):
        return {"kind": "top_k", "n": self.n, "k": self.k}

    def __repr__(self):
        return f"TopKNorm(n={self.n}, k={self.k})"


class OrderedNorm(NormOracle):
    """<a, x sorted descending> for a descending non-negative weight vector a."""

    kind = "ordered"
    symmetric = True

    def __init__(self, weights):
        a = _weights(weights, "ordered weights")
        _check_descending(a, "ordered weights")
        super().__init__(a.shape[0])
        self.weights = a

    def _evaluate(self, x):
        return float(np.dot(self.weights, np.sort(x)[::-1]))

    def descriptor(self):
        return {"kind": "ordered", "weights": self.weights.tolist()}


class SymmetricMaxNorm(NormOracle):
    """max over a finite set A of descending weight vectors of <a, x sorted descending>."""

    kind = "symmetric_max"
    symmetric = True

    def __init__(self, weights):
        A = np.atleast_2d(np.asarray(weights, dtype=float))
        if A.size == 0:
            raise ValidationError("SymmetricMax needs at least one weight vector")
        if np.any(A < 0):
            raise ValidationError("All SymmetricMax weights must be non-negative")
        for row in A:
            _check_descending(row, "SymmetricMax weight vector")
        super().__init__(A.shape[1])
        self.weights = A

    def _evaluate(self, x):
        return float(np.max(self.weights @ np.sort(x)[::-1]))

    def descriptor(self):
        return {"kind": "symmetric_max", "weights": self.weights.tolist()}


class MaxLinearNorm(NormOracle):
    """max over rows w of <w, x>: the general monotone norm with a finite dual description."""

    kind = "max_linear"

    def __init__(self, rows):
        W = np.atleast_2d(np.asarray(rows, dtype=float))
        if W.size == 0 or np.any(W < 0):
            raise ValidationError("MaxLinear rows must be non-empty and non-negative")
        super().__init__(W.shape[1])
        self.rows = W

    def _evaluate(self, x):
        return float(np.max(self.rows @ x))

    def descriptor(self):
        return {"kind": "max_linear", "rows": self.rows.tolist()}


class LovaszNorm(NormOracle):
    """Lovász extension of a monotone submodular set function with f(empty) = 0.

    Evaluated as the telescoping sum over the nested level sets of x sorted
    descending (stable, ties by index). With ``check`` the set function is
    verified exhaustively when n <= MAX_EXHAUSTIVE_N.
    """

    kind = "lovasz"

    def __init__(self, set_function, n=None, check=False):
        n = set_function.n if n is None else n
        if n != set_function.n:
            raise ValidationError(f"Set function ground set {set_function.n} does not match n={n}")
        super().__init__(n)
        if set_function(frozenset()) != 0:
            raise ValidationError("Lovász extension needs f(empty set) = 0")
        if check:
            if n <= MAX_EXHAUSTIVE_N:
                set_function.validate()
            else:
                logger.warning("Skipping the exhaustive set function check for n=%d > %d",
                               n, MAX_EXHAUSTIVE_N)
        self.set_function = set_function
        self.symmetric = set_function.descriptor().get("type") == "concave_cardinality"

    def _evaluate(self, x):
        order = np.argsort(-x, kind="stable")
        xs = np.append(x[order], 0.0)
        total = 0.0
        level = []
        for k in range(self.n):
            level.append(int(order[k]))
            gap = xs[k] - xs[k + 1]
            if gap > 0:
                total += gap * self.set_function(frozenset(level))
        return float(total)

    def descriptor(self):
        return {"kind": "lovasz", "n": self.n, "set_function": self.set_function.descriptor()}


class MatroidRankNorm(NormOracle):
    """max over independent S of the sum of x over S, by the matroid greedy."""

    kind = "matroid_rank"

    def __init__(self, matroid):
        super().__init__(matroid.n)
        self.matroid = matroid

    def _evaluate(self, x):
        order = np.argsort(-x, kind="stable")
        chosen = []
        total = 0.0
        for i in order:
            if x[i] <= 0:
                break
            if self.matroid.is_independent(chosen + [int(i)]):
                chosen.append(int(i))
                total += x[i]
        return float(total)

    def descriptor(self):
        return {"kind": "matroid_rank", "matroid": self.matroid.descriptor()}


class PartialSumNorm(NormOracle):
    """Sum over parts (S, N_S) of N_S(x restricted to S); N_S has dimension |S|."""

    kind = "partial_sum"

    def __init__(self, n, parts):
        super().__init__(n)
        if not parts:
            raise ValidationError("PartialSum needs at least one part")
        self.parts = []
        covered = set()
        for indices, inner in parts:
            idx = np.asarray(indices, dtype=int)
            if idx.size != inner.n:
                raise ValidationError(
                    f"Part has {idx.size} indices but its norm has dimension {inner.n}")
            if np.any(idx < 0) or np.any(idx >= n):
                raise ValidationError(f"Part indices out of range for n={n}")
            covered.update(idx.tolist())
            self.parts.append((idx, inner))
        if len(covered) != n:
            raise ValidationError("PartialSum parts must cover every coordinate")

    def _evaluate(self, x):
        return float(sum(inner._evaluate(x[idx]) for idx, inner in self.parts))

    def descriptor(self):
        return {"kind": "partial_sum", "n": self.n,
                "parts": [{"indices": idx.tolist(), "norm": inner.descriptor()}
                          for idx, inner in self.parts]}


class ConicalNorm(NormOracle):
    """Non-negative combination sum c_k N_k(x) of norms of the same dimension."""

    kind = "conical"

    def __init__(self, terms):
        if not terms:
            raise ValidationError("Conical combination needs at least one term")
        dims = {inner.n for _, inner in terms}
        if len(dims) != 1:
            raise ValidationError(f"Conical terms have mismatched dimensions {sorted(dims)}")
        coefficients = [float(c) for c, _ in terms]
        if any(c < 0 for c in coefficients) or not any(c > 0 for c in coefficients):
            raise ValidationError("Conical coefficients must be non-negative, not all zero")
        super().__init__(dims.pop())
        self.terms = list(zip(coefficients, [inner for _, inner in terms]))
        self.symmetric = all(inner.symmetric for _, inner in self.terms)

    def _evaluate(self, x):
        return float(sum(c * inner._evaluate(x) for c, inner in self.terms))

    def descriptor(self):
        return {"kind": "conical",
                "terms": [{"coefficient": c, "norm": inner.descriptor()} for c, inner in self.terms]}


class RescaledNorm(NormOracle):
    """x -> N(s * x) for a strictly positive scale vector s."""

    kind = "rescaled"

    def __init__(self, scale, inner):
        s = np.asarray(scale, dtype=float)
        if s.shape != (inner.n,):
            raise ValidationError(f"Scale vector must have dimension {inner.n}")
        if np.any(s <= 0):
            raise ValidationError("Scale entries must be strictly positive")
        super().__init__(inner.n)
        self.scale = s
        self.inner = inner
        self.symmetric = inner.symmetric and bool(np.all(s == s[0])) if s.size else inner.symmetric

    def _evaluate(self, x):
        return self.inner._evaluate(self.scale * x)

    def descriptor(self):
        return {"kind": "rescaled", "scale": self.scale.tolist(), "norm": self.inner.descriptor()}


class RestrictedNorm(NormOracle):
    """The inner norm evaluated on x zero-extended to the inner dimension."""

    kind = "restricted"

    def __init__(self, dim, inner):
        if not 0 <= dim <= inner.n:
            raise ValidationError(f"Restriction dimension {dim} exceeds inner dimension {inner.n}")
        super().__init__(dim)
        self.inner = inner
        self.symmetric = inner.symmetric

    def _evaluate(self, x):
        padded = np.zeros(self.inner.n)
        padded[:self.n] = x
        return self.inner._evaluate(padded)

    def descriptor(self):
        return {"kind": "restricted", "dim": self.n, "norm": self.inner.descriptor()}


class ValueOracleNorm(NormOracle):
    """Opaque evaluation callback; the caller vouches for the norm axioms."""

    kind = "value_oracle"
    provenance = VALUE_ORACLE

    def __init__(self, n, evaluate, symmetric=False, name="value_oracle"):
        super().__init__(n)
        self._callback = evaluate
        self.symmetric = bool(symmetric)
        self.name = name

    def _evaluate(self, x):
        return float(self._callback(x))

    def descriptor(self):
        raise ValidationError(f"Value-oracle norm {self.name!r} has no JSON descriptor")


# Constructors

def lp_norm(n, p):
    return LpNorm(n, float("inf") if p in ("inf", np.inf) else p)


def top_k_norm(n, k):
    """Top-k with the degenerate cases normalized: Top-n is l1, Top-1 is l-infinity."""
    if not 1 <= k <= n:
        raise ValidationError(f"Top-k requires 1 <= k <= n, got k={k}, n={n}")
    if k == n:
        return LpNorm(n, 1)
    if k == 1:
        return LpNorm(n, float("inf"))
    return TopKNorm(n, k)


def ordered_norm(weights):
    return OrderedNorm(weights)


def symmetric_max_norm(weights):
    return SymmetricMaxNorm(weights)


def max_linear_norm(rows):
    return MaxLinearNorm(rows)


def lovasz_norm(set_function, check=False):
    if not isinstance(set_function, SetFunction):
        raise ValidationError("lovasz_norm expects a SetFunction")
    return LovaszNorm(set_function, check=check)


def matroid_rank_norm(matroid):
    if not isinstance(matroid, Matroid):
        raise ValidationError("matroid_rank_norm expects a Matroid")
    return MatroidRankNorm(matroid)


def partial_sum_norm(n, parts):
    return PartialSumNorm(n, parts)


def conical_norm(terms):
    return ConicalNorm(terms)


def rescaled_norm(scale, inner):
    return RescaledNorm(scale, inner)


def restricted_norm(dim, inner):
    if dim == inner.n:
        return inner
    return RestrictedNorm(dim, inner)


def value_oracle_norm(n, evaluate, symmetric=False, name="value_oracle"):
    return ValueOracleNorm(n, evaluate, symmetric=symmetric, name=name)


# Operations

def evaluate(norm, x):
    """Evaluate ||x||; raises ValidationError on dimension mismatch or negative entries."""
    return norm(x)


def unit_vector(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def prefix_indicator(n, m):
    """The indicator vector of the first m coordinates."""
    v = np.zeros(n)
    v[:m] = 1.0
    return v


def marginal(norm, base, i, z):
    """||base with coordinate i set to z|| - ||base||, for base supported on [0, i)."""
    base = validate_vector(base, norm.n, name="base")
    if not 0 <= i < norm.n:
        raise ValidationError(f"Index {i} out of range for dimension {norm.n}")
    if np.any(base[i:] != 0):
        raise ValidationError(f"base must be zero at positions >= {i}")
    if z < 0:
        raise ValidationError(f"z must be non-negative, got {z}")

    before = norm._evaluate(base)
    extended = base.copy()
    extended[i] = z
    return max(0.0, norm._evaluate(extended) - before)


def rho(norm):
    """||(1,...,1)|| / min_i ||e_i||, by exact evaluation on the unit vectors."""
    n = norm.n
    if n < 1:
        raise ValidationError("rho needs dimension n >= 1")

    units = np.array([norm._evaluate(unit_vector(n, i)) for i in range(n)])
    smallest = units.min()
    if smallest <= ATOL:
        raise ValidationError(
            f"Degenerate norm: ||e_{int(units.argmin())}|| = {smallest}, not a norm")

    return norm._evaluate(np.ones(n)) / smallest


# Descriptors

def norm_to_descriptor(norm):
    return norm.descriptor()


def norm_from_descriptor(obj):
    """Build an oracle from a JSON descriptor (dict), validating it first."""
    try:
        spec = NormDocument(norm=obj).norm
    except PydanticValidationError as exc:
        raise ValidationError(f"Invalid norm descriptor: {exc}") from exc
    return _build(spec)


def _build(spec):
    if isinstance(spec, LpSpec):
        return lp_norm(spec.n, spec.p)
    if isinstance(spec, TopKSpec):
        return top_k_norm(spec.n, spec.k)
    if isinstance(spec, OrderedSpec):
        return OrderedNorm(spec.weights)
    if isinstance(spec, SymmetricMaxSpec):
        return SymmetricMaxNorm(spec.weights)
    if isinstance(spec, MaxLinearSpec):
        return MaxLinearNorm(spec.rows)
    if isinstance(spec, LovaszSpec):
        return LovaszNorm(set_function_from_descriptor(spec.set_function), n=spec.n,
                          check=spec.set_function.get("type") == "table")
    if isinstance(spec, MatroidRankSpec):
        return MatroidRankNorm(matroid_from_descriptor(spec.matroid))
    if isinstance(spec, PartialSumSpec):
        return PartialSumNorm(spec.n, [(p.indices, _build(p.norm)) for p in spec.parts])
    if isinstance(spec, ConicalSpec):
        return ConicalNorm([(t.coefficient, _build(t.norm)) for t in spec.terms])
    if isinstance(spec, RescaledSpec):
        return RescaledNorm(spec.scale, _build(spec.norm))
    if isinstance(spec, RestrictedSpec):
        return RestrictedNorm(spec.dim, _build(spec.norm))
    raise ValidationError(f"Unsupported norm descriptor {spec!r}")
