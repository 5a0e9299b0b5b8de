import math
from itertools import chain, combinations

import numpy as np
import pandas as pd

ATOL = 1e-12
RTOL = 1e-9
MAX_BISECTION_ITERATIONS = 200


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class BudgetError(ValueError):
    """Raised before an exhaustive enumeration that would exceed its budget."""


class NonMonotoneError(RuntimeError):
    """Raised on a non-monotone constraint function or a runner step that breaks its invariants."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


def validate_vector(x, n=None, name="x"):
    """Validate that x is a finite non-negative vector of the expected dimension."""
    x = np.asarray(x, dtype=float)

    if x.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {x.shape}")

    if n is not None and x.shape[0] != n:
        raise ValidationError(f"{name} has dimension {x.shape[0]}, expected {n}")

    if np.any(np.isnan(x)):
        raise ValidationError(f"{name} contains NaN entries")

    if np.any(x < 0):
        raise ValidationError(f"All entries of {name} must be non-negative")

    return x


def tolerance(scale, tol=RTOL, atol=ATOL):
    """Absolute slack allowed when comparing quantities of the given magnitude."""
    return atol + tol * abs(scale)


def exceeds(lhs, rhs, tol=RTOL, atol=ATOL):
    """True when lhs > rhs beyond the combined absolute/relative tolerance."""
    return lhs > rhs + tolerance(max(abs(lhs), abs(rhs)), tol, atol)


def close(a, b, tol=RTOL, atol=ATOL):
    return abs(a - b) <= tolerance(max(abs(a), abs(b)), tol, atol)


def sort_descending(x):
    """Return (x sorted descending, permutation); ties keep original index order."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(-x, kind="stable")
    return x[order], order


def compensated_sum(values):
    return math.fsum(values)


def step_rng(seed, step):
    """Counter-based generator for one (seed, step) pair; steps never share draws."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, int(step), 0, 0]))


def powerset(iterable):
    s = list(iterable)
    return chain.from_iterable(combinations(s, r) for r in range(len(s) + 1))


def mask_to_set(mask):
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def set_to_mask(items):
    mask = 0
    for i in items:
        mask |= 1 << int(i)
    return mask


def create_step_log(step_number, description, **fields):
    """Create a step log entry; array values are copied so later mutation is safe."""
    step_info = {
        'step': step_number,
        'description': description
    }

    for key, value in fields.items():
        step_info[key] = value.copy() if isinstance(value, np.ndarray) else value

    return step_info


def format_step_table(steps, columns=None):
    """Format a list of step logs as a DataFrame, one row per step."""
    df = pd.DataFrame(steps)
    if columns is not None:
        df = df.reindex(columns=columns)
    return df
