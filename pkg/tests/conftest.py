import json

import numpy as np
import pytest

from submodnorms.generators import gen_star
from submodnorms.matroids import (BudgetAdditiveFunction, ConcaveCardinalityFunction,
                                  CoverageFunction, PartitionMatroid)
from submodnorms.norms import (ConicalNorm, LovaszNorm, LpNorm, MatroidRankNorm, OrderedNorm,
                               PartialSumNorm, RescaledNorm, TopKNorm)


def submodular_norms(n):
    """Every built-in norm family that is submodular, instantiated at dimension n (n >= 4)."""
    half = n // 2
    return [
        LpNorm(n, 1), LpNorm(n, 1.5), LpNorm(n, 2), LpNorm(n, 3), LpNorm(n, np.inf),
        TopKNorm(n, 3),
        OrderedNorm(np.linspace(2.0, 0.0, n)),
        LovaszNorm(CoverageFunction([[i, i + 1] for i in range(n)], [1.0] * (n + 1))),
        LovaszNorm(BudgetAdditiveFunction([1.0 + i for i in range(n)], budget=n)),
        LovaszNorm(ConcaveCardinalityFunction(n, 0.5)),
        MatroidRankNorm(PartitionMatroid(n, [range(half), range(half, n)], [1, 2])),
        PartialSumNorm(n, [(range(half), LpNorm(half, np.inf)), (range(half, n), LpNorm(n - half, 2))]),
        ConicalNorm([(0.5, LpNorm(n, 2)), (2.0, TopKNorm(n, 2))]),
        RescaledNorm(np.arange(1.0, n + 1.0), LpNorm(n, 2)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def star():
    """K_{1,100} with unit facility cost and the l-infinity connection norm."""
    return gen_star(100, f=1.0)


@pytest.fixture
def small_star():
    return gen_star(5, f=1.0)


@pytest.fixture
def write_json(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)
    return write
