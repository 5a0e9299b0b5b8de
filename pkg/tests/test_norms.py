import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import submodular_norms
from submodnorms.matroids import (ConcaveCardinalityFunction, GraphicMatroid, TableFunction,
                                  UniformMatroid)
from submodnorms.norms import (LovaszNorm, LpNorm, MatroidRankNorm, MaxLinearNorm, OrderedNorm,
                               RestrictedNorm, TopKNorm, conical_norm, evaluate, lp_norm, marginal,
                               max_linear_norm, norm_from_descriptor, partial_sum_norm, rescaled_norm,
                               restricted_norm, rho, symmetric_max_norm, top_k_norm,
                               value_oracle_norm)
from submodnorms.utils import ValidationError, close

N = 6
NORMS = submodular_norms(N)

vectors = st.lists(st.floats(min_value=0, max_value=100, allow_nan=False, allow_infinity=False),
                   min_size=N, max_size=N).map(np.array)
scalars = st.floats(min_value=0, max_value=10, allow_nan=False, allow_infinity=False)


class TestEvaluate:
    def test_top_k(self):
        assert evaluate(top_k_norm(3, 2), [3, 1, 2]) == 5

    def test_l_infinity_of_ones(self):
        assert evaluate(lp_norm(7, "inf"), np.ones(7)) == 1

    def test_ordered(self):
        assert evaluate(OrderedNorm([2, 1, 0]), [1, 3, 2]) == 8

    def test_matroid_rank_of_uniform_matroid_is_top_k(self):
        norm = MatroidRankNorm(UniformMatroid(3, 2))
        assert evaluate(norm, [3, 1, 2]) == 5

    def test_matroid_rank_matches_top_k_on_random_vectors(self, rng):
        norm = MatroidRankNorm(UniformMatroid(8, 3))
        top3 = TopKNorm(8, 3)
        for _ in range(50):
            x = rng.random(8)
            assert norm(x) == pytest.approx(top3(x), abs=1e-12)

    def test_graphic_matroid_norm_skips_cycles(self):
        # Triangle 0-1-2: any two edges form a spanning tree.
        norm = MatroidRankNorm(GraphicMatroid([(0, 1), (1, 2), (0, 2)]))
        assert norm([5, 4, 3]) == 9

    def test_lovasz_of_cardinality_is_l1(self, rng):
        norm = LovaszNorm(ConcaveCardinalityFunction(5, 1.0))
        x = rng.random(5)
        assert norm(x) == pytest.approx(x.sum())

    def test_lovasz_requires_zero_on_empty_set(self):
        with pytest.raises(ValidationError):
            LovaszNorm(TableFunction([1.0, 2.0]))

    def test_lovasz_table_is_unchecked_by_default(self):
        assert LovaszNorm(TableFunction([0.0, 1.0, 1.0, 3.0]))([1.0, 1.0]) == 3.0

    @pytest.mark.parametrize("values, message", [
        ([0.0, 2.0, 1.0, 1.0], "not monotone"),
        ([0.0, 1.0, 1.0, 3.0], "not submodular"),
    ])
    def test_lovasz_check_rejects_bad_tables(self, values, message):
        with pytest.raises(ValidationError, match=message):
            LovaszNorm(TableFunction(values), check=True)
        with pytest.raises(ValidationError, match=message):
            norm_from_descriptor({"kind": "lovasz", "n": 2,
                                  "set_function": {"type": "table", "values": values}})

    def test_lovasz_check_accepts_submodular_functions(self):
        LovaszNorm(TableFunction([0.0, 1.0, 1.0, 1.5]), check=True)
        LovaszNorm(ConcaveCardinalityFunction(4, 0.5), check=True)
        assert norm_from_descriptor({"kind": "lovasz", "n": 2, "set_function": {
            "type": "table", "values": [0.0, 1.0, 1.0, 1.5]}})([1.0, 1.0]) == 1.5

    def test_restricted_pads_with_zeros(self):
        inner = TopKNorm(5, 2)
        norm = restricted_norm(3, inner)
        assert isinstance(norm, RestrictedNorm)
        assert norm([1, 4, 2]) == 6
        assert restricted_norm(5, inner) is inner

    def test_zero_vector(self):
        for norm in NORMS:
            assert norm(np.zeros(N)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="dimension"):
            evaluate(lp_norm(3, 2), [1, 2])

    def test_negative_entry(self):
        with pytest.raises(ValidationError, match="non-negative"):
            evaluate(lp_norm(3, 2), [1, -2, 0])

    def test_ordered_weights_must_descend(self):
        with pytest.raises(ValidationError, match="descending"):
            OrderedNorm([1, 2, 0])

    def test_top_k_edge_cases_normalize(self):
        assert isinstance(top_k_norm(5, 5), LpNorm) and top_k_norm(5, 5).p == 1
        assert isinstance(top_k_norm(5, 1), LpNorm) and np.isinf(top_k_norm(5, 1).p)
        with pytest.raises(ValidationError):
            top_k_norm(5, 6)

    def test_partial_sum_must_cover(self):
        with pytest.raises(ValidationError, match="cover"):
            partial_sum_norm(4, [([0, 1], lp_norm(2, 1))])

    def test_conical_dimensions_must_agree(self):
        with pytest.raises(ValidationError, match="mismatched"):
            conical_norm([(1.0, lp_norm(3, 1)), (1.0, lp_norm(4, 1))])


class TestMarginal:
    def test_l1(self):
        assert marginal(lp_norm(3, 1), [5, 0, 0], 2, 3) == 3

    def test_l_infinity(self):
        assert marginal(lp_norm(3, "inf"), [5, 0, 0], 2, 3) == 0

    def test_top_2(self):
        assert marginal(top_k_norm(4, 2), [4, 2, 0, 0], 3, 3) == 1

    def test_base_must_vanish_from_i(self):
        with pytest.raises(ValidationError, match="zero"):
            marginal(lp_norm(3, 1), [5, 1, 0], 1, 3)

    def test_index_out_of_range(self):
        with pytest.raises(ValidationError, match="out of range"):
            marginal(lp_norm(3, 1), [0, 0, 0], 3, 1)

    @given(vectors, st.integers(min_value=0, max_value=N - 1), scalars)
    @settings(max_examples=200, deadline=None)
    def test_marginal_bounded_by_unit_vector(self, x, i, z):
        base = x.copy()
        base[i:] = 0.0
        e = np.zeros(N)
        e[i] = z
        for norm in NORMS:
            value = marginal(norm, base, i, z)
            assert 0 <= value <= norm(e) + 1e-9 * max(1.0, norm(e))


class TestRho:
    @pytest.mark.parametrize("p", [1, 2, 4, "inf"])
    def test_lp(self, p):
        expected = 1.0 if p == "inf" else 16 ** (1 / p)
        assert rho(lp_norm(16, p)) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 5, 7, 20])
    def test_top_k(self, k):
        assert rho(top_k_norm(20, k)) == pytest.approx(k, abs=1e-12)

    def test_l1_n9(self):
        assert rho(lp_norm(9, 1)) == 9

    def test_symmetric_norms_at_most_n(self):
        for norm in (lp_norm(8, 3), top_k_norm(8, 3), OrderedNorm([3, 2, 2, 1, 1, 0, 0, 0])):
            assert 1 <= rho(norm) <= 8

    def test_degenerate_norm(self):
        with pytest.raises(ValidationError, match="Degenerate"):
            rho(MaxLinearNorm([[1.0, 0.0]]))


class TestNormAxioms:
    @given(vectors, scalars)
    @settings(max_examples=200, deadline=None)
    def test_homogeneity(self, x, c):
        for norm in NORMS:
            assert close(norm(c * x), c * norm(x))

    @given(vectors, vectors)
    @settings(max_examples=200, deadline=None)
    def test_triangle(self, x, y):
        for norm in NORMS:
            assert norm(x + y) <= norm(x) + norm(y) + 1e-9 * (norm(x) + norm(y)) + 1e-12

    @given(vectors, vectors)
    @settings(max_examples=200, deadline=None)
    def test_monotone(self, x, d):
        for norm in NORMS:
            assert norm(x) <= norm(x + d) + 1e-9 * norm(x + d) + 1e-12


class TestDescriptors:
    def test_nested_descriptor(self, rng):
        descriptor = {
            "kind": "conical",
            "terms": [
                {"coefficient": 0.5, "norm": {"kind": "lp", "n": 4, "p": 2}},
                {"coefficient": 1.0, "norm": {
                    "kind": "partial_sum", "n": 4,
                    "parts": [{"indices": [0, 1], "norm": {"kind": "top_k", "n": 2, "k": 1}},
                              {"indices": [2, 3], "norm": {"kind": "lp", "n": 2, "p": 1}}]}},
            ],
        }
        norm = norm_from_descriptor(descriptor)
        x = rng.random(4)
        expected = 0.5 * np.linalg.norm(x) + max(x[0], x[1]) + x[2] + x[3]
        assert norm(x) == pytest.approx(expected)
        assert norm_from_descriptor(norm.descriptor())(x) == pytest.approx(expected)

    def test_lovasz_descriptor(self):
        descriptor = {"kind": "lovasz", "n": 3,
                      "set_function": {"type": "coverage", "sets": [[0], [0, 1], [2]],
                                       "weights": [1, 2, 4]}}
        norm = norm_from_descriptor(descriptor)
        # Level sets {1}, {1, 0}, {1, 0, 2}: 1 * 3 + 1 * 3 + 1 * 7.
        assert norm([2, 3, 1]) == pytest.approx(13)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="Invalid norm descriptor"):
            norm_from_descriptor({"kind": "bogus", "n": 3})

    def test_missing_parameter(self):
        with pytest.raises(ValidationError):
            norm_from_descriptor({"kind": "lp", "n": 3})

    def test_value_oracle_has_no_descriptor(self):
        norm = value_oracle_norm(3, lambda x: float(x.sum()))
        assert norm([1, 2, 3]) == 6
        with pytest.raises(ValidationError, match="no JSON descriptor"):
            norm.descriptor()


class TestConstructors:
    def test_symmetric_max(self):
        norm = symmetric_max_norm([[1, 0, 0], [0.5, 0.5, 0.5]])
        assert norm.symmetric
        assert norm([0, 3, 0]) == 3
        assert norm([1, 1, 1]) == 1.5
        with pytest.raises(ValidationError):
            symmetric_max_norm([[0, 1, 0]])

    def test_max_linear(self):
        norm = max_linear_norm([[1, 1, 0], [0, 0, 2]])
        assert not norm.symmetric
        assert norm([1, 2, 1]) == 3
        with pytest.raises(ValidationError, match="non-negative"):
            max_linear_norm([[1, -1]])

    def test_rescaled(self):
        norm = rescaled_norm([2, 1, 1], lp_norm(3, "inf"))
        assert norm([1, 1.5, 0]) == 2
        assert not norm.symmetric
        assert rescaled_norm([3, 3, 3], lp_norm(3, 1)).symmetric
        with pytest.raises(ValidationError, match="strictly positive"):
            rescaled_norm([1, 0, 1], lp_norm(3, 1))
