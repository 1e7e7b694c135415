"""Basis families, design matrices, and subset enumeration."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesbasis.basis import (
    BasisFunction,
    BasisSet,
    build_design_matrix,
    enumerate_subsets,
    eval_basis,
    iter_subset_indices,
    legendre_value,
    subset_at,
    subset_count,
    total_degree_set,
)

# Explicit closed-form Legendre polynomials, the independent reference the
# recurrence is checked against.
_EXPLICIT_LEGENDRE = {
    0: lambda x: np.ones_like(x),
    1: lambda x: x,
    2: lambda x: (3 * x**2 - 1) / 2,
    3: lambda x: (5 * x**3 - 3 * x) / 2,
    4: lambda x: (35 * x**4 - 30 * x**2 + 3) / 8,
    5: lambda x: (63 * x**5 - 70 * x**3 + 15 * x) / 8,
}


class TestEvalBasis:
    def test_monomial_degree_zero_is_one(self):
        f = BasisFunction("monomial", (0, 0))
        for x in (-1.0, -0.3, 0.0, 0.7, 1.0):
            assert eval_basis(f, [x]) == 1.0

    def test_legendre_is_one_at_right_endpoint(self):
        for n in range(9):
            f = BasisFunction("legendre", (n, 0))
            assert eval_basis(f, [1.0]) == pytest.approx(1.0, abs=1e-14)

    def test_product_matches_explicit_expansion(self):
        # P_1(0.5) * P_3(-0.5) expanded by hand: 0.5 * (5*(-0.125)+1.5)/2
        f = BasisFunction("product", (1, 3), "legendre")
        expected = 0.5 * ((5 * (-0.5) ** 3 - 3 * (-0.5)) / 2)
        assert expected == 0.21875
        assert eval_basis(f, [0.5, -0.5]) == pytest.approx(expected, abs=1e-15)

    def test_recurrence_matches_explicit_polynomials(self):
        x = np.linspace(-1, 1, 101)
        for n, explicit in _EXPLICIT_LEGENDRE.items():
            np.testing.assert_allclose(legendre_value(n, x), explicit(x), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            eval_basis(BasisFunction("legendre", (2, 0)), [0.5, 0.5])
        with pytest.raises(ValueError, match="dimension"):
            eval_basis(BasisFunction("product", (1, 1)), [0.5])

    def test_negative_degree_rejected(self):
        with pytest.raises(ValueError):
            BasisFunction("monomial", (-1, 0))


class TestTotalDegreeSet:
    @pytest.mark.parametrize("q,expected", [(3, 10), (4, 15), (5, 21)])
    def test_bivariate_sizes(self, q, expected):
        assert len(total_degree_set(q, 2, "legendre")) == expected

    def test_bivariate_size_formula(self):
        for q in range(9):
            assert len(total_degree_set(q, 2)) == (q + 1) * (q + 2) // 2

    def test_univariate_sizes(self):
        for q in range(9):
            assert len(total_degree_set(q, 1)) == q + 1

    def test_q_zero_is_single_constant(self):
        s = total_degree_set(0, 1)
        assert len(s) == 1
        assert s[0].degrees == (0, 0)

    def test_graded_ordering(self):
        s = total_degree_set(2, 2, "monomial")
        assert [f.degrees for f in s] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        assert s.labels() == ["1", "x", "y", "x^2", "x*y", "y^2"]

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            total_degree_set(-1, 1)
        with pytest.raises(ValueError):
            total_degree_set(2, 3)
        with pytest.raises(ValueError):
            total_degree_set(2, 1, "chebyshev")


class TestBasisSet:
    def test_duplicates_rejected(self):
        f = BasisFunction("monomial", (1, 0))
        with pytest.raises(ValueError, match="duplicate"):
            BasisSet((f, f))

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(ValueError, match="dimensionality"):
            BasisSet((BasisFunction("monomial", (1, 0)), BasisFunction("product", (1, 1))))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            BasisSet(())


class TestDesignMatrix:
    def test_three_point_linear(self):
        d = build_design_matrix([0.1, 0.4, -0.9], total_degree_set(1, 1))
        np.testing.assert_array_equal(
            d.values, [[1.0, 0.1], [1.0, 0.4], [1.0, -0.9]]
        )

    def test_constant_column(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, 50)
        d = build_design_matrix(x, total_degree_set(5, 1))
        assert d.values.shape == (50, 6)
        np.testing.assert_array_equal(d.values[:, 0], np.ones(50))

    def test_legendre_column(self):
        d = build_design_matrix([-1.0, 0.0, 1.0], total_degree_set(2, 1, "legendre"))
        np.testing.assert_allclose(d.values[:, 2], [1.0, -0.5, 1.0], atol=1e-15)

    def test_subset_design_is_column_selection(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-1, 1, size=(20, 2))
        full = total_degree_set(3, 2, "legendre")
        full_design = build_design_matrix(pts, full)
        kept = (0, 2, 5, 7)
        sub_design = build_design_matrix(pts, full.subset(kept))
        np.testing.assert_array_equal(sub_design.values, full_design.values[:, kept])

    def test_underdetermined_flag(self):
        d = build_design_matrix([0.0, 0.5], total_degree_set(3, 1))
        assert d.underdetermined
        assert not build_design_matrix([0.0, 0.5, 0.9, -0.2, 0.4], total_degree_set(3, 1)).underdetermined

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            build_design_matrix(np.zeros((5, 2)), total_degree_set(2, 1))


class TestSubsetEnumeration:
    def test_paper_scale_count(self):
        assert subset_count(21, (14, 15, 16)) == 190893

    def test_full_size_yields_identity(self):
        full = total_degree_set(2, 1)
        subsets = list(enumerate_subsets(full, [3]))
        assert len(subsets) == 1
        assert subsets[0][0] == 0
        assert subsets[0][1].functions == full.functions

    def test_four_choose_two(self):
        full = total_degree_set(3, 1)
        subsets = list(enumerate_subsets(full, [2]))
        assert len(subsets) == math.comb(4, 2)
        brute = set(itertools.combinations(full.functions, 2))
        assert {s.functions for _, s in subsets} == brute

    def test_ordering_smallest_size_first_later_elements_omitted_first(self):
        seq = [(k, kept) for _, k, kept in iter_subset_indices(4, [3, 2])]
        # size 2 first, then size 3; the subset dropping the later columns leads
        assert seq[0] == (2, (0, 1))
        assert seq[1] == (2, (0, 2))
        assert seq[-1] == (3, (1, 2, 3))
        assert [k for k, _ in seq] == sorted(k for k, _ in seq)
        # within each size the omitted-index tuples run in decreasing
        # lexicographic order
        for k in (2, 3):
            omitted = [
                tuple(sorted(set(range(4)) - set(kept)))
                for kk, kept in seq if kk == k
            ]
            assert omitted == sorted(omitted, reverse=True)

    def test_each_subset_carries_sequence_index(self):
        full = total_degree_set(4, 1)
        for expected, (index, _sub) in enumerate(enumerate_subsets(full, [2, 4])):
            assert index == expected

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.sets(st.integers(1, 12), min_size=1, max_size=3))
    def test_count_matches_binomials(self, n, sizes):
        sizes = {s for s in sizes if s <= n}
        if not sizes:
            sizes = {n}
        produced = sum(1 for _ in iter_subset_indices(n, sorted(sizes)))
        assert produced == sum(math.comb(n, k) for k in sizes)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 10), st.data())
    def test_subset_at_matches_iteration(self, n, data):
        sizes = sorted(data.draw(st.sets(st.integers(1, n), min_size=1, max_size=2)))
        total = subset_count(n, sizes)
        index = data.draw(st.integers(0, total - 1))
        by_iter = next(
            (k, kept)
            for i, k, kept in iter_subset_indices(n, sizes)
            if i == index
        )
        assert subset_at(n, sizes, index) == by_iter

    def test_chunked_iteration_matches_full(self):
        full_seq = list(iter_subset_indices(6, [2, 4]))
        chunked = []
        for start in range(0, len(full_seq), 7):
            chunked.extend(iter_subset_indices(6, [2, 4], start, min(start + 7, len(full_seq))))
        assert chunked == full_seq

    def test_oversized_subset_rejected(self):
        with pytest.raises(ValueError, match="size"):
            list(enumerate_subsets(total_degree_set(2, 1), [5]))
