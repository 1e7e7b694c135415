"""Least-squares fitting and its statistics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesbasis.basis import BasisSet, BasisFunction, build_design_matrix, total_degree_set
from bayesbasis.data import simulate
from bayesbasis.regression import RankDeficiencyError, fit


def _random_instance(seed, n=30, l=4):
    rng = np.random.default_rng(seed)
    w = build_design_matrix(rng.uniform(-1, 1, n), total_degree_set(l - 1, 1))
    y = rng.normal(size=n)
    return w, y


class TestFitExamples:
    def test_exact_representation_has_zero_residuals(self):
        rng = np.random.default_rng(3)
        design = build_design_matrix(rng.uniform(-1, 1, 25), total_degree_set(3, 1))
        y = design.values @ np.array([0.5, -1.0, 2.0, 0.25])
        res = fit(design, y)
        np.testing.assert_allclose(res.residuals, 0.0, atol=1e-12)
        assert res.chi_eps2 < 1e-24

    def test_hand_solved_line(self):
        # x in {-1, 0, 1}, basis {1, x}, y = (1, 2, 3): normal equations give
        # intercept 2 and slope 1 exactly.
        design = build_design_matrix([-1.0, 0.0, 1.0], total_degree_set(1, 1))
        res = fit(design, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(res.a_hat, [2.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(res.residuals, 0.0, atol=1e-14)

    def test_residual_power_band_quintic_with_noise(self):
        # chi_eps2/N concentrates near sigma^2 (N-l)/N = 0.1408; the band
        # [0.08, 0.28] is ~4 standard deviations wide for chi-square(44).
        basis = total_degree_set(5, 1)
        for seed in range(50):
            sample = simulate(seed=seed, n=50, sigma=0.4)
            res = fit(build_design_matrix(sample.points, basis), sample.y)
            assert 0.08 <= res.chi_eps2 / 50 <= 0.28


class TestFitInvariants:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_pythagorean_split(self, seed):
        w, y = _random_instance(seed)
        res = fit(w, y)
        assert abs(float(y @ y) - (res.chi_y2 + res.chi_eps2)) <= 1e-9 * float(y @ y)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_projection_statistics(self, seed):
        w, y = _random_instance(seed)
        res = fit(w, y)
        y_norm2 = float(y @ y)
        assert res.y_dot_e > 0
        assert abs(float(res.y_hat @ res.residuals)) <= 1e-9 * y_norm2
        assert abs(res.y_dot_e - res.chi_eps2) <= 1e-9 * y_norm2

    def test_nesting_never_increases_residual_power(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(-1, 1, 40)
        y = rng.normal(size=40)
        previous = np.inf
        for q in range(8):
            res = fit(build_design_matrix(x, total_degree_set(q, 1)), y)
            assert res.chi_eps2 <= previous + 1e-12
            previous = res.chi_eps2

    @pytest.mark.parametrize("lam", [0.5, 3.0])
    def test_scale_equivariance(self, lam):
        w, y = _random_instance(99)
        base = fit(w, y)
        scaled = fit(w, lam * y)
        np.testing.assert_allclose(scaled.a_hat, lam * base.a_hat, rtol=1e-10)
        assert scaled.chi_y2 == pytest.approx(lam**2 * base.chi_y2, rel=1e-10)
        assert scaled.chi_eps2 == pytest.approx(lam**2 * base.chi_eps2, rel=1e-10)
        assert scaled.y_dot_e == pytest.approx(lam**2 * base.y_dot_e, rel=1e-10)

    def test_column_permutation_permutes_coefficients(self):
        rng = np.random.default_rng(21)
        pts = rng.uniform(-1, 1, 30)
        full = total_degree_set(4, 1, "legendre")
        y = rng.normal(size=30)
        base = fit(build_design_matrix(pts, full), y)
        perm = (3, 0, 4, 1, 2)
        permuted = fit(build_design_matrix(pts, full.subset(perm)), y)
        np.testing.assert_allclose(permuted.a_hat, base.a_hat[list(perm)], rtol=1e-9)
        np.testing.assert_allclose(permuted.y_hat, base.y_hat, atol=1e-10)
        np.testing.assert_allclose(permuted.residuals, base.residuals, atol=1e-10)


class TestFitErrors:
    def test_rank_deficiency_names_columns(self):
        # x and P1(x) are the same column in disguise
        funcs = (
            BasisFunction("monomial", (0, 0)),
            BasisFunction("monomial", (1, 0)),
            BasisFunction("legendre", (1, 0)),
        )
        design = build_design_matrix(np.linspace(-1, 1, 10), BasisSet(funcs))
        with pytest.raises(RankDeficiencyError) as err:
            fit(design, np.ones(10))
        assert "x" in str(err.value)
        assert "P1(x)" in err.value.columns

    def test_underdetermined_rejected(self):
        design = build_design_matrix([0.0, 0.5, 1.0], total_degree_set(3, 1))
        with pytest.raises(ValueError, match="N=3, l=4"):
            fit(design, np.ones(3))

    def test_shape_mismatch(self):
        design = build_design_matrix([0.0, 0.5, 1.0], total_degree_set(1, 1))
        with pytest.raises(ValueError, match="shape"):
            fit(design, np.ones(4))

    def test_rank_and_condition_reported(self):
        w, y = _random_instance(5)
        res = fit(w, y)
        assert res.rank == w.n_cols
        assert res.condition_estimate >= 1.0
