"""Adaptive quadrature, including the log-space front end."""

import math

import numpy as np
import pytest

from bayesbasis.quad import QuadratureError, integrate, integrate_log

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def test_polynomial_is_exact():
    value, err = integrate(lambda x: x**4, 0.0, 2.0)
    assert value == pytest.approx(32 / 5, rel=1e-14)


def test_standard_gaussian():
    value, _ = integrate(lambda x: np.exp(-0.5 * x**2), -40.0, 40.0, rel_tol=1e-12)
    assert value == pytest.approx(math.sqrt(2 * math.pi), rel=1e-11)


def test_log_space_gaussian():
    log_value, rel_err = integrate_log(lambda u: -0.5 * u**2, -40.0, 40.0)
    assert log_value == pytest.approx(_LOG_SQRT_2PI, abs=1e-10)
    assert rel_err < 1e-9


def test_huge_negative_offset_is_harmless():
    # exp(-5000) underflows; the log result must still be exact.
    log_value, _ = integrate_log(lambda u: -5000.0 - 0.5 * u**2, -40.0, 40.0)
    assert log_value == pytest.approx(-5000.0 + _LOG_SQRT_2PI, abs=1e-9)


def test_narrow_peak_inside_wide_window():
    # width 1e-3 peak off center in a window of width 80; a single starting
    # panel would integrate this to zero.
    width = 1e-3
    log_value, _ = integrate_log(
        lambda u: -0.5 * ((u - 3.2) / width) ** 2, -40.0, 40.0
    )
    assert log_value == pytest.approx(math.log(width) + _LOG_SQRT_2PI, abs=1e-8)


def test_vanishing_integrand():
    log_value, err = integrate_log(lambda u: np.full_like(u, -math.inf), 0.0, 1.0)
    assert log_value == -math.inf
    assert err == 0.0


def test_breakpoints_do_not_change_value():
    f = lambda x: np.exp(-0.5 * x**2)
    v1, _ = integrate(f, -10.0, 10.0, rel_tol=1e-12)
    v2, _ = integrate(f, -10.0, 10.0, rel_tol=1e-12, breakpoints=np.linspace(-9, 9, 37))
    assert v1 == pytest.approx(v2, rel=1e-11)


def test_unreachable_tolerance_raises():
    rng = np.random.default_rng(0)

    def noisy(x):
        # deterministic high-frequency noise; not integrable to 1e-14 in a
        # handful of panels
        return np.sin(1e6 * x) * np.cos(7.7e5 * x + 1.0)

    with pytest.raises(QuadratureError, match="no convergence"):
        integrate(noisy, 0.0, 1.0, rel_tol=1e-14, max_subdivisions=8)
