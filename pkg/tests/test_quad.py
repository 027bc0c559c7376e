import math

import numpy as np
import pytest

from reset_search.quad import (DEFAULT_SETTINGS, NonConvergence, QuadSettings,
                               gaussian_truncation_point, integrate_finite,
                               integrate_semiinfinite, time_integral_12,
                               time_integral_32, time_integral_ratio)
from reset_search.specfun import gaussian_tail


def test_inverse_sqrt_singularity():
    res = integrate_finite(lambda t: t ** -0.5, 0.0, 1.0)
    assert res.value == pytest.approx(2.0, rel=1e-9)
    assert res.abs_error_estimate < 1e-8


def test_two_sided_singularity():
    res = integrate_finite(lambda t: (t * (1.0 - t)) ** -0.5, 0.0, 1.0)
    assert res.value == pytest.approx(math.pi, rel=1e-9)


def test_smooth_polynomial():
    res = integrate_finite(lambda t: 3.0 * t * t, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-12)


def test_rejects_bad_interval():
    with pytest.raises(ValueError):
        integrate_finite(lambda t: t, 1.0, 1.0)


def test_semiinfinite_gaussian():
    res = integrate_semiinfinite(lambda x: math.exp(-0.5 * x * x), 0.0)
    assert res.value == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-10)


def test_semiinfinite_shifted_gaussian_scale_hint():
    # integrand decays like exp(-(x/3)^2/2); without the hint the truncation
    # point would clip a non-negligible tail
    res = integrate_semiinfinite(lambda x: math.exp(-x * x / 18.0), 0.0,
                                 scale=3.0)
    assert res.value == pytest.approx(3.0 * math.sqrt(math.pi / 2.0), rel=1e-10)


def test_truncation_point_tail_bound():
    for tol in (1e-8, 1e-12):
        x = gaussian_truncation_point(tol)
        assert gaussian_tail(x) < tol
    assert gaussian_truncation_point(1e-12, scale=2.0) == pytest.approx(
        2.0 * gaussian_truncation_point(1e-12), rel=1e-12)


def test_nonconvergence_raised_on_budget_exhaustion():
    settings = QuadSettings(rel_tol=1e-12, abs_tol=1e-14, max_evaluations=200)
    with pytest.raises(NonConvergence):
        integrate_finite(lambda t: math.sin(500.0 / (t + 1e-3)), 0.0, 1.0,
                         settings)


@pytest.mark.parametrize("c", [0.125, 0.5, 2.0])
@pytest.mark.parametrize("T", [1.0, 5.0])
def test_time_integral_32_vs_quadrature(c, T):
    direct = integrate_finite(
        lambda t: t ** -1.5 * math.exp(-c / t), 0.0, T).value
    assert time_integral_32(c, T) == pytest.approx(direct, rel=1e-8)


@pytest.mark.parametrize("c", [0.125, 0.5, 2.0])
@pytest.mark.parametrize("T", [1.0, 5.0])
def test_time_integral_12_vs_quadrature(c, T):
    direct = integrate_finite(
        lambda t: t ** -0.5 * math.exp(-c / t), 0.0, T).value
    assert time_integral_12(c, T) == pytest.approx(direct, rel=1e-8)


@pytest.mark.parametrize("c,T", [(0.5, 1.0), (2.0, 5.0), (50.0, 1.0),
                                 (5000.0, 1.0)])
def test_time_integral_ratio_stable(c, T):
    ratio = time_integral_ratio(c, T)
    assert math.isfinite(ratio) and ratio > 0
    if c / T < 100.0:  # plain forms still representable
        assert ratio == pytest.approx(time_integral_12(c, T)
                                      / time_integral_32(c, T), rel=1e-10)


def test_first_passage_mass_reduction():
    # (a/sqrt(2 pi D)) * int_0^T t^{-3/2} e^{-a^2/(2Dt)} dt at a=D=T=1 equals
    # the reflection-principle mass 2*gaussian_tail(1) = erfc(1/sqrt(2))
    a = D = T = 1.0
    p = a / math.sqrt(2.0 * math.pi * D) * time_integral_32(a * a / (2 * D), T)
    assert p == pytest.approx(2.0 * gaussian_tail(1.0), rel=1e-12)
    assert p == pytest.approx(0.31731050786, rel=1e-9)


def test_semiinfinite_vs_composite_simpson():
    # independent fixed-grid oracle for the cubic-weight integrand used by
    # the 3D objective at s = 0.738
    s = 0.738
    f = lambda x: x ** 3 * math.exp(math.sqrt(s) * x - 0.5 * x * x)
    xs = np.linspace(0.0, 45.0, 180001)
    ys = np.array([f(x) for x in xs])
    from scipy.integrate import simpson
    oracle = simpson(ys, x=xs)
    root = math.sqrt(s)
    res = integrate_semiinfinite(
        lambda y: (y + root) ** 3 * math.exp(-0.5 * y * y), -root)
    assert res.value * math.exp(0.5 * s) == pytest.approx(oracle, rel=1e-8)
