import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frozen import FROZEN
from kacsim.cross_section import (
    CrossSection, compute_coefficients, integrate_kernel, power_law_rate, quartic_defect, sample_theta,
    truncated_cdf,
)
from kacsim.errors import DomainError

NUS = (0.25, 0.5, 1.0, 1.5, 1.9)
EPSS = (0.01, 0.1, 0.5)
FIELDS = ("lambda_eps", "b_eps", "d_eps", "c_eps", "gamma_eps", "m4_decay_c")


@pytest.mark.parametrize("nu", NUS)
@pytest.mark.parametrize("eps", EPSS)
def test_coefficients_match_series_oracle(nu, eps):
    co = compute_coefficients(CrossSection.power_law(nu), eps)
    expected = FROZEN[f"coeffs_{nu}_{eps}"]
    for name, want in zip(FIELDS, expected):
        assert getattr(co, name) == pytest.approx(want, rel=1e-9), name


@pytest.mark.parametrize("nu", NUS)
@pytest.mark.parametrize("eps", EPSS)
def test_coefficient_invariants(nu, eps):
    cs = CrossSection.power_law(nu)
    co = compute_coefficients(cs, eps)
    assert co.c_eps == 2 * co.b_eps + co.d_eps
    assert co.gamma_eps <= co.b_eps * eps**2 / 2
    assert co.c_eps >= co.d_eps
    quad_rate = 2 * integrate_kernel(cs, lambda x: np.ones_like(x), eps, math.pi)
    assert quad_rate == pytest.approx(co.lambda_eps, rel=1e-9)
    second = 2 * integrate_kernel(cs, lambda x: x * x, 0.0, eps)
    assert co.b_eps >= second / 4
    assert min(getattr(co, f) for f in FIELDS) >= 0


@pytest.mark.parametrize("nu", NUS)
def test_m4_constant_two_integrands_agree(nu):
    cs = CrossSection.power_law(nu)
    # Both forms are free of the cancellation in 1 - cos**4 - sin**4 near 0.
    direct = 2 * integrate_kernel(cs, lambda x: 2 * (np.sin(x) * np.cos(x)) ** 2, 0.0, math.pi)
    via_double_angle = 2 * integrate_kernel(cs, lambda x: 0.5 * np.sin(2 * x) ** 2, 0.0, math.pi)
    assert direct == pytest.approx(via_double_angle, rel=1e-10)
    assert compute_coefficients(cs, 0.1).m4_decay_c == pytest.approx(via_double_angle, rel=1e-10)


def test_monotone_in_eps():
    cs = CrossSection.power_law(1.2)
    grid = [0.01, 0.03, 0.1, 0.3, 1.0, 2.0]
    co = [compute_coefficients(cs, e) for e in grid]
    assert all(a.lambda_eps > b.lambda_eps for a, b in zip(co, co[1:]))
    assert all(a.b_eps < b.b_eps for a, b in zip(co, co[1:]))


def test_reference_values():
    cs = CrossSection.power_law(0.5)
    assert compute_coefficients(cs, math.pi).lambda_eps == 0.0
    assert compute_coefficients(cs, 0.1).lambda_eps == pytest.approx(10.3923524, rel=1e-8)
    assert compute_coefficients(cs, 0.1).b_eps == pytest.approx(0.02108, rel=1e-3)
    assert integrate_kernel(cs, lambda x: np.ones_like(x), 0.1, math.pi) == pytest.approx(5.1961762, rel=1e-7)
    assert integrate_kernel(CrossSection.power_law(1.0), lambda x: x * x, 0.0, math.pi) == pytest.approx(math.pi, rel=1e-12)
    assert integrate_kernel(cs, lambda x: np.zeros_like(x), 0.0, math.pi) == 0.0
    assert compute_coefficients(CrossSection.uniform_grazing(), 0.1).lambda_eps == pytest.approx(300.0)


def test_uniform_grazing_moments():
    cs = CrossSection.uniform_grazing()
    for eps in (0.05, 0.2, 0.4, 1.0):
        second = 2 * integrate_kernel(cs, lambda x: x**2, 0.0, math.pi, eps=eps)
        fourth = 2 * integrate_kernel(cs, lambda x: x**4, 0.0, math.pi, eps=eps)
        mass = 2 * integrate_kernel(cs, lambda x: np.ones_like(x), 0.0, math.pi, eps=eps)
        assert second == pytest.approx(1.0, rel=1e-12)
        assert fourth == pytest.approx(0.6 * eps**2, rel=1e-12)
        assert mass == pytest.approx(compute_coefficients(cs, eps).lambda_eps, rel=1e-12)
    assert 2 * integrate_kernel(cs, lambda x: x**4, 0.0, math.pi, eps=0.2) == pytest.approx(0.024)
    co = compute_coefficients(cs, 0.2)
    assert co.b_eps == 0.0 and co.gamma_eps == 0.0 and co.c_eps == co.d_eps


def test_kernel_is_even():
    theta = np.linspace(-math.pi, math.pi, 101)
    for cs, eps in ((CrossSection.power_law(0.7), None), (CrossSection.uniform_grazing(), 0.3)):
        assert np.array_equal(cs.density(theta, eps), cs.density(-theta, eps))


@pytest.mark.parametrize("nu", NUS)
def test_power_law_second_moment_finite(nu):
    val = 2 * integrate_kernel(CrossSection.power_law(nu), lambda x: x * x, 0.0, math.pi)
    assert val == pytest.approx(2 * math.pi ** (2 - nu) / (2 - nu), rel=1e-10)


def test_sample_theta_examples():
    cs = CrossSection.power_law(0.5)
    assert sample_theta(cs, 0.1, 0.0, 1) == pytest.approx(0.1, rel=1e-15)
    assert sample_theta(cs, 0.1, 1.0, 1) == pytest.approx(math.pi, rel=1e-14)
    assert sample_theta(cs, 0.1, 0.5, 1) == pytest.approx(FROZEN["theta_0.5_0.1_0.5"], rel=1e-13)
    assert sample_theta(cs, 0.1, 0.5, -1) == -sample_theta(cs, 0.1, 0.5, 1)
    assert sample_theta(CrossSection.power_law(1.5), 0.03, 0.9, 1) == pytest.approx(FROZEN["theta_1.5_0.03_0.9"], rel=1e-13)
    assert sample_theta(CrossSection.uniform_grazing(), 0.2, 0.25, -1) == pytest.approx(-0.05)


@pytest.mark.parametrize("nu", NUS)
def test_sample_theta_inverts_cdf(nu):
    cs = CrossSection.power_law(nu)
    u = np.random.default_rng(3).random(1000)
    for eps in EPSS:
        mags = np.array([sample_theta(cs, eps, x, 1) for x in u])
        assert np.all((mags >= eps * (1 - 1e-15)) & (mags <= math.pi * (1 + 1e-15)))
        assert np.max(np.abs(truncated_cdf(cs, eps, mags) - u)) <= 1e-12


def test_domain_errors():
    with pytest.raises(DomainError):
        CrossSection.power_law(2.0)
    with pytest.raises(DomainError):
        CrossSection.power_law(0.0)
    with pytest.raises(DomainError):
        compute_coefficients(CrossSection.power_law(1.0), 0.0)
    with pytest.raises(DomainError):
        compute_coefficients(CrossSection.power_law(1.0), 4.0)
    with pytest.raises(DomainError):
        integrate_kernel(CrossSection.power_law(1.0), np.cos, 1.0, 0.5)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(0.05, 1.95), eps=st.floats(0.005, 3.0))
def test_closed_form_rate_matches_quadrature_property(nu, eps):
    cs = CrossSection.power_law(nu)
    quad = 2 * integrate_kernel(cs, lambda x: np.ones_like(x), eps, math.pi)
    assert quad == pytest.approx(power_law_rate(nu, eps), rel=1e-9, abs=1e-12)


def test_quartic_defect_identity():
    x = np.linspace(-3, 3, 61)
    assert np.allclose(quartic_defect(x), 1 - np.cos(x) ** 4 - np.sin(x) ** 4, atol=1e-15)
