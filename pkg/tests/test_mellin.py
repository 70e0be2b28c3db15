import math
import pytest
import sys
import os

import numpy as np
from scipy.special import gamma, gammaln, k0

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.errors import DivergenceError, GrowthError, ParameterError
from modules.mellin import (
    MellinStrip,
    OmegaFunction,
    classify_period_set,
    convolution_envelope,
    convolution_identity_check,
    gamma_quotient_check,
    gamma_quotient_kernel,
    log_bump,
    mellin_convolve,
    mellin_transform,
    omega,
    partial_fraction_kernel,
    period_deviations,
    period_scan,
    vanishing_moment_test,
)
from modules.space_core import SpaceParams, moment
from modules.symbols import constant, parse_symbol, radial_exponential, radial_power


def _decay(x):
    return math.exp(-x)


def _unit_interval(x):
    return 1.0 if x <= 1.0 else 0.0


# --- Mellin transform and convolution ---

def test_mellin_transform_examples():
    assert abs(mellin_transform(_decay, 3.0) - 2.0) < 1e-12
    assert abs(mellin_transform(_decay, 0.5) - math.sqrt(math.pi)) < 1e-10
    assert abs(mellin_transform(_unit_interval, 2.0, breakpoints=(1.0,)) - 0.5) < 1e-12


def test_mellin_transform_of_radial_weight_gives_moment():
    # ∫ r^{2k} dμ = (2/Γ((1+s)/m)) m ∫ r^{2k+2s+1} e^{-r^{2m}} dr on C^1
    p = SpaceParams(1, 2.0, 1.0, 0.5)
    m, s = p.m, p.s

    def weight(r):
        return 2.0 * m / gamma((1 + s) / m) * math.exp(-r ** (2 * m))

    for k in (0, 1, 3):
        value = mellin_transform(weight, 2 * k + 2 * s + 2, exponent=2 * m).real
        assert abs(value - moment(p, [k])) < 1e-9 * moment(p, [k])


def test_mellin_strip():
    strip = MellinStrip(0.0)
    assert strip.contains(1 + 5j)
    assert not strip.contains(-0.5)
    with pytest.raises(DivergenceError):
        mellin_transform(_decay, -1.0, strip=strip)
    with pytest.raises(ParameterError):
        MellinStrip(1.0, 1.0)


def test_convolution_examples():
    value = mellin_convolve(_unit_interval, _unit_interval, 0.5, (1.0,), (1.0,))
    assert abs(value - math.log(2.0)) < 1e-10
    assert abs(mellin_convolve(_unit_interval, _unit_interval, 2.0, (1.0,), (1.0,))) < 1e-12
    # ∫ e^{-y} e^{-x/y} dy/y = 2 K_0(2 sqrt(x))
    expected = 2.0 * k0(2.0 * math.sqrt(2.0))
    assert abs(mellin_convolve(_decay, _decay, 2.0) - expected) < 1e-9 * expected
    with pytest.raises(ParameterError):
        mellin_convolve(_decay, _decay, 0.0)


def test_convolution_is_multiplicative_under_mellin():
    # (χ * χ)(x) = -ln x on (0, 1), and M[χ](ζ) = 1/ζ
    check = convolution_identity_check(_unit_interval, _unit_interval, 2.0, (1.0,), (1.0,))
    assert abs(check["product_of_transforms"] - 0.25) < 1e-12
    assert check["relative_error"] < 1e-6


def test_log_bump_approximates_identity():
    bump = log_bump(0.02)
    cuts = (math.exp(-0.2), math.exp(0.2))
    value = mellin_convolve(_decay, bump, 1.0, f_breakpoints=cuts)
    assert abs(value - math.exp(-1.0)) < 1e-4
    # unit mass for dy/y
    assert abs(mellin_transform(bump, 0.0, breakpoints=cuts) - 1.0) < 1e-9
    with pytest.raises(ParameterError):
        log_bump(0.0)


def test_convolution_envelope_stays_bounded():
    # (e^{-x^2} * e^{-x^2})(x) = K_0(2x)
    xs = [0.5, 1.0, 2.0, 4.0]
    envelope = convolution_envelope(lambda x: 1.0, lambda x: 1.0, 1.0, xs)
    for x, value in zip(xs, envelope):
        expected = k0(2.0 * x) * math.exp(x)
        assert abs(value - expected) < 1e-8 * expected
    assert np.all(np.abs(envelope) < 1.0)


# --- Omega ---

def test_omega_of_constant_is_one():
    p = SpaceParams(2, 1.5, 2.0, 0.5)
    one = constant(1.0, 2)
    for zeta in (0.0, 3.5, 20.0, 2.0 + 4.0j):
        assert abs(omega(one, zeta, p) - 1.0) < 1e-13
    assert abs(omega(one, 2.0, p, use_closed_form=False) - 1.0) < 1e-9


def test_omega_of_r_squared():
    p = SpaceParams(1, 2.0, 1.0, 0.5)
    f = radial_power(2, 1)
    for zeta in (0.0, 1.0, 3.5):
        expected = gamma((p.d + p.s + zeta + 1) / p.m) / gamma((p.d + p.s + zeta) / p.m)
        assert abs(omega(f, zeta, p) - expected) < 1e-12 * expected
        assert abs(omega(f, zeta, p, use_closed_form=False) - expected) < 1e-8 * expected


def test_omega_scales_with_alpha():
    p = SpaceParams(1, 1.0, 3.0, 0.0)
    # Ω(r^2, ζ) = (1 + ζ)/α for the Gaussian measure
    assert abs(omega(radial_power(2, 1), 2.0, p) - 1.0) < 1e-13


@pytest.mark.parametrize("rate", [0.2, 0.3 + 0.1j])
def test_omega_of_exponential(rate):
    p = SpaceParams(1, 2.0, 1.0, 0.5)
    f = radial_exponential(rate, p)
    for zeta in (0.0, 1.5, 4.0 + 1.0j):
        a = (p.d + p.s + zeta) / p.m
        expected = complex(np.exp(-a * np.log(1.0 - rate)))
        closed = omega(f, zeta, p)
        assert abs(closed - expected) < 1e-12 * abs(expected)
        numeric = omega(f, zeta, p, use_closed_form=False)
        assert abs(numeric - closed) < 1e-8 * abs(closed)


def _omega_power(p, k, zeta):
    # Ω(r^{2k}, ζ) = Γ(a + k/m) / Γ(a) at α = 1
    a = (p.d + p.s + zeta) / p.m
    return math.exp(gammaln(a + k / p.m) - gammaln(a))


@pytest.mark.parametrize("m,s", [(1.0, 0.0), (1.5, 0.5), (2.0, 0.5)])
def test_omega_of_polynomial_symbols(m, s):
    p = SpaceParams(1, m, 1.0, s)
    for zeta in (0.0, 5.0, 9.0, 10.0, 15.0, 17.0, 20.0):
        one, two = _omega_power(p, 1, zeta), _omega_power(p, 2, zeta)
        cases = {"1 + r^2": 1.0 + one, "r^2 + r^4": one + two, "r^2 - 1": one - 1.0,
                 "1 + z1*conj(z1)": 1.0 + one}
        for text, expected in cases.items():
            f = parse_symbol(text, 1)
            scale = max(abs(expected), 1.0)
            assert abs(omega(f, zeta, p) - expected) < 1e-10 * scale
            assert abs(omega(f, zeta, p, use_closed_form=False) - expected) < 1e-7 * scale


def test_omega_of_profile_without_closed_form():
    # 1/(1 + r^2) has no finite expansion; compare with the series-free Gaussian formula
    p = SpaceParams(1)
    f = parse_symbol("1/(1 + r^2)", 1)
    assert f.closed_terms is None
    for zeta in (0.0, 10.0, 20.0):
        # Ω = ∫ t^ζ e^{-t} / (1 + t) dt / Γ(ζ + 1), bounded by 1 and decreasing in ζ
        value = omega(f, zeta, p)
        assert 0.0 < value.real < 1.0 and abs(value.imag) < 1e-14
    assert abs(omega(f, 0.0, p) - 0.5963473623231940) < 1e-9


def test_omega_errors():
    p = SpaceParams(1)
    with pytest.raises(GrowthError):
        omega(parse_symbol("exp(r^2)", 1), 0.0, p)
    with pytest.raises(GrowthError):
        omega(parse_symbol("exp(r^2)", 1), 0.0, p, use_closed_form=False)
    with pytest.raises(ParameterError):
        omega(parse_symbol("z1", 1), 0.0, p)
    with pytest.raises(ParameterError):
        omega(constant(1.0, 1), -1.5, p)


def test_omega_function_cache():
    p = SpaceParams(1, 1.5)
    f = radial_power(2, 1)
    table = OmegaFunction(f, p)
    first = table(1.0)
    assert table(1.0) == first
    assert table.cache_size == 1
    assert table.eigenvalue([3]) == omega(f, 3.0, p)
    assert table.cache_size == 2


# --- Gamma quotient kernel ---

@pytest.mark.parametrize("a,b,m", [(1.0, 2.0, 1.0), (1.0, 3.0, 2.0), (2.0, 5.0, 1.5)])
def test_gamma_quotient_kernel(a, b, m):
    for z in (0.5, 1.0, 2.0, 4.0):
        check = gamma_quotient_check(a, b, m, z)
        assert check["relative_error"] < 1e-8
    values = gamma_quotient_kernel(a, b, m, np.linspace(0.0, 2.0, 41))
    assert np.all(values >= 0.0)
    assert gamma_quotient_kernel(a, b, m, 1.5) == 0.0


def test_gamma_quotient_kernel_validation():
    with pytest.raises(ParameterError):
        gamma_quotient_kernel(2.0, 1.0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        gamma_quotient_kernel(1.0, 2.0, 0.5, 0.5)


# --- Vanishing moments ---

def test_vanishing_moment_test():
    report = vanishing_moment_test(lambda t: 0.0, 1.0, 0, 4)
    assert report.vanishes
    assert report.max_moment == 0.0
    report = vanishing_moment_test(lambda t: 1.0, 0.5, 0, 3)
    assert not report.vanishes
    # ∫ e^{-t} t^{k/2} dt = Γ(k/2 + 1)
    for k, value in report.moments:
        assert abs(value - gamma(0.5 * k + 1.0)) < 1e-9 * gamma(0.5 * k + 1.0)
    with pytest.raises(ParameterError):
        vanishing_moment_test(lambda t: 0.0, 3.0, 0, 2)
    with pytest.raises(ParameterError):
        vanishing_moment_test(lambda t: 0.0, 1.0, 3, 2)


# --- Period scan ---

def test_period_scan_trichotomy():
    p = SpaceParams(1)
    n_range = (-5, 5)
    one = constant(1.0, 1)
    square = radial_power(2, 1)
    full = period_scan(one, one, p, n_range)
    assert classify_period_set(full, n_range) == "full"
    singleton = period_scan(square, square, p, n_range)
    assert singleton == frozenset({0})
    assert classify_period_set(singleton, n_range) == "singleton"
    empty = period_scan(square, radial_power(4, 1), p, n_range)
    assert classify_period_set(empty, n_range) == "empty"


def test_period_scan_shifted_pair():
    # on the Gaussian space Ω(r^2 - 1, ζ) = ζ and Ω(r^2, ζ) = 1 + ζ
    p = SpaceParams(1)
    shifted = parse_symbol("r^2 - 1", 1)
    assert period_scan(shifted, radial_power(2, 1), p, (-3, 3)) == frozenset({-1})


def test_period_scan_domain_check():
    with pytest.raises(ParameterError):
        period_deviations(constant(1.0, 1), constant(1.0, 1), SpaceParams(1), (-5, 5), grid=[0.5 + 0j])
    with pytest.raises(ParameterError):
        period_deviations(constant(1.0, 1), constant(1.0, 1), SpaceParams(1), (2, 1))


# --- Partial fractions ---

def test_partial_fraction_kernel():
    kernel = partial_fraction_kernel([1.0], 2)
    assert np.allclose(kernel.coef, [2.0, 0.0, -2.0])

    for coefficients, q, zeta in (([1.0], 2, 0.5), ([1.0, 2.0], 3, 1.3), ([0.0, 0.0, 1.0], 4, 2.0)):
        kernel = partial_fraction_kernel(coefficients, q)
        numerator = np.polynomial.Polynomial(coefficients)(zeta)
        expected = numerator / np.prod([zeta + i for i in range(1, q + 1)])

        def profile(x):
            return complex(kernel(x)) if x <= 1.0 else 0j

        value = mellin_transform(profile, 2 * zeta + 2, breakpoints=(1.0,))
        assert abs(value - expected) < 1e-10


def test_partial_fraction_kernel_validation():
    with pytest.raises(ParameterError):
        partial_fraction_kernel([0.0, 0.0, 1.0], 2)
    with pytest.raises(ParameterError):
        partial_fraction_kernel([1.0], 0)
