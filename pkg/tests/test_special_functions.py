import cmath
import math
import pytest
import sys
import os

import mpmath
import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.errors import ParameterError
from modules.space_core import SpaceParams, evaluate_basis, graded_basis
from modules.special_functions import (
    MLParams,
    Regime,
    kernel_asymptotic_ratio,
    kernel_eval,
    kernel_matrix,
    kernel_value,
    ml_eval,
    ml_evaluate,
    ml_series_array,
)


def _series_oracle(beta, gamma, z, order=0, terms=400):
    with mpmath.workdps(50):
        total = mpmath.mpf(0)
        for k in range(terms):
            total += mpmath.rf(k + 1, order) * mpmath.power(z, k) * mpmath.rgamma(beta * (k + order) + gamma)
        return complex(total)


def test_ml_elementary_cases():
    assert abs(ml_eval(MLParams(1.0, 1.0), 1.0) - math.e) < 1e-14
    assert abs(ml_eval(MLParams(1.0, 2.0), 1.0) - (math.e - 1.0)) < 1e-14
    assert abs(ml_eval(MLParams(2.0, 1.0), -4.0) - math.cos(2.0)) < 1e-13


def test_ml_half_order_against_series():
    expected = _series_oracle(0.5, 0.5, 3.0)
    assert abs(ml_eval(MLParams(0.5, 0.5), 3.0) - expected) < 1e-10 * abs(expected)


def test_ml_derivative_order():
    # d/dz e^z = e^z and E^{(1)}_{1,2}(z) = (z e^z - e^z + 1)/z^2
    z = 0.7 + 0.3j
    assert abs(ml_eval(MLParams(1.0, 1.0, 1), z) - cmath.exp(z)) < 1e-13
    expected = (z * cmath.exp(z) - cmath.exp(z) + 1.0) / z ** 2
    assert abs(ml_eval(MLParams(1.0, 2.0, 1), z) - expected) < 1e-13


def test_ml_params_validation():
    with pytest.raises(ParameterError):
        MLParams(0.0, 1.0)
    with pytest.raises(ParameterError):
        MLParams(1.0, 1.0, -1)


def test_ml_large_argument_uses_asymptotic_regime():
    params = MLParams(0.5, 0.5)
    value = ml_evaluate(params, 16.0)
    assert value.regime is Regime.ASYMPTOTIC
    assert abs(value.value - _series_oracle(0.5, 0.5, 16.0, terms=1500)) < 1e-9 * abs(value.value)


@pytest.mark.parametrize("m,s,d", [(1.5, 0.0, 1), (2.0, 0.0, 1), (2.0, 1.0, 2)])
def test_regimes_agree_in_overlap(m, s, d):
    params = MLParams.from_space(SpaceParams(d, m, 1.0, s))
    for t in (8.0, 10.0, 12.0):
        series = ml_evaluate(params, t, Regime.SERIES).value
        asymptotic = ml_evaluate(params, t, Regime.ASYMPTOTIC).value
        assert abs(series - asymptotic) <= 1e-8 * abs(series)


def test_asymptotic_regime_rejects_points_outside_sector():
    with pytest.raises(ParameterError):
        ml_evaluate(MLParams(0.5, 0.5), -30.0, Regime.ASYMPTOTIC)


def test_series_array_matches_scalar():
    params = MLParams(0.5, 0.75, 1)
    w = np.array([0.0, 0.5, 1.5 + 1j, -2.0, 1.5j])
    values = ml_series_array(params, w)
    for wi, vi in zip(w, values):
        expected = ml_eval(params, wi)
        assert abs(vi - expected) < 1e-12 * max(1.0, abs(expected))


def test_gaussian_kernel_collapse():
    p = SpaceParams(2, 1.0, 1.0, 0.0)
    assert abs(kernel_eval(p, [1, 0], [1, 0]) - math.e) < 1e-13
    rng = np.random.default_rng(7)
    for alpha in (1.0, 0.5):
        p = SpaceParams(2, 1.0, alpha, 0.0)
        for _ in range(20):
            xi = rng.normal(size=2) + 1j * rng.normal(size=2)
            zeta = rng.normal(size=2) + 1j * rng.normal(size=2)
            inner = np.sum(xi * np.conj(zeta))
            scale = min(1.0, 10.0 / abs(inner))
            xi = xi * scale
            expected = cmath.exp(alpha * np.sum(xi * np.conj(zeta)))
            assert abs(kernel_eval(p, xi, zeta) - expected) <= 1e-10 * abs(expected)


def test_kernel_at_origin():
    for p in (SpaceParams(1, 2.0), SpaceParams(2, 1.5, 1.0, 0.0), SpaceParams(1, 1.5, 1.0, 0.5)):
        value = kernel_eval(p, [0.3] * p.d, [0] * p.d)
        assert abs(value - 1.0) < 1e-13


def test_kernel_matches_basis_expansion():
    p = SpaceParams(1, 2.0, 1.0, 0.0)
    basis = graded_basis(p, 60)
    xi = np.array([[1.2 + 0.4j]])
    zeta = np.array([[0.8 - 0.5j]])
    expansion = np.sum(evaluate_basis(p, basis, xi) * np.conj(evaluate_basis(p, basis, zeta)))
    assert abs(kernel_eval(p, xi[0], zeta[0]) - expansion) < 1e-12 * abs(expansion)


def test_kernel_value_series_oracle():
    # K(2, 2) for d=1, m=2, s=0: C_s Σ 4^k / Γ((1+k)/2)
    p = SpaceParams(1, 2.0)
    expected = math.gamma(0.5) * _series_oracle(0.5, 0.5, 4.0)
    result = kernel_value(p, [2.0], [2.0])
    assert abs(result.value - expected) < 1e-10 * abs(expected)


def test_kernel_matrix_matches_scalar():
    p = SpaceParams(2, 1.5, 2.0, 0.5)
    z = np.array([0.4 + 0.1j, -0.3j])
    points = np.array([[0.1, 0.2j], [1.0 + 1.0j, -0.5], [0.0, 0.0]])
    values = kernel_matrix(p, z, points)
    for point, value in zip(points, values):
        expected = kernel_eval(p, z, point)
        assert abs(value - expected) < 1e-12 * abs(expected)


def test_kernel_dimension_check():
    with pytest.raises(ParameterError):
        kernel_eval(SpaceParams(2), [1.0], [1.0, 0.0])


def test_asymptotic_ratio_gaussian():
    assert abs(kernel_asymptotic_ratio(SpaceParams(1), 10.0) - 1.0) < 1e-12


@pytest.mark.parametrize("m,s,d", [(1.5, 0.0, 1), (2.0, 0.0, 1), (2.0, 1.0, 2)])
def test_asymptotic_ratio_near_one(m, s, d):
    t = 12.0 ** (1.0 / m)
    assert abs(kernel_asymptotic_ratio(SpaceParams(d, m, 1.0, s), t) - 1.0) <= 1e-3


def test_asymptotic_ratio_needs_large_t():
    with pytest.raises(ParameterError):
        kernel_asymptotic_ratio(SpaceParams(1, 2.0), 1.0)
