import math
import pytest
import sys
import os

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.errors import MomentRangeError, ParameterError
from modules.quadrature import QuadratureGrid, build_product_rule
from modules.space_core import (
    MultiIndex,
    SpaceParams,
    evaluate_basis,
    graded_basis,
    moment,
    multi_index_count,
    normalization_constant,
    orthonormal_coefficient,
)


def test_normalization_constant():
    assert abs(normalization_constant(SpaceParams(1, 1.0, 1.0, 0.0)) - 1 / math.pi) < 1e-15
    assert abs(normalization_constant(SpaceParams(2, 1.0, 2.0, 0.0)) - 4 / math.pi ** 2) < 1e-15
    assert abs(normalization_constant(SpaceParams(1, 2.0, 1.0, 1.0)) - 2 / math.pi) < 1e-15


@pytest.mark.parametrize("bad", [
    {"d": 0}, {"d": 1.5}, {"m": 0.5}, {"alpha": 0.0}, {"s": -0.1}, {"m": float("nan")},
])
def test_space_params_validation(bad):
    values = {"d": 1, "m": 1.0, "alpha": 1.0, "s": 0.0}
    values.update(bad)
    with pytest.raises(ParameterError):
        SpaceParams(**values)


def test_kernel_constant():
    p = SpaceParams(2, 1.5, 1.0, 0.5)
    assert abs(p.kernel_constant - math.gamma(2.5 / 1.5) / math.gamma(2)) < 1e-14
    assert p.with_alpha(3.0).alpha == 3.0
    assert p.with_alpha(3.0).m == 1.5


def test_moment_examples():
    assert abs(moment(SpaceParams(1), [2]) - 2.0) < 1e-13
    assert abs(moment(SpaceParams(2), [1, 1]) - 1.0) < 1e-13
    expected = math.factorial(4) * math.gamma(2.5) / math.gamma(5) / math.gamma(0.5)
    assert abs(moment(SpaceParams(1, 2.0), [4]) - expected) < 1e-13 * expected


def test_moment_at_zero_is_one():
    for p in (SpaceParams(1, 2.0, 3.0, 0.5), SpaceParams(3, 1.5, 0.5, 2.0)):
        assert abs(moment(p, [0] * p.d) - 1.0) < 1e-13


def test_gaussian_moments():
    alpha = 2.5
    p = SpaceParams(2, 1.0, alpha, 0.0)
    for nu in graded_basis(p, 6):
        expected = math.factorial(nu[0]) * math.factorial(nu[1]) / alpha ** nu.total_degree
        assert abs(moment(p, nu) - expected) < 1e-12 * expected


def test_orthonormal_coefficient():
    assert abs(orthonormal_coefficient(SpaceParams(1), [2]) - 1 / math.sqrt(2)) < 1e-14
    p = SpaceParams(1, 2.0, 1.0, 1.0)
    assert abs(orthonormal_coefficient(p, [3]) - moment(p, [3]) ** -0.5) < 1e-14


def test_moment_range_error():
    with pytest.raises(MomentRangeError) as info:
        moment(SpaceParams(1), [400])
    assert info.value.degree == 400
    # the coefficient tolerates larger degrees than the moment itself
    assert orthonormal_coefficient(SpaceParams(1), [200]) > 0


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("m", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("s", [0.0, 0.5])
def test_moments_match_quadrature(d, m, s):
    p = SpaceParams(d, m, 1.0, s)
    rule = build_product_rule(p, QuadratureGrid.for_dimension(d))
    for nu in graded_basis(p, 10):
        exponents = np.array(nu)
        numeric = rule.integrate(lambda z: np.prod(np.abs(z) ** (2 * exponents), axis=1)).real
        exact = moment(p, nu)
        assert abs(numeric - exact) <= 1e-10 * exact


def test_graded_basis_order():
    assert graded_basis(SpaceParams(1), 2) == [(0,), (1,), (2,)]
    assert graded_basis(SpaceParams(2), 1) == [(0, 0), (1, 0), (0, 1)]
    basis = graded_basis(SpaceParams(2), 2)
    assert len(basis) == math.comb(4, 2) == multi_index_count(2, 2)
    assert [nu.total_degree for nu in basis] == sorted(nu.total_degree for nu in basis)
    with pytest.raises(ParameterError):
        graded_basis(SpaceParams(1), -1)


def test_multi_index_parse():
    assert MultiIndex.parse("1,0", 2) == (1, 0)
    assert MultiIndex.parse("0", 3) == (0, 0, 0)
    assert MultiIndex.parse("2,1", 2).total_degree == 3
    with pytest.raises(ParameterError):
        MultiIndex.parse("1", 2)
    with pytest.raises(ParameterError):
        MultiIndex.parse("a,b", 2)
    with pytest.raises(ParameterError):
        MultiIndex([1, -1])


def test_basis_is_orthonormal():
    p = SpaceParams(2, 1.5, 1.0, 0.5)
    basis = graded_basis(p, 4)
    rule = build_product_rule(p, QuadratureGrid.for_dimension(2))
    gram = np.zeros((len(basis), len(basis)), dtype=complex)
    for points, weights in rule.shells():
        vectors = evaluate_basis(p, basis, points)
        gram += (vectors.conj() * weights[:, None]).T @ vectors
    assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10
