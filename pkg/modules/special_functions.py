"""
Mittag-Leffler functions E^{(l)}_{β,γ} and the reproducing kernel K_{m,α,s}.

Scalar evaluation switches between the power series (summed in extended
precision) and the exponential asymptotic expansion; the float series in
`ml_series_array` is the vectorized variant used inside quadrature loops.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.special import gammaln

import config
from modules.errors import ConvergenceError, ParameterError, RangeError
from modules.space_core import SpaceParams

logger = logging.getLogger(__name__)

_LN10 = math.log(10.0)


class Regime(Enum):
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class MLParams:
    """Parameters of E^{(l)}_{β,γ}; l is the derivative order."""
    beta: float
    gamma: float
    derivative_order: int = 0

    def __post_init__(self):
        if not (self.beta > 0 and self.gamma > 0):
            raise ParameterError(f"Mittag-Leffler needs beta, gamma > 0, got ({self.beta}, {self.gamma})")
        if int(self.derivative_order) != self.derivative_order or self.derivative_order < 0:
            raise ParameterError(f"derivative order must be a non-negative integer, got {self.derivative_order!r}")
        object.__setattr__(self, "derivative_order", int(self.derivative_order))

    @classmethod
    def from_space(cls, p: SpaceParams) -> "MLParams":
        return cls(1.0 / p.m, (1.0 + p.s) / p.m, p.d - 1)

    @property
    def sector(self) -> float:
        """Half-opening of the sector where the exponential expansion is used."""
        return math.pi * self.beta / 2.0 - config.ML_SECTOR_MARGIN


@dataclass(frozen=True)
class KernelValue:
    value: complex
    regime: Regime


def _log_coefficient(params: MLParams, k: int) -> float:
    l = params.derivative_order
    return math.lgamma(k + l + 1) - math.lgamma(k + 1) - math.lgamma(params.beta * (k + l) + params.gamma)


def _series_plan(params: MLParams, radius: float, tol: float, max_terms: int) -> Optional[Tuple[int, float]]:
    """
    Number of series terms needed at |z| = radius and the log of Σ|terms|.

    Terms are kept until they drop below tol/Σ|terms|, a lower bound for
    |E| when the terms cancel. Returns None when max_terms is not enough.
    """
    if radius == 0.0:
        return 1, _log_coefficient(params, 0)
    log_radius = math.log(radius)
    log_total = -math.inf
    previous = -math.inf
    small_run = 0
    for k in range(max_terms):
        log_term = _log_coefficient(params, k) + k * log_radius
        log_total = np.logaddexp(log_total, log_term)
        if log_term < previous and log_term < log_total + math.log(tol) - 2.0 * max(log_total, 0.0):
            small_run += 1
            if small_run >= 3:
                return k + 1, float(log_total)
        else:
            small_run = 0
        previous = log_term
    return None


def _context(log_total: float) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = config.ML_GUARD_DIGITS + max(0, int(math.ceil(2.0 * log_total / _LN10)))
    return ctx


def _series_mp(params: MLParams, z: complex, terms: int, ctx: mpmath.MPContext):
    l = params.derivative_order
    beta = ctx.mpf(params.beta)
    gamma = ctx.mpf(params.gamma)
    zz = ctx.mpc(z)
    total = ctx.mpc(0)
    power = ctx.mpc(1)
    for k in range(terms):
        total += ctx.rf(k + 1, l) * ctx.rgamma(beta * (k + l) + gamma) * power
        power *= zz
    return total


def _exponential_part(params: MLParams) -> Dict[float, float]:
    """
    Coefficients {q: c_q} with E ≈ Σ c_q z^q e^{z^M} for the l-th derivative.

    Starts from (1/β) z^{(1-γ)/β} e^{z^{1/β}} and differentiates exactly.
    """
    exponent = 1.0 / params.beta
    terms = {(1.0 - params.gamma) / params.beta: 1.0 / params.beta}
    for _ in range(params.derivative_order):
        shifted: Dict[float, float] = {}
        for q, c in terms.items():
            if q != 0.0:
                shifted[q - 1.0] = shifted.get(q - 1.0, 0.0) + c * q
            shifted[q + exponent - 1.0] = shifted.get(q + exponent - 1.0, 0.0) + c * exponent
        terms = shifted
    return terms


def _asymptotic_mp(params: MLParams, z: complex, ctx: mpmath.MPContext):
    """Asymptotic value and an estimate of its relative error."""
    l = params.derivative_order
    zz = ctx.mpc(z)
    growth = ctx.exp(zz ** ctx.mpf(1.0 / params.beta))
    value = ctx.mpc(0)
    for q, c in _exponential_part(params).items():
        value += ctx.mpf(c) * zz ** ctx.mpf(q)
    value *= growth

    sign = -1 if l % 2 else 1
    previous = None
    tail = ctx.mpf(0)
    for k in range(1, 80):
        # d^l/dz^l z^{-k} = (-1)^l (k)_l z^{-k-l}
        term = sign * ctx.rf(k, l) * ctx.rgamma(ctx.mpf(params.gamma) - ctx.mpf(params.beta) * k) * zz ** (-k - l)
        size = abs(term)
        if previous is not None and size > previous and previous > 0:
            tail = previous
            break
        value -= term
        if size != 0:
            previous = size
        tail = size
    scale = abs(value)
    error = float(tail / scale) if scale else math.inf
    return value, error


def _to_complex(value, what: str) -> complex:
    result = complex(value)
    if not (math.isfinite(result.real) and math.isfinite(result.imag)):
        raise RangeError(f"{what} exceeds the floating-point range")
    return result


def _in_sector(params: MLParams, z: complex) -> bool:
    return z != 0 and abs(cmath.phase(z)) <= params.sector


def _evaluate_mp(params: MLParams, z: complex, regime: Optional[Regime], tol: float):
    """Returns (mpmath value, context, regime)."""
    if regime is Regime.SERIES:
        plan = _series_plan(params, abs(z), tol, config.ML_MAX_TERMS)
        if plan is None:
            raise ConvergenceError(f"series for E^({params.derivative_order})_{{{params.beta:.6g},{params.gamma:.6g}}} "
                                   f"did not converge at z={z} within {config.ML_MAX_TERMS} terms")
        ctx = _context(plan[1])
        return _series_mp(params, z, plan[0], ctx), ctx, Regime.SERIES

    if regime is Regime.ASYMPTOTIC:
        if not _in_sector(params, z):
            raise ParameterError(f"z={z} lies outside the asymptotic sector |arg z| <= {params.sector:.4f}")
        ctx = _context(0.0)
        value, _ = _asymptotic_mp(params, z, ctx)
        return value, ctx, Regime.ASYMPTOTIC

    plan = _series_plan(params, abs(z), tol, config.ML_TERM_BUDGET)
    if plan is None and _in_sector(params, z):
        ctx = _context(0.0)
        value, error = _asymptotic_mp(params, z, ctx)
        if error <= tol:
            return value, ctx, Regime.ASYMPTOTIC
        logger.info("asymptotic expansion too coarse at z=%s (rel. error %.2e), using series", z, error)
    if plan is None:
        plan = _series_plan(params, abs(z), tol, config.ML_MAX_TERMS)
    if plan is None:
        raise ConvergenceError(f"neither regime converged for E^({params.derivative_order})"
                               f"_{{{params.beta:.6g},{params.gamma:.6g}}} at z={z}")
    ctx = _context(plan[1])
    return _series_mp(params, z, plan[0], ctx), ctx, Regime.SERIES


def ml_evaluate(params: MLParams, z: complex, regime: Optional[Regime] = None,
                tol: float = config.ML_SERIES_TOL) -> KernelValue:
    """
    Value of E^{(l)}_{β,γ}(z) together with the regime that produced it.

    Args:
        regime: force Regime.SERIES or Regime.ASYMPTOTIC; None picks by term budget
        tol: relative tolerance the series (or expansion) must reach
    """
    z = complex(z)
    value, _, used = _evaluate_mp(params, z, regime, tol)
    return KernelValue(_to_complex(value, f"E({z})"), used)


def ml_eval(params: MLParams, z: complex) -> complex:
    return ml_evaluate(params, z).value


def ml_series_array(params: MLParams, w: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """
    Float power series of E^{(l)}_{β,γ} at many points.

    Absolute error is about eps·E^{(l)}(|w|); only meant for integrands whose
    weight damps large |w|.
    """
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    out = np.empty(flat.shape, dtype=complex)
    if flat.size == 0:
        return out.reshape(w.shape)
    plan = _series_plan(params, float(np.max(np.abs(flat))), 1e-17, config.ML_MAX_TERMS)
    if plan is None:
        raise ConvergenceError(f"series needs more than {config.ML_MAX_TERMS} terms at |w|={np.max(np.abs(flat)):.6g}")
    k = np.arange(plan[0], dtype=float)
    l = params.derivative_order
    log_coeff = gammaln(k + l + 1) - gammaln(k + 1) - gammaln(params.beta * (k + l) + params.gamma)
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk]
        zero = block == 0
        log_w = np.log(np.where(zero, 1.0, block))
        terms = np.exp(log_coeff[None, :] + k[None, :] * log_w[:, None])
        values = terms.sum(axis=1)
        values[zero] = math.exp(log_coeff[0])
        out[start:start + chunk] = values
    return out.reshape(w.shape)


def _inner(xi: Sequence[complex], zeta: Sequence[complex]) -> complex:
    return complex(np.sum(np.asarray(xi, dtype=complex) * np.conj(np.asarray(zeta, dtype=complex))))


def _check_point(p: SpaceParams, point: Sequence[complex], name: str):
    if len(point) != p.d:
        raise ParameterError(f"{name} has {len(point)} coordinates, expected d={p.d}")


def kernel_value(p: SpaceParams, xi: Sequence[complex], zeta: Sequence[complex]) -> KernelValue:
    _check_point(p, xi, "xi")
    _check_point(p, zeta, "zeta")
    argument = p.alpha ** (1.0 / p.m) * _inner(xi, zeta)
    raw = ml_evaluate(MLParams.from_space(p), argument)
    return KernelValue(p.kernel_constant * raw.value, raw.regime)


def kernel_eval(p: SpaceParams, xi: Sequence[complex], zeta: Sequence[complex]) -> complex:
    """K_{m,α,s}(ξ,ζ) = C_s E^{(d−1)}_{1/m,(1+s)/m}(α^{1/m}⟨ξ,ζ⟩)."""
    return kernel_value(p, xi, zeta).value


def kernel_matrix(p: SpaceParams, z: Sequence[complex], points: np.ndarray) -> np.ndarray:
    """K(z, ξ_i) for every row ξ_i of points."""
    _check_point(p, z, "z")
    points = np.asarray(points, dtype=complex).reshape(-1, p.d)
    inner = points.conj() @ np.asarray(z, dtype=complex)
    return p.kernel_constant * ml_series_array(MLParams.from_space(p), p.alpha ** (1.0 / p.m) * inner)


def kernel_asymptotic_ratio(p: SpaceParams, t: float) -> float:
    """E^{(d−1)}_{1/m,(1+s)/m}(t) over its leading term m^d t^{d(m−1)−s} e^{t^m}."""
    if not t > 0 or t ** p.m < 5:
        raise ParameterError(f"asymptotic ratio needs t^m >= 5, got t={t}, m={p.m}")
    params = MLParams.from_space(p)
    value, ctx, _ = _evaluate_mp(params, complex(t), None, config.ML_SERIES_TOL)
    tt = ctx.mpf(t)
    leading = ctx.mpf(p.m) ** p.d * tt ** ctx.mpf(p.d * (p.m - 1) - p.s) * ctx.exp(tt ** ctx.mpf(p.m))
    return float(ctx.re(value) / leading)
