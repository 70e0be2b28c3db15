"""
Quadrature rules for integrals against dμ_{m,α,s}.

The radial rule integrates h(r) r^{2d+2s−1} e^{−αr^{2m}} on (0, ∞). It is a
Gauss rule in u = r² for the weight u^{d+s−1} e^{−αu^m}:

- m = 1: the generalized Gauss–Laguerre rule after t = αu;
- m ≠ 1: recurrence coefficients from the closed-form moments
  (Chebyshev algorithm in extended precision), then Golub–Welsch.

Product rules combine it with normalized rules on the unit sphere of ℂ^d:
equispaced angles for d = 1, and for d = 2 the coordinates
z₁ = ρ√x e^{iθ₁}, z₂ = ρ√(1−x) e^{iθ₂} with x Gauss–Legendre on [0, 1].
"""
import cmath
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, roots_genlaguerre

import config
from modules.errors import ConvergenceError, DivergenceError, ParameterError, UnsupportedDimensionError
from modules.space_core import SpaceParams, log_normalization_constant

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadialRule:
    nodes: np.ndarray
    weights: np.ndarray
    params: SpaceParams

    @property
    def target(self) -> str:
        p = self.params
        return f"r^{2 * p.d + 2 * p.s - 1:g} exp(-{p.alpha:g} r^{2 * p.m:g}) on (0, inf)"

    @property
    def size(self) -> int:
        return len(self.nodes)

    def exact_moment(self, k: float) -> float:
        """∫ r^{2d+2s+2k−1} e^{−αr^{2m}} dr = Γ((d+s+k)/m)/(2m α^{(d+s+k)/m})."""
        p = self.params
        a = (p.d + p.s + k) / p.m
        return math.exp(float(gammaln(a)) - a * math.log(p.alpha)) / (2.0 * p.m)


@dataclass(frozen=True)
class AngularRule:
    n_angles: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class QuadratureGrid:
    """Rule sizes: radial nodes, angles per circle, polar nodes (d = 2 only)."""
    n_r: int
    n_theta: int
    n_polar: int = config.DEFAULT_N_POLAR

    def __post_init__(self):
        for name in ("n_r", "n_theta", "n_polar"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @classmethod
    def for_dimension(cls, d: int, n_r: Optional[int] = None, n_theta: Optional[int] = None,
                      n_polar: Optional[int] = None) -> "QuadratureGrid":
        defaults = config.GRID_DEFAULTS.get(d, config.GRID_DEFAULTS[2])
        return cls(
            n_r=n_r or defaults["n_r"],
            n_theta=n_theta or defaults["n_theta"],
            n_polar=n_polar or defaults["n_polar"],
        )

    def as_dict(self) -> dict:
        return {"n_r": self.n_r, "n_theta": self.n_theta, "n_polar": self.n_polar}


def _chebyshev_recurrence(p: SpaceParams, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Monic recurrence coefficients (a_k, b_k), k < n, of u^{d+s−1}e^{−αu^m}."""
    ctx = mpmath.MPContext()
    ctx.dps = 40 + 4 * n
    m = ctx.mpf(p.m)
    alpha = ctx.mpf(p.alpha)
    shift = ctx.mpf(p.d) + ctx.mpf(p.s)
    mu = [ctx.gamma((j + shift) / m) / (m * alpha ** ((j + shift) / m)) for j in range(2 * n)]

    a = [ctx.mpf(0)] * n
    b = [ctx.mpf(0)] * n
    sigma_prev = [ctx.mpf(0)] * (2 * n)
    sigma = list(mu)
    a[0] = mu[1] / mu[0]
    b[0] = mu[0]
    for k in range(1, n):
        sigma_next = [ctx.mpf(0)] * (2 * n)
        for l in range(k, 2 * n - k):
            sigma_next[l] = sigma[l + 1] - a[k - 1] * sigma[l] - b[k - 1] * sigma_prev[l]
        if sigma_next[k] <= 0:
            raise ConvergenceError(f"radial rule construction broke down at k={k} for n={n}, params={p.as_dict()}")
        a[k] = sigma_next[k + 1] / sigma_next[k] - sigma[k] / sigma[k - 1]
        b[k] = sigma_next[k] / sigma[k - 1]
        sigma_prev, sigma = sigma, sigma_next
    return np.array([float(v) for v in a]), np.array([float(v) for v in b])


def _golub_welsch(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes from the Jacobi matrix; weights from the Christoffel function."""
    nodes = eigh_tridiagonal(a, np.sqrt(b[1:]), eigvals_only=True)
    # orthonormal polynomials evaluated by the three-term recurrence
    previous = np.zeros_like(nodes)
    current = np.full_like(nodes, 1.0 / math.sqrt(b[0]))
    total = current ** 2
    for k in range(len(a) - 1):
        following = ((nodes - a[k]) * current - (math.sqrt(b[k]) if k else 0.0) * previous) / math.sqrt(b[k + 1])
        previous, current = current, following
        total += current ** 2
    return nodes, 1.0 / total


@lru_cache(maxsize=32)
def _radial_rule(p: SpaceParams, n: int) -> Tuple[np.ndarray, np.ndarray]:
    if p.m == 1.0:
        shape = p.d + p.s - 1.0
        x, w = roots_genlaguerre(n, shape)
        u = x / p.alpha
        omega = w / p.alpha ** (p.d + p.s)
    else:
        a, b = _chebyshev_recurrence(p, n)
        u, omega = _golub_welsch(a, b)
        if np.any(u <= 0) or np.any(~np.isfinite(omega)) or np.any(omega <= 0):
            raise ConvergenceError(f"radial rule with n={n} produced invalid nodes for params={p.as_dict()}")
    nodes = np.sqrt(u)
    weights = 0.5 * omega
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def build_radial_rule(p: SpaceParams, n: int) -> RadialRule:
    """Gauss rule in r² for r^{2d+2s−1} e^{−αr^{2m}}; exact for r^{2k}, k ≤ 2n−1."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"radial rule size must be a positive integer, got {n!r}")
    nodes, weights = _radial_rule(p, int(n))
    rule = RadialRule(nodes, weights, p)
    logger.debug("%d-point radial rule for %s", rule.size, rule.target)
    return rule


def integrate_radial(rule: RadialRule, f: Callable[[np.ndarray], np.ndarray]):
    """Σ wᵢ f(rᵢ); f is evaluated on the node array."""
    values = np.asarray(f(rule.nodes))
    if values.shape == ():
        values = np.full(rule.nodes.shape, values)
    return np.sum(rule.weights * values)


def build_angular_rule(n: int) -> AngularRule:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError(f"angular rule size must be a positive integer, got {n!r}")
    n = int(n)
    nodes = 2.0 * np.pi * np.arange(n) / n
    return AngularRule(n, nodes, np.full(n, 2.0 * np.pi / n))


def polar_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre on [0, 1], weights summing to 1."""
    t, w = leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def sphere_rule(d: int, grid: QuadratureGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Directions on the unit sphere of ℂ^d and weights of the normalized surface measure."""
    angles = build_angular_rule(grid.n_theta)
    phases = np.exp(1j * angles.nodes)
    if d == 1:
        return phases.reshape(-1, 1), np.full(grid.n_theta, 1.0 / grid.n_theta)
    if d == 2:
        x, wx = polar_rule(grid.n_polar)
        xs, t1, t2 = np.meshgrid(x, phases, phases, indexing="ij")
        directions = np.stack([np.sqrt(xs) * t1, np.sqrt(1.0 - xs) * t2], axis=-1).reshape(-1, 2)
        weights = np.broadcast_to(wx[:, None, None], xs.shape).reshape(-1) / grid.n_theta ** 2
        return directions, weights
    raise UnsupportedDimensionError(f"product quadrature supports d <= 2, got d={d}")


@dataclass(frozen=True)
class ProductRule:
    params: SpaceParams
    radial: RadialRule
    directions: np.ndarray
    direction_weights: np.ndarray
    scale: float

    @property
    def size(self) -> int:
        return self.radial.size * len(self.direction_weights)

    def shells(self, start: int = 0, stop: Optional[int] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """(points, weights) for each radial node in [start, stop)."""
        stop = self.radial.size if stop is None else stop
        for i in range(start, stop):
            yield (self.radial.nodes[i] * self.directions,
                   self.scale * self.radial.weights[i] * self.direction_weights)

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> complex:
        total = 0j
        for points, weights in self.shells():
            values = np.asarray(g(points), dtype=complex)
            check_finite(values, points)
            total += np.sum(weights * values)
        return complex(total)


def check_finite(values: np.ndarray, points: np.ndarray):
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise DivergenceError("non-finite integrand", location=points[np.argmax(bad)])


def build_product_rule(p: SpaceParams, grid: QuadratureGrid) -> ProductRule:
    radial = build_radial_rule(p, grid.n_r)
    directions, weights = sphere_rule(p.d, grid)
    # c_{m,α,s} times the area 2π^d/Γ(d) of the unit sphere
    log_area = math.log(2.0) + p.d * math.log(math.pi) - float(gammaln(p.d))
    scale = math.exp(log_normalization_constant(p) + log_area)
    return ProductRule(p, radial, directions, weights, scale)


def integrate(p: SpaceParams, g: Callable[[np.ndarray], np.ndarray], grid: QuadratureGrid) -> complex:
    """∫ g dμ_{m,α,s} for d ≤ 2."""
    return build_product_rule(p, grid).integrate(g)


def integrate_c1(p: SpaceParams, g: Callable[[np.ndarray], np.ndarray], n_r: int = config.DEFAULT_N_R,
                 n_theta: int = config.DEFAULT_N_THETA) -> complex:
    if p.d != 1:
        raise UnsupportedDimensionError(f"integrate_c1 needs d=1, got d={p.d}")
    return integrate(p, g, QuadratureGrid(n_r, n_theta, 1))


def integrate_c2(p: SpaceParams, g: Callable[[np.ndarray], np.ndarray],
                 grid: Optional[QuadratureGrid] = None) -> complex:
    if p.d != 2:
        raise UnsupportedDimensionError(f"integrate_c2 needs d=2, got d={p.d}")
    return integrate(p, g, grid or QuadratureGrid.for_dimension(2))


def _quad_points(breakpoints: Sequence[float]):
    # the cut at 1 separates an endpoint singularity at 0 from the tail
    inner = sorted({1.0} | {float(b) for b in breakpoints if 0.0 < float(b) < math.inf})
    return [mpmath.mpf(0)] + [mpmath.mpf(b) for b in inner] + [mpmath.inf]


def adaptive_integral(integrand: Callable[[float], complex], breakpoints: Sequence[float] = (),
                      what: str = "integral") -> complex:
    """
    Tanh-sinh integral of a float -> complex function over (0, ∞).

    Each degree in config.MELLIN_DEGREES is tried in turn until the error
    estimate drops below config.MELLIN_REL_TOL relative
    (config.MELLIN_ABS_FLOOR absolute).

    Raises:
        DivergenceError: non-finite value, or no degree stabilizes
    """
    def wrapped(t):
        return mpmath.mpc(complex(integrand(float(t))))

    points = _quad_points(breakpoints)
    result, error = 0j, math.inf
    for degree in config.MELLIN_DEGREES:
        try:
            value, error = mpmath.quad(wrapped, points, error=True, maxdegree=degree)
        except (OverflowError, ZeroDivisionError, ValueError) as e:
            raise DivergenceError(f"{what} failed: {e}")
        result = complex(value)
        error = float(abs(error))
        if not (math.isfinite(result.real) and math.isfinite(result.imag) and math.isfinite(error)):
            raise DivergenceError(f"{what} is not finite")
        if error <= max(config.MELLIN_REL_TOL * abs(result), config.MELLIN_ABS_FLOOR):
            return result
        logger.debug("%s: error %.2e at degree %d", what, error, degree)
    raise DivergenceError(f"{what} did not stabilize (estimate {result:.6g}, error {error:.2e})")


def gamma_peak_cuts(a: complex) -> List[float]:
    """Cuts around the maximum of |t^{a−1} e^{−t}| at t = Re a − 1."""
    centre = complex(a).real - 1.0
    if centre <= 1.0:
        return []
    width = math.sqrt(centre + 1.0)
    return [centre + k * width for k in config.GAMMA_PEAK_CUTS if centre + k * width > 0.0]


def gamma_weighted_integral(h: Callable[[float], complex], a: complex, breakpoints: Sequence[float] = (),
                            what: str = "integral") -> complex:
    """∫₀^∞ h(t) t^{a−1} e^{−t} dt."""
    a = complex(a)

    def integrand(t: float) -> complex:
        if t == 0.0:
            return 0j
        weight = cmath.exp((a - 1.0) * math.log(t) - t)
        if weight == 0:
            return 0j
        return complex(h(t)) * weight

    return adaptive_integral(integrand, list(breakpoints) + gamma_peak_cuts(a), what)
