"""
Mellin transforms and convolutions on (0, ∞), the radial eigenvalue function
Ω(f, ζ), the Gamma-quotient kernel and the period scan 𝒵(f₁, f₂).
"""
import logging
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gammaln, loggamma

import config
from modules.errors import DivergenceError, GrowthError, ParameterError
from modules.quadrature import adaptive_integral, gamma_weighted_integral
from modules.space_core import SpaceParams
from modules.symbols import RadialFamily, Symbol

logger = logging.getLogger(__name__)

HalfLineFunction = Callable[[float], complex]


def _scalar(value) -> complex:
    return complex(np.asarray(value, dtype=complex).reshape(-1)[0])


@dataclass(frozen=True)
class MellinStrip:
    """The strip a < Re ζ < b; either side may be infinite."""
    a: float = -math.inf
    b: float = math.inf

    def __post_init__(self):
        if not self.a < self.b:
            raise ParameterError(f"Mellin strip needs a < b, got ({self.a}, {self.b})")

    def contains(self, zeta: complex) -> bool:
        return self.a < complex(zeta).real < self.b


def mellin_transform(f: HalfLineFunction, zeta: complex, strip: Optional[MellinStrip] = None,
                     breakpoints: Sequence[float] = (), exponent: float = 1.0) -> complex:
    """
    ℳ[f](ζ) = ∫₀^∞ f(x) x^{ζ−1} dx.

    Args:
        strip: reject ζ outside this strip before integrating
        breakpoints: points in (0, ∞) where f is not smooth
        exponent: integrate in t = x^exponent, which turns e^{−x^{2m}} tails
            into e^{−t²} (exponent m) or e^{−t} (exponent 2m)

    Raises:
        DivergenceError: ζ outside the strip, or the integral does not stabilize
    """
    zeta = complex(zeta)
    if strip is not None and not strip.contains(zeta):
        raise DivergenceError(f"zeta={zeta} lies outside the strip {strip.a} < Re zeta < {strip.b}")
    if not exponent > 0:
        raise ParameterError(f"substitution exponent must be positive, got {exponent}")
    power = zeta / exponent - 1.0

    def integrand(t: float) -> complex:
        if t == 0.0:
            return 0j
        return _scalar(f(t ** (1.0 / exponent))) * np.exp(power * math.log(t)) / exponent

    return adaptive_integral(integrand, [b ** exponent for b in breakpoints], what=f"M[f]({zeta})")


def _quad_complex(integrand: Callable[[float], complex], lower: float, upper: float) -> Tuple[complex, float]:
    options = config.CONVOLUTION_QUAD
    re, re_err = quad(lambda u: integrand(u).real, lower, upper, **options)
    im, im_err = quad(lambda u: integrand(u).imag, lower, upper, **options)
    return complex(re, im), re_err + im_err


def mellin_convolve(f: HalfLineFunction, g: HalfLineFunction, x: float,
                    f_breakpoints: Sequence[float] = (), g_breakpoints: Sequence[float] = ()) -> complex:
    """
    (f * g)(x) = ∫₀^∞ f(y) g(x/y) dy/y, integrated in u = ln y.

    Raises:
        DivergenceError: QUADPACK reports trouble or a non-finite value
    """
    if not x > 0:
        raise ParameterError(f"Mellin convolution is evaluated at x > 0, got {x}")
    log_x = math.log(x)
    cuts = sorted({math.log(b) for b in f_breakpoints if b > 0} | {log_x - math.log(b) for b in g_breakpoints if b > 0})
    edges = [-math.inf] + (cuts or [0.0]) + [math.inf]

    def integrand(u: float) -> complex:
        with np.errstate(over="ignore", invalid="ignore"):
            value = _scalar(f(np.exp(u))) * _scalar(g(np.exp(log_x - u)))
        # QUADPACK samples far into the tails where exp() saturates
        return value if np.isfinite(value) else 0j

    total = 0j
    error = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            for lower, upper in zip(edges[:-1], edges[1:]):
                value, err = _quad_complex(integrand, lower, upper)
                total += value
                error += err
        except IntegrationWarning as e:
            raise DivergenceError(f"Mellin convolution at x={x:.6g} did not converge: {e}")
    if not np.isfinite(total):
        raise DivergenceError(f"Mellin convolution at x={x:.6g} is not finite")
    return complex(total)


def log_bump(width: float) -> HalfLineFunction:
    """
    Gaussian in ln y centred at 1 with unit mass for dy/y.

    Convolving with it approximates the identity as width -> 0.
    """
    if not width > 0:
        raise ParameterError(f"bump width must be positive, got {width}")
    norm = 1.0 / (width * math.sqrt(2.0 * math.pi))

    def bump(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            log_y = np.log(y)
        return norm * np.exp(-0.5 * (log_y / width) ** 2)

    return bump


def weighted_profile(u: HalfLineFunction, m: float) -> HalfLineFunction:
    """f_{m,u}(x) = u(x) e^{−x^{2m}}."""
    def profile(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(u(x), dtype=complex) * np.exp(-x ** (2 * m))

    return profile


def convolution_envelope(u: HalfLineFunction, v: HalfLineFunction, m: float, xs: Sequence[float],
                         compact: bool = False, v_breakpoints: Sequence[float] = ()) -> np.ndarray:
    """
    (f_{m,u} * f_{m,v})(x) · e^{x^m}, or · e^{x^{2m}} when supp v ⊂ [0, 1].

    For u, v of polynomial growth the result stays of polynomial growth.
    """
    fu = weighted_profile(u, m)
    fv = weighted_profile(v, m)
    power = 2 * m if compact else m
    values = []
    for x in xs:
        conv = mellin_convolve(fu, fv, float(x), g_breakpoints=v_breakpoints)
        values.append(conv * math.exp(float(x) ** power))
    return np.array(values, dtype=complex)


def convolution_identity_check(f: HalfLineFunction, g: HalfLineFunction, zeta: complex,
                               f_breakpoints: Sequence[float] = (),
                               g_breakpoints: Sequence[float] = ()) -> Dict[str, complex]:
    """ℳ[f * g](ζ) next to ℳ[f](ζ)·ℳ[g](ζ)."""
    lhs = mellin_transform(
        lambda x: mellin_convolve(f, g, x, f_breakpoints, g_breakpoints),
        zeta,
        breakpoints=list(f_breakpoints) + list(g_breakpoints),
    )
    rhs = mellin_transform(f, zeta, breakpoints=f_breakpoints) * mellin_transform(g, zeta, breakpoints=g_breakpoints)
    return {"transform_of_convolution": lhs, "product_of_transforms": rhs,
            "relative_error": abs(lhs - rhs) / max(abs(rhs), 1e-300)}


# --- Omega ---

def _log_gamma(a: complex) -> complex:
    return complex(loggamma(complex(a)))


def _closed_form_omega(family: RadialFamily, label: str, zeta: complex, p: SpaceParams) -> complex:
    if family.coefficient == 0:
        return 0j
    a = (p.d + p.s + zeta) / p.m
    shift = family.power / (2 * p.m)
    ratio = complex(family.rate) / p.alpha
    if ratio.real >= 1:
        raise GrowthError(f"{label} grows too fast: Re(rate/alpha) = {ratio.real:.6g} >= 1")
    if complex(a + shift).real <= 0:
        raise GrowthError(f"{label} is not integrable at the origin for zeta={zeta}")
    log_value = (
        _log_gamma(a + shift) - _log_gamma(a)
        - shift * math.log(p.alpha)
        - (a + shift) * complex(np.log(1.0 - ratio))
    )
    return complex(family.coefficient) * complex(np.exp(log_value))


def _quadrature_omega(f: Symbol, zeta: complex, p: SpaceParams) -> complex:
    a = (p.d + p.s + zeta) / p.m
    m, alpha = p.m, p.alpha

    def h(tau: float) -> complex:
        return complex(f.radial_profile((tau / alpha) ** (1.0 / (2 * m)))[0])

    breaks = [alpha * b ** (2 * m) for b in f.breakpoints]
    try:
        integral = gamma_weighted_integral(h, a, breaks, what=f"Omega({f.label}, {zeta})")
    except DivergenceError as e:
        raise GrowthError(f"{f.label} grows too fast for Omega at zeta={zeta}: {e}")
    return integral * complex(np.exp(-_log_gamma(a)))


def omega(f: Symbol, zeta: complex, p: SpaceParams, use_closed_form: bool = True) -> complex:
    """
    Ω(f, ζ) = (2m α^{a}/Γ(a)) ∫₀^∞ f(r) r^{2d+2s+2ζ−1} e^{−αr^{2m}} dr, a = (d+s+ζ)/m.

    T_f e_ν = Ω(f, Σν) e_ν for radial f. Symbols whose profile is a finite
    sum of terms c·r^p·e^{λr^{2m}} use the Gamma closed form term by term;
    everything else is integrated after τ = αr^{2m}.

    Raises:
        ParameterError: f not radial, or Re ζ <= −s−d
        GrowthError: the integral diverges
    """
    zeta = complex(zeta)
    if not f.is_radial:
        raise ParameterError(f"Omega needs a radial symbol, got {f.label} ({f.radiality.value})")
    if not zeta.real > -(p.s + p.d):
        raise ParameterError(f"Omega is defined for Re zeta > {-(p.s + p.d):g}, got {zeta}")
    terms = f.closed_terms if use_closed_form else None
    if terms is not None and all(family.applies_to(p.m) for family in terms):
        return sum((_closed_form_omega(family, f.label, zeta, p) for family in terms), 0j)
    return _quadrature_omega(f, zeta, p)


@dataclass
class OmegaFunction:
    """ζ -> Ω(f, ζ) with a thread-safe memo table."""
    f: Symbol
    params: SpaceParams
    _cache: Dict[complex, complex] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __call__(self, zeta: complex) -> complex:
        key = complex(zeta)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = omega(self.f, key, self.params)
        with self._lock:
            self._cache[key] = value
        return value

    def eigenvalue(self, nu: Sequence[int]) -> complex:
        """ω(f, ν) = Ω(f, Σν)."""
        return self(sum(nu))

    @property
    def cache_size(self) -> int:
        with self._lock:
            return len(self._cache)


# --- Gamma quotient kernel ---

def gamma_quotient_kernel(a: float, b: float, m: float, r):
    """
    v(r) = 2v₁(r²), v₁(x) = m/Γ(b′−a′) · x^{a}(1−x^m)^{b′−a′−1} on (0, 1).

    With a′ = a/m, b′ = b/m this gives ℳ[v](2z) = Γ((a+z)/m)/Γ((b+z)/m).
    """
    if not a < b:
        raise ParameterError(f"Gamma quotient kernel needs a < b, got a={a}, b={b}")
    if not m >= 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    gap = (b - a) / m
    r = np.asarray(r, dtype=float)
    x = r ** 2
    inside = (r > 0) & (r < 1)
    safe = np.where(inside, x, 0.5)
    values = 2.0 * m * np.exp(-gammaln(gap)) * safe ** a * (1.0 - safe ** m) ** (gap - 1.0)
    result = np.where(inside, values, 0.0)
    return float(result) if result.ndim == 0 else result


def gamma_quotient_check(a: float, b: float, m: float, z: float) -> Dict[str, float]:
    """Numeric ℳ[v](2z) next to Γ((a+z)/m)/Γ((b+z)/m)."""
    numeric = mellin_transform(lambda r: gamma_quotient_kernel(a, b, m, r), 2.0 * z, breakpoints=(1.0,)).real
    exact = math.exp(float(gammaln((a + z) / m) - gammaln((b + z) / m)))
    return {"a": a, "b": b, "m": m, "z": z, "numeric": numeric, "exact": exact,
            "relative_error": abs(numeric - exact) / exact}


# --- Vanishing moments ---

@dataclass(frozen=True)
class MomentReport:
    vanishes: bool
    moments: Tuple[Tuple[int, complex], ...]
    tol: float

    @property
    def max_moment(self) -> float:
        return max((abs(value) for _, value in self.moments), default=0.0)


def vanishing_moment_test(u: HalfLineFunction, a: float, k0: int, K: int, tol: float = config.DEFAULT_TOL,
                          breakpoints: Sequence[float] = ()) -> MomentReport:
    """
    Check |∫₀^∞ u(t) e^{−t} t^{ak} dt| <= tol for k0 <= k <= K.

    Finitely many vanishing moments do not force u = 0; a False result
    refutes it, a True result only fails to.
    """
    if not 0 < a <= 2:
        raise ParameterError(f"moment exponent a must lie in (0, 2], got {a}")
    if k0 < 0 or K < k0:
        raise ParameterError(f"moment range needs 0 <= k0 <= K, got [{k0}, {K}]")
    moments = []
    for k in range(k0, K + 1):
        value = gamma_weighted_integral(lambda t: _scalar(u(t)), a * k + 1.0, breakpoints, what=f"moment k={k}")
        moments.append((k, value))
    vanishes = all(abs(value) <= tol for _, value in moments)
    return MomentReport(vanishes, tuple(moments), tol)


# --- Period scan ---

def period_grid(re_min: float = config.PERIOD_SCAN_GRID["re_min"], re_max: float = config.PERIOD_SCAN_GRID["re_max"],
                steps: int = config.PERIOD_SCAN_GRID["steps"],
                imag: Sequence[float] = config.PERIOD_SCAN_GRID["imag"]) -> List[complex]:
    return [complex(x, y) for y in imag for x in np.linspace(re_min, re_max, steps)]


def period_deviations(f1: Symbol, f2: Symbol, p: SpaceParams, n_range: Tuple[int, int] = config.PERIOD_SCAN_RANGE,
                      grid: Optional[Sequence[complex]] = None) -> Dict[int, float]:
    """sup over the grid of |Ω(f₁,ζ) − Ω(f₂,ζ+n)| / |Ω(f₂,ζ+n)| for each n."""
    lo, hi = n_range
    if lo > hi:
        raise ParameterError(f"empty shift range [{lo}, {hi}]")
    grid = list(grid) if grid is not None else period_grid()
    if min(z.real for z in grid) + lo <= -(p.s + p.d):
        raise ParameterError("period scan grid reaches outside the domain of Omega")
    omega1 = OmegaFunction(f1, p)
    omega2 = OmegaFunction(f2, p)
    deviations = {}
    for n in range(lo, hi + 1):
        worst = 0.0
        for zeta in grid:
            left = omega1(zeta)
            right = omega2(zeta + n)
            scale = abs(right) if abs(right) > 0 else 1.0
            worst = max(worst, abs(left - right) / scale)
        deviations[n] = worst
    return deviations


def period_scan(f1: Symbol, f2: Symbol, p: SpaceParams, n_range: Tuple[int, int] = config.PERIOD_SCAN_RANGE,
                grid: Optional[Sequence[complex]] = None, tol: float = config.PERIOD_SCAN_TOL) -> FrozenSet[int]:
    """Integer shifts n with Ω(f₁,ζ) ≈ Ω(f₂,ζ+n) on the grid."""
    deviations = period_deviations(f1, f2, p, n_range, grid)
    return frozenset(n for n, value in deviations.items() if value <= tol)


def classify_period_set(result: FrozenSet[int], n_range: Tuple[int, int]) -> str:
    lo, hi = n_range
    if not result:
        return "empty"
    if set(result) == set(range(lo, hi + 1)):
        return "full"
    if len(result) == 1:
        return "singleton"
    return "other"


# --- Partial fractions ---

def partial_fraction_kernel(coefficients: Sequence[complex], q: int) -> Polynomial:
    """
    Polynomial p̃ with p(ζ)/((ζ+1)…(ζ+q)) = ℳ[p̃ χ_{[0,1]}](2ζ+2).

    coefficients are those of p in increasing degree.
    """
    if int(q) != q or q < 1:
        raise ParameterError(f"q must be a positive integer, got {q!r}")
    p = Polynomial(np.asarray(coefficients, dtype=complex)).trim()
    if p.degree() >= q and np.any(p.coef != 0):
        raise ParameterError(f"partial fractions need deg p < q, got deg p = {p.degree()}, q = {q}")
    # 1/(ζ+i) = 2ℳ[x^{2i−2}χ](2ζ+2)
    kernel = np.zeros(2 * q - 1, dtype=complex)
    for i in range(1, q + 1):
        residue = p(-i) / np.prod([j - i for j in range(1, q + 1) if j != i])
        kernel[2 * i - 2] = 2.0 * residue
    return Polynomial(kernel)
