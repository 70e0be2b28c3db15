"""
Toeplitz symbols: parsed expressions and catalog items, their radiality and
growth metadata, and the transforms V_t, radialization and 𝒢.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, loggamma, roots_jacobi
from scipy.stats import unitary_group

import config
from modules.errors import GrowthError, ParameterError, UnsupportedDimensionError
from modules.quadrature import QuadratureGrid, build_angular_rule, gamma_weighted_integral
from modules.space_core import SpaceParams
from modules.symbol_parser import BinaryOp, Call, Constant, Coordinate, Negate, Node, Power, Radius, parse_expression

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


class Radiality(Enum):
    RADIAL = "radial"
    ROTATION_INVARIANT = "rotation_invariant"
    GENERAL = "general"


class GrowthKind(Enum):
    POLYNOMIAL = "polynomial"
    SUB_DOUBLE_EXPONENTIAL = "sub_double_exponential"
    D_C_BOUNDED = "d_c_bounded"
    UNKNOWN = "unknown"


def get_radiality_description(radiality: Radiality) -> str:
    descriptions = {
        Radiality.RADIAL: "Depends only on |z|; Toeplitz matrix is diagonal.",
        Radiality.ROTATION_INVARIANT: "g(e^{iθ}z) = g(z); Toeplitz matrix keeps total degree.",
        Radiality.GENERAL: "No invariance detected; entries may couple different degrees.",
    }
    return descriptions.get(radiality, "Unknown radiality")


@dataclass(frozen=True)
class Growth:
    kind: GrowthKind
    c: Optional[float] = None

    def __str__(self):
        if self.kind is GrowthKind.D_C_BOUNDED:
            return f"d_c_bounded({self.c:g})"
        return self.kind.value


@dataclass(frozen=True)
class RadialFamily:
    """
    coefficient · r^power · e^{rate·r^{rate_power}}.

    Ω and 𝒢 have Gamma closed forms when rate = 0 or rate_power = 2m.
    """
    coefficient: complex = 1.0
    power: float = 0.0
    rate: complex = 0.0
    rate_power: Optional[float] = None

    @property
    def is_constant(self) -> bool:
        return self.power == 0 and self.rate == 0

    def applies_to(self, m: float) -> bool:
        return self.rate == 0 or self.rate_power == 2 * m

    def times(self, other: "RadialFamily") -> Optional["RadialFamily"]:
        if self.rate != 0 and other.rate != 0 and self.rate_power != other.rate_power:
            return None
        rate_power = self.rate_power if self.rate != 0 else other.rate_power
        return RadialFamily(self.coefficient * other.coefficient, self.power + other.power,
                            self.rate + other.rate, rate_power)

    def power_of(self, exponent: int) -> Optional["RadialFamily"]:
        if self.coefficient == 0 and exponent < 0:
            return None
        return RadialFamily(self.coefficient ** exponent, self.power * exponent, self.rate * exponent,
                            self.rate_power)

    def scaled(self, t: float) -> "RadialFamily":
        """The family of r -> f(t r)."""
        rate = self.rate * t ** self.rate_power if self.rate != 0 else 0.0
        return replace(self, coefficient=self.coefficient * t ** self.power, rate=rate)

    def conjugate(self) -> "RadialFamily":
        return replace(self, coefficient=np.conj(self.coefficient), rate=np.conj(self.rate))


RadialTerms = Tuple[RadialFamily, ...]


def _collect(terms) -> RadialTerms:
    """Merge like terms and drop zero ones."""
    merged = {}
    for term in terms:
        key = (term.power, term.rate, term.rate_power if term.rate != 0 else None)
        merged[key] = merged.get(key, 0.0) + term.coefficient
    return tuple(RadialFamily(c, power, rate, rate_power)
                 for (power, rate, rate_power), c in merged.items() if c != 0)


def _times_terms(a: RadialTerms, b: RadialTerms) -> Optional[RadialTerms]:
    products = [x.times(y) for x in a for y in b]
    if any(t is None for t in products) or len(products) > config.MAX_RADIAL_TERMS:
        return None
    return _collect(products)


@dataclass(frozen=True, eq=False)
class Symbol:
    """
    Evaluable function on ℂ^d with metadata.

    degree_window bounds |Σν − Σκ| over nonzero matrix entries (None: unbounded).
    breakpoints lists radii where the radial profile is not smooth.
    """
    label: str
    d: int
    evaluator: Evaluator
    radiality: Radiality
    growth: Growth
    degree_window: Optional[int]
    closed_form: Optional[RadialFamily] = None
    breakpoints: Tuple[float, ...] = ()
    radial_terms: Optional[RadialTerms] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.d)
        radius = np.sqrt(np.sum(np.abs(points) ** 2, axis=1))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.asarray(self.evaluator(points, radius), dtype=complex)
        return np.array(np.broadcast_to(values, radius.shape))

    def radial_profile(self, r) -> np.ndarray:
        """g(r, 0, …, 0); meaningful for radial symbols."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        points = np.zeros((r.size, self.d), dtype=complex)
        points[:, 0] = r
        return self(points)

    @property
    def is_radial(self) -> bool:
        return self.radiality is Radiality.RADIAL

    @property
    def constant_value(self) -> Optional[complex]:
        if self.closed_form is not None and self.closed_form.is_constant:
            return complex(self.closed_form.coefficient)
        return None

    @property
    def closed_terms(self) -> Optional[RadialTerms]:
        """The radial profile as a finite sum of families, when known."""
        if self.radial_terms is not None:
            return self.radial_terms
        if self.closed_form is not None:
            return (self.closed_form,)
        return None

    def conjugate(self) -> "Symbol":
        evaluator = self.evaluator
        family = None if self.closed_form is None else self.closed_form.conjugate()
        terms = None if self.radial_terms is None else tuple(t.conjugate() for t in self.radial_terms)
        return replace(
            self,
            label=f"conj({self.label})",
            evaluator=lambda points, radius: np.conj(evaluator(points, radius)),
            closed_form=family,
            radial_terms=terms,
        )

    def describe(self) -> dict:
        return {
            "label": self.label,
            "radiality": self.radiality.value,
            "radiality_note": get_radiality_description(self.radiality),
            "growth": str(self.growth),
            "degree_window": self.degree_window,
        }


# --- Catalog ---

def _bounded() -> Growth:
    return Growth(GrowthKind.POLYNOMIAL)


def constant(value: complex, d: int) -> Symbol:
    value = complex(value)
    return Symbol(
        label=f"{value.real:g}" if value.imag == 0 else f"{value}",
        d=d,
        evaluator=lambda points, radius: np.full(radius.shape, value, dtype=complex),
        radiality=Radiality.RADIAL,
        growth=_bounded(),
        degree_window=0,
        closed_form=RadialFamily(coefficient=value),
    )


def radial_power(power: float, d: int) -> Symbol:
    """r^p."""
    if power < 0:
        raise ParameterError(f"radial power must be non-negative, got {power}")
    return Symbol(
        label=f"r^{power:g}",
        d=d,
        evaluator=lambda points, radius: radius.astype(complex) ** power,
        radiality=Radiality.RADIAL,
        growth=_bounded() if power == 0 else Growth(GrowthKind.POLYNOMIAL),
        degree_window=0,
        closed_form=RadialFamily(power=float(power)),
    )


def radial_exponential(rate: complex, p: SpaceParams) -> Symbol:
    """e^{λ r^{2m}} with Re λ < α/2."""
    rate = complex(rate)
    if not rate.real < 0.5 * p.alpha:
        raise ParameterError(f"exponential symbol needs Re(lambda) < alpha/2 = {0.5 * p.alpha:g}, got {rate}")
    m = p.m
    growth = _bounded() if rate.real <= 0 else Growth(GrowthKind.D_C_BOUNDED, rate.real / p.alpha)
    return Symbol(
        label=f"exp({rate:g}*r^{2 * m:g})",
        d=p.d,
        evaluator=lambda points, radius: np.exp(rate * radius ** (2 * m)),
        radiality=Radiality.RADIAL,
        growth=growth,
        degree_window=0,
        closed_form=RadialFamily(rate=rate, rate_power=2.0 * m),
    )


def monomial(k: Sequence[int], n: Sequence[int]) -> Symbol:
    """z^k conj(z)^n."""
    k = tuple(int(v) for v in k)
    n = tuple(int(v) for v in n)
    if len(k) != len(n) or any(v < 0 for v in k + n):
        raise ParameterError(f"monomial exponents must be non-negative and of equal length, got {k}, {n}")
    d = len(k)
    shift = sum(k) - sum(n)
    if k == n and d == 1:
        radiality = Radiality.RADIAL
    elif shift == 0:
        radiality = Radiality.ROTATION_INVARIANT
    else:
        radiality = Radiality.GENERAL
    ke = np.array(k)
    ne = np.array(n)

    def evaluate(points, radius):
        return np.prod(points ** ke[None, :] * np.conj(points) ** ne[None, :], axis=1)

    family = RadialFamily(power=2.0 * k[0]) if radiality is Radiality.RADIAL else None
    return Symbol(f"z^{k} conj(z)^{n}", d, evaluate, radiality, Growth(GrowthKind.POLYNOMIAL),
                  abs(shift), closed_form=family)


def phase_symbol(N: int, d: int) -> Symbol:
    """z₁^N/|z|^N (0 at the origin); invariant under z -> e^{2πi/N} z only."""
    if N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")

    def evaluate(points, radius):
        safe = np.where(radius == 0, 1.0, radius)
        return np.where(radius == 0, 0.0, (points[:, 0] / safe) ** N)

    return Symbol(f"z1^{N}/|z|^{N}", d, evaluate, Radiality.GENERAL, _bounded(), N)


def indicator_ball(R: float, d: int) -> Symbol:
    """χ_{r ≤ R}."""
    if not R > 0:
        raise ParameterError(f"indicator radius must be positive, got {R}")
    return Symbol(
        label=f"chi(r<={R:g})",
        d=d,
        evaluator=lambda points, radius: (radius <= R).astype(complex),
        radiality=Radiality.RADIAL,
        growth=_bounded(),
        degree_window=0,
        breakpoints=(float(R),),
    )


def multiply(a: Symbol, b: Symbol) -> Symbol:
    """Pointwise product; radial only when both factors are."""
    if a.d != b.d:
        raise ParameterError(f"cannot multiply symbols on C^{a.d} and C^{b.d}")
    if a.is_radial and b.is_radial:
        radiality = Radiality.RADIAL
    elif a.radiality is not Radiality.GENERAL and b.radiality is not Radiality.GENERAL:
        radiality = Radiality.ROTATION_INVARIANT
    else:
        radiality = Radiality.GENERAL
    window = None if a.degree_window is None or b.degree_window is None else a.degree_window + b.degree_window
    family = None
    if a.closed_form is not None and b.closed_form is not None and radiality is Radiality.RADIAL:
        family = a.closed_form.times(b.closed_form)
    terms = None
    if a.closed_terms is not None and b.closed_terms is not None and radiality is Radiality.RADIAL:
        terms = _times_terms(a.closed_terms, b.closed_terms)
    if a.growth.kind is GrowthKind.POLYNOMIAL and b.growth.kind is GrowthKind.POLYNOMIAL:
        growth = _bounded()
    else:
        growth = Growth(GrowthKind.UNKNOWN)
    ea, eb = a.evaluator, b.evaluator
    return Symbol(
        label=f"({a.label})*({b.label})",
        d=a.d,
        evaluator=lambda points, radius: ea(points, radius) * eb(points, radius),
        radiality=radiality,
        growth=growth,
        degree_window=window,
        closed_form=family,
        breakpoints=tuple(sorted(set(a.breakpoints) | set(b.breakpoints))),
        radial_terms=terms,
    )


# --- Parsing ---

def _sample_points(d: int) -> np.ndarray:
    rng = np.random.default_rng(config.SAMPLE_SEED)
    shape = (config.SAMPLE_POINTS, d)
    return 1.5 * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _agrees(a: np.ndarray, b: np.ndarray) -> bool:
    finite = np.isfinite(a) & np.isfinite(b)
    if not np.any(finite):
        return True
    scale = np.maximum(1.0, np.abs(a[finite]))
    return bool(np.all(np.abs(a[finite] - b[finite]) <= config.RADIALITY_TOL * scale))


def check_radiality(symbol: Symbol) -> bool:
    """Numerical spot check of the radiality tag on seeded sample points."""
    if symbol.radiality is Radiality.GENERAL:
        return True
    points = _sample_points(symbol.d)
    base = symbol(points)
    rng = np.random.default_rng(config.SAMPLE_SEED + 1)
    for _ in range(4):
        if symbol.radiality is Radiality.RADIAL:
            if symbol.d == 1:
                unitary = np.array([[np.exp(1j * rng.uniform(0, 2 * np.pi))]])
            else:
                unitary = unitary_group.rvs(symbol.d, random_state=rng)
            rotated = points @ unitary.T
        else:
            rotated = np.exp(1j * rng.uniform(0, 2 * np.pi)) * points
        if not _agrees(base, symbol(rotated)):
            return False
    return True


def _closed_form(node: Node) -> Optional[RadialFamily]:
    """Recognize products and integer powers of constants, r and exp(c·r^q)."""
    if isinstance(node, Constant):
        return RadialFamily(coefficient=node.value)
    if isinstance(node, Radius):
        return RadialFamily(power=1.0)
    if isinstance(node, Negate):
        inner = _closed_form(node.operand)
        return None if inner is None else replace(inner, coefficient=-inner.coefficient)
    if isinstance(node, Power):
        inner = _closed_form(node.base)
        return None if inner is None else inner.power_of(node.exponent)
    if isinstance(node, BinaryOp) and node.op in "*/":
        left = _closed_form(node.left)
        right = _closed_form(node.right)
        if left is None or right is None:
            return None
        if node.op == "/":
            right = right.power_of(-1)
        return None if right is None else left.times(right)
    if isinstance(node, Call) and node.name == "exp":
        inner = _closed_form(node.argument)
        if inner is None or inner.rate != 0:
            return None
        if inner.power == 0:
            return RadialFamily(coefficient=complex(np.exp(inner.coefficient)))
        return RadialFamily(rate=inner.coefficient, rate_power=inner.power)
    return None


def _negated(terms: RadialTerms) -> RadialTerms:
    return tuple(replace(t, coefficient=-t.coefficient) for t in terms)


def _exp_terms(inner: RadialTerms) -> Optional[RadialTerms]:
    result: RadialTerms = (RadialFamily(),)
    for term in inner:
        if term.rate != 0:
            return None
        if term.power == 0:
            factor = RadialFamily(coefficient=complex(np.exp(term.coefficient)))
        else:
            factor = RadialFamily(rate=term.coefficient, rate_power=term.power)
        result = _times_terms(result, (factor,))
        if result is None:
            return None
    return result


def _profile_terms(node: Node) -> Optional[RadialTerms]:
    """
    The profile r -> g(r, 0, …, 0) as a finite sum of families, or None.

    A radial symbol is determined by this profile, so Ω and 𝒢 of such a
    symbol are sums of Gamma closed forms.
    """
    if isinstance(node, Constant):
        return _collect([RadialFamily(coefficient=node.value)])
    if isinstance(node, Radius):
        return (RadialFamily(power=1.0),)
    if isinstance(node, Coordinate):
        return (RadialFamily(power=1.0),) if node.index == 1 else ()
    if isinstance(node, Negate):
        inner = _profile_terms(node.operand)
        return None if inner is None else _negated(inner)
    if isinstance(node, BinaryOp):
        left = _profile_terms(node.left)
        right = _profile_terms(node.right)
        if left is None or right is None:
            return None
        if node.op == "+":
            return _collect(left + right)
        if node.op == "-":
            return _collect(left + _negated(right))
        if node.op == "/":
            inverse = right[0].power_of(-1) if len(right) == 1 else None
            if inverse is None:
                return None
            right = (inverse,)
        return _times_terms(left, right)
    if isinstance(node, Power):
        base = _profile_terms(node.base)
        if base is None:
            return None
        if node.exponent < 0:
            single = base[0].power_of(node.exponent) if len(base) == 1 else None
            return None if single is None else (single,)
        result: Optional[RadialTerms] = (RadialFamily(),)
        for _ in range(node.exponent):
            result = _times_terms(result, base)
            if result is None:
                return None
        return result
    if isinstance(node, Call):
        inner = _profile_terms(node.argument)
        if inner is None:
            return None
        if node.name == "conj":
            return tuple(t.conjugate() for t in inner)
        if node.name == "exp":
            return _exp_terms(inner)
        real = all(complex(t.coefficient).imag == 0 and complex(t.rate).imag == 0 for t in inner)
        if node.name == "re":
            return inner if real else None
        if node.name == "im":
            return () if real else None
        if len(inner) > 1:
            return None
        return tuple(RadialFamily(abs(t.coefficient), t.power, complex(t.rate).real, t.rate_power) for t in inner)
    return None


def parse_symbol(text: str, d: int) -> Symbol:
    """
    Parse symbol text into a Symbol.

    Radiality is read off the phase charges of the expression and confirmed
    numerically; a failed confirmation downgrades the tag to general.
    """
    node = parse_expression(text, d)
    nodes = list(node.walk())
    uses_coordinates = any(isinstance(n, Coordinate) for n in nodes)
    uses_radius = any(isinstance(n, Radius) for n in nodes)
    charges = node.charges(d)

    if not uses_coordinates:
        radiality = Radiality.RADIAL
    elif charges is not None and all(sum(c) == 0 for c in charges):
        # in one variable rotation invariance is radiality
        radiality = Radiality.RADIAL if d == 1 else Radiality.ROTATION_INVARIANT
    else:
        radiality = Radiality.GENERAL

    window = None if charges is None else max(abs(sum(c)) for c in charges)
    has_exp = any(getattr(n, "name", None) == "exp" for n in nodes)
    growth = Growth(GrowthKind.UNKNOWN) if has_exp else Growth(GrowthKind.POLYNOMIAL)

    family = None if uses_coordinates else _closed_form(node)
    if family is None and not uses_coordinates and not uses_radius:
        value = complex(node.evaluate(np.zeros((1, d), dtype=complex), np.zeros(1))[0])
        family = RadialFamily(coefficient=value)

    symbol = Symbol(
        label=text.strip(),
        d=d,
        evaluator=node.evaluate,
        radiality=radiality,
        growth=growth,
        degree_window=window,
        closed_form=family,
    )
    if not check_radiality(symbol):
        logger.warning("symbol %r failed the %s spot check, treating it as general",
                       symbol.label, radiality.value)
        # the charges behind the window were wrong too
        symbol = replace(symbol, radiality=Radiality.GENERAL, degree_window=None)
    elif symbol.is_radial:
        symbol = replace(symbol, radial_terms=_profile_terms(node))
    return symbol


# --- Growth ---

@dataclass(frozen=True)
class SamplingGrid:
    r_max: float = 10.0
    n_r: int = 401
    n_theta: int = 16
    n_polar: int = 9


def _sampling_directions(d: int, grid: SamplingGrid) -> np.ndarray:
    phases = np.exp(2j * np.pi * np.arange(grid.n_theta) / grid.n_theta)
    if d == 1:
        return phases.reshape(-1, 1)
    if d == 2:
        x = np.linspace(0.0, 1.0, grid.n_polar)
        xs, t1, t2 = np.meshgrid(x, phases, phases, indexing="ij")
        return np.stack([np.sqrt(xs) * t1, np.sqrt(1.0 - xs) * t2], axis=-1).reshape(-1, 2)
    rng = np.random.default_rng(config.SAMPLE_SEED)
    raw = rng.standard_normal((256, d)) + 1j * rng.standard_normal((256, d))
    return np.vstack([np.eye(d), raw / np.linalg.norm(raw, axis=1, keepdims=True)])


def dc_norm_estimate(g: Symbol, c: float, p: SpaceParams, grid: Optional[SamplingGrid] = None) -> float:
    """max |g(z)| e^{−c|z|^{2m}} over a sample grid; a lower bound for ‖g‖_{D_c}."""
    if c < 0:
        raise ParameterError(f"c must be non-negative, got {c}")
    grid = grid or SamplingGrid()
    directions = _sampling_directions(p.d, grid)
    best = 0.0
    for r in np.linspace(0.0, grid.r_max, grid.n_r):
        values = np.abs(g(r * directions))
        values = values[np.isfinite(values)]
        if values.size:
            best = max(best, float(np.max(values)) * math.exp(-c * r ** (2 * p.m)))
    return best


@dataclass(frozen=True)
class ScaleIndex:
    """c_j = 1/2 − 1/(2j+2), the exponents of the H_j scale."""
    j: int

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 0:
            raise ParameterError(f"scale index must be a non-negative integer, got {self.j!r}")

    def exact(self) -> Fraction:
        return Fraction(1, 2) - Fraction(1, 2 * self.j + 2)

    @property
    def c(self) -> float:
        return float(self.exact())

    def next(self) -> "ScaleIndex":
        return ScaleIndex(self.j + 1)

    def recurrence_holds(self) -> bool:
        """c_{j+1} = 1/(4(1−c_j)), in exact arithmetic."""
        return self.next().exact() == 1 / (4 * (1 - self.exact()))


def scale_norm_estimate(g: Symbol, j: int, p: SpaceParams, grid: Optional[SamplingGrid] = None) -> float:
    return dc_norm_estimate(g, ScaleIndex(j).c, p, grid)


def suggest_v_scale(g: Symbol, p: SpaceParams) -> float:
    """A t with V_t g decaying: t^{2m} > 1/(1−c) for D_c-bounded g."""
    kind = g.growth.kind
    if kind is GrowthKind.D_C_BOUNDED and g.growth.c is not None and g.growth.c < 1:
        return (2.0 / (1.0 - g.growth.c)) ** (1.0 / (2.0 * p.m))
    if kind in (GrowthKind.POLYNOMIAL, GrowthKind.SUB_DOUBLE_EXPONENTIAL):
        return 2.0 ** (1.0 / (2.0 * p.m))
    return 2.0


# --- Transforms ---

def _v_growth(growth: Growth, t: float, m: float) -> Growth:
    gain = 1.0 - t ** (2 * m)
    if growth.kind is GrowthKind.UNKNOWN:
        return growth
    c = growth.c if growth.kind is GrowthKind.D_C_BOUNDED else 0.0
    shifted = c * t ** (2 * m) + gain
    if shifted <= 0:
        return Growth(GrowthKind.POLYNOMIAL)
    return Growth(GrowthKind.D_C_BOUNDED, shifted)


def v_transform(g: Symbol, t: float, p: SpaceParams) -> Symbol:
    """V_t g(x) = g(tx) e^{(1−t^{2m})|x|^{2m}}."""
    if not t > 0:
        raise ParameterError(f"V_t needs t > 0, got {t}")
    if t == 1:
        return g
    m = p.m
    gain = 1.0 - t ** (2 * m)

    def evaluate(points, radius):
        return g(t * points) * np.exp(gain * radius ** (2 * m))

    damping = RadialFamily(rate=gain, rate_power=2.0 * m)
    family = None if g.closed_form is None else g.closed_form.scaled(t).times(damping)
    terms = None
    if g.radial_terms is not None:
        terms = _times_terms(tuple(term.scaled(t) for term in g.radial_terms), (damping,))
    return Symbol(
        label=f"V_{t:g}[{g.label}]",
        d=g.d,
        evaluator=evaluate,
        radiality=g.radiality,
        growth=_v_growth(g.growth, t, m),
        degree_window=g.degree_window,
        closed_form=family,
        breakpoints=tuple(b / t for b in g.breakpoints),
        radial_terms=terms,
    )


def radialize(g: Symbol, r: float, n_theta: int = config.DEFAULT_N_THETA) -> complex:
    """(1/π) ∫₀^{2π} g(re^{iθ}) dθ by the trapezoid rule."""
    if g.d != 1:
        raise UnsupportedDimensionError(f"radialization is defined for d=1, got d={g.d}")
    rule = build_angular_rule(n_theta)
    values = g((r * np.exp(1j * rule.nodes)).reshape(-1, 1))
    return complex(np.sum(rule.weights * values) / math.pi)


def _check_transform_point(z: Sequence[complex], d: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size != d:
        raise ParameterError(f"transform point has {z.size} coordinates, expected d={d}")
    if np.any(z.real < 0):
        raise ParameterError(f"transform point must satisfy Re z_j >= 0, got {z}")
    return z


def _radial_transform(g: Symbol, z: np.ndarray, p: SpaceParams) -> complex:
    """𝒢 of a radial symbol in any d via the Dirichlet integral on the sphere."""
    d, m, s = p.d, p.m, p.s
    total = complex(np.sum(z))
    a = (d + s + total) / m
    log_factor = (
        float(gammaln(d)) + complex(np.sum(loggamma(1.0 + z)))
        - complex(loggamma(d + total)) - float(gammaln((d + s) / m))
    )
    terms = g.closed_terms
    if terms is not None and all(family.applies_to(m) for family in terms):
        integral = 0j
        for family in terms:
            shift = family.power / (2 * m)
            if not complex(family.rate).real < 1:
                raise GrowthError(f"{g.label} grows too fast for the transform")
            integral += (family.coefficient * np.exp(complex(loggamma(a + shift)))
                         * np.exp(-(a + shift) * np.log(1.0 - complex(family.rate))))
    else:
        breaks = [b ** (2 * m) for b in g.breakpoints]
        integral = gamma_weighted_integral(
            lambda t: g.radial_profile(t ** (1.0 / (2 * m)))[0], a, breaks, what=f"G[{g.label}]")
    return complex(np.exp(log_factor) * integral)


def g_transform(g: Symbol, z: Sequence[complex], p: SpaceParams, grid: Optional[QuadratureGrid] = None) -> complex:
    """
    𝒢g(z) = ∫ g(x) |x₁|^{2z₁}…|x_d|^{2z_d} dμ_{m,1,s}(x).

    The radial variable is integrated adaptively; angular variables use the
    trapezoid rule (n_theta) and, for d = 2, Gauss–Jacobi in x = |x₁|²/|x|²
    (n_polar). Radial symbols reduce to a one-dimensional integral in any d.
    """
    p = p.with_alpha(1.0)
    z = _check_transform_point(z, p.d)
    if g.is_radial:
        return _radial_transform(g, z, p)
    if p.d > 2:
        raise UnsupportedDimensionError(f"G transform of a non-radial symbol needs d <= 2, got d={p.d}")
    grid = grid or QuadratureGrid.for_dimension(p.d)
    d, m, s = p.d, p.m, p.s
    total = complex(np.sum(z))
    phases = np.exp(1j * build_angular_rule(grid.n_theta).nodes)

    if d == 1:
        directions = phases.reshape(-1, 1)
        weights = np.full(phases.size, 1.0 / phases.size, dtype=complex)
    else:
        # x^{z1}(1−x)^{z2} dx: real parts in the Jacobi weight, imaginary parts on the nodes
        t, w = roots_jacobi(grid.n_polar, z[1].real, z[0].real)
        x = 0.5 * (t + 1.0)
        wx = w * 0.5 ** (z[0].real + z[1].real + 1.0)
        wx = wx * x ** (1j * z[0].imag) * (1.0 - x) ** (1j * z[1].imag)
        xs, t1, t2 = np.meshgrid(x, phases, phases, indexing="ij")
        directions = np.stack([np.sqrt(xs) * t1, np.sqrt(1.0 - xs) * t2], axis=-1).reshape(-1, 2)
        weights = np.broadcast_to(wx[:, None, None], xs.shape).reshape(-1) / phases.size ** 2
        # the Dirichlet normalization Γ(d) = 1 for d = 2

    def profile(tau: float) -> complex:
        rho = tau ** (1.0 / (2 * m))
        return complex(np.sum(weights * g(rho * directions)))

    a = (d + s + total) / m
    breaks = [b ** (2 * m) for b in g.breakpoints]
    integral = gamma_weighted_integral(profile, a, breaks, what=f"G[{g.label}]")
    return complex(integral / math.exp(float(gammaln((d + s) / m))))
