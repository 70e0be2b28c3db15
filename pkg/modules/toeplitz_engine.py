"""
Truncated Toeplitz matrices on the graded monomial basis and the residuals
built from them: commutators, zero products, the equation 𝓔(f₁, f₂) and
the rotation counterexample.
"""
import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from modules.errors import ParameterError, UnsupportedDimensionError
from modules.mellin import OmegaFunction
from modules.quadrature import ProductRule, QuadratureGrid, build_product_rule, check_finite
from modules.space_core import (
    MultiIndex,
    SpaceParams,
    evaluate_basis,
    graded_basis,
    log_moment,
    multi_index_count,
)
from modules.special_functions import kernel_matrix
from modules.symbols import Symbol, g_transform, monomial, multiply, phase_symbol, radial_exponential

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedOperator:
    """M[ν][κ] = ⟨T_g e_κ, e_ν⟩ for Σκ, Σν <= degree, rows and columns in graded order."""
    params: SpaceParams
    degree: int
    basis: Tuple[MultiIndex, ...]
    matrix: np.ndarray
    label: str
    grid: Optional[QuadratureGrid] = None

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([nu.total_degree for nu in self.basis])

    def block(self, total: int) -> np.ndarray:
        """Square block of rows and columns with Σν = total."""
        mask = self.degrees == total
        return self.matrix[np.ix_(mask, mask)]

    def interior(self, max_degree: int) -> "TruncatedOperator":
        if max_degree < 0 or max_degree > self.degree:
            raise ParameterError(f"interior degree must lie in [0, {self.degree}], got {max_degree}")
        n = multi_index_count(self.params.d, max_degree)
        return TruncatedOperator(self.params, max_degree, self.basis[:n], self.matrix[:n, :n],
                                 self.label, self.grid)

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.params, self.degree, self.basis, self.matrix.conj().T,
                                 f"conj({self.label})", self.grid)

    def records(self, threshold: float = 0.0) -> List[dict]:
        """Entries above threshold as flat rows."""
        rows = []
        for i, nu in enumerate(self.basis):
            for j, kappa in enumerate(self.basis):
                value = self.matrix[i, j]
                if abs(value) > threshold:
                    rows.append({"nu": list(nu), "kappa": list(kappa), "value": complex(value)})
        return rows


@dataclass(frozen=True)
class ResidualReport:
    frobenius_residual: float
    max_entry_residual: float
    degree: int
    interior_degree: int
    grid: Optional[dict] = None
    blocks: Dict[int, float] = field(default_factory=dict)
    raw_frobenius: float = 0.0
    scale: float = 1.0
    caveat: Optional[str] = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "frobenius_residual": self.frobenius_residual,
            "max_entry_residual": self.max_entry_residual,
            "raw_frobenius": self.raw_frobenius,
            "scale": self.scale,
            "degree": self.degree,
            "interior_degree": self.interior_degree,
            "grid": self.grid,
            "blocks": {str(k): v for k, v in sorted(self.blocks.items())},
            "caveat": self.caveat,
            **self.extras,
        }


def _zero_report(degree: int, interior: int, grid: Optional[QuadratureGrid], reason: str) -> ResidualReport:
    return ResidualReport(0.0, 0.0, degree, interior, grid.as_dict() if grid else None,
                          scale=0.0, extras={"short_circuit": reason})


# --- Matrices ---

def _assemble_chunk(g: Symbol, p: SpaceParams, basis: Sequence[MultiIndex], rule: ProductRule,
                    start: int, stop: int) -> np.ndarray:
    block = np.zeros((len(basis), len(basis)), dtype=complex)
    for points, weights in rule.shells(start, stop):
        values = g(points)
        check_finite(values, points)
        vectors = evaluate_basis(p, basis, points)
        block += (vectors.conj() * weights[:, None]).T @ (values[:, None] * vectors)
    return block


def build_matrix(g: Symbol, p: SpaceParams, D: int, grid: Optional[QuadratureGrid] = None,
                 force_quadrature: bool = False) -> TruncatedOperator:
    """
    Truncated matrix of T_g by product quadrature.

    Radial symbols go to diagonal_radial (any d) unless force_quadrature.
    Radial shells are summed in fixed-size chunks on a thread pool; chunk
    results are added in order so the matrix does not depend on the thread count.

    Raises:
        UnsupportedDimensionError: general symbol with d > 2
        DivergenceError: g is not finite at a quadrature node
    """
    if g.d != p.d:
        raise ParameterError(f"symbol {g.label} lives on C^{g.d}, space has d={p.d}")
    if g.is_radial and not force_quadrature:
        return diagonal_radial(g, p, D)
    if p.d > 2:
        raise UnsupportedDimensionError(f"Toeplitz matrices of non-radial symbols need d <= 2, got d={p.d}")
    grid = grid or QuadratureGrid.for_dimension(p.d)
    basis = tuple(graded_basis(p, D))
    rule = build_product_rule(p, grid)
    chunks = [(start, min(start + config.ASSEMBLY_CHUNK, rule.radial.size))
              for start in range(0, rule.radial.size, config.ASSEMBLY_CHUNK)]
    workers = min(config.get_thread_count(), len(chunks))
    logger.debug("assembling %s: %d basis vectors, %d nodes, %d workers", g.label, len(basis), rule.size, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: _assemble_chunk(g, p, basis, rule, *c), chunks))
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)
    for part in parts:
        matrix += part
    return TruncatedOperator(p, int(D), basis, matrix, g.label, grid)


def diagonal_radial(f: Symbol, p: SpaceParams, D: int) -> TruncatedOperator:
    """T_f e_ν = Ω(f, Σν) e_ν."""
    if not f.is_radial:
        raise ParameterError(f"diagonal_radial needs a radial symbol, got {f.label} ({f.radiality.value})")
    basis = tuple(graded_basis(p, D))
    eigenvalue = OmegaFunction(f, p)
    diagonal = np.array([eigenvalue.eigenvalue(nu) for nu in basis], dtype=complex)
    return TruncatedOperator(p, int(D), basis, np.diag(diagonal), f.label)


def _alias_log_bound(p: SpaceParams, radius: float, n_theta: int) -> float:
    """
    Log of the kernel term that n_theta angles fold back onto a frequency.

    The term of frequency n + n_theta contributes |z|^{n+n_theta} S(n + n_theta/2)/S(n + n_theta),
    largest at n = 0 up to the polynomial allowance |z|^n.
    """
    if radius == 0.0:
        return -math.inf
    base = p.d + p.s
    return (n_theta * math.log(radius * p.alpha ** (0.5 / p.m))
            + math.lgamma((0.5 * n_theta + base) / p.m) - math.lgamma((n_theta + base) / p.m)
            + config.PROJECTION_DEGREE_ALLOWANCE * math.log(max(1.0, radius)))


def projection_grid(p: SpaceParams, z: Sequence[complex], grid: Optional[QuadratureGrid] = None,
                    tol: float = config.DEFAULT_TOL) -> QuadratureGrid:
    """grid with n_theta doubled until the aliased kernel terms at z fall below tol."""
    grid = grid or QuadratureGrid.for_dimension(p.d)
    radius = float(np.linalg.norm(np.asarray(z, dtype=complex)))
    n_theta = grid.n_theta
    while _alias_log_bound(p, radius, n_theta) > math.log(tol):
        if 2 * n_theta > config.PROJECTION_MAX_N_THETA:
            logger.warning("angular aliasing at |z|=%.3g stays above %.1e with n_theta=%d", radius, tol, n_theta)
            break
        n_theta *= 2
    if n_theta != grid.n_theta:
        logger.debug("projection at |z|=%.3g uses n_theta=%d", radius, n_theta)
    return replace(grid, n_theta=n_theta)


def project_pointwise(u: Symbol, z: Sequence[complex], p: SpaceParams,
                      grid: Optional[QuadratureGrid] = None) -> complex:
    """
    P u(z) = ∫ K(z, ξ) u(ξ) dμ(ξ).

    The angular rule grows with |z| so that kernel frequencies beyond the
    trapezoid's exactness do not alias back.
    """
    if p.d > 2:
        raise UnsupportedDimensionError(f"pointwise projection needs d <= 2, got d={p.d}")
    z = np.asarray(z, dtype=complex).reshape(-1)
    rule = build_product_rule(p, projection_grid(p, z, grid))
    total = 0j
    for points, weights in rule.shells():
        values = u(points) * kernel_matrix(p, z, points)
        check_finite(values, points)
        total += np.sum(weights * values)
    return complex(total)


# --- Residuals ---

def _interior_degree(D: int, *symbols: Symbol) -> Tuple[int, Optional[str]]:
    # an entry of T_f T_g is complete once one factor cannot leave the truncation
    windows = [s.degree_window for s in symbols if s.degree_window is not None]
    if not windows:
        unbounded = ", ".join(s.label for s in symbols)
        caveat = f"unbounded degree shift in {unbounded}; residual on the lower half of the truncation"
        logger.warning("%s", caveat)
        return D // 2, caveat
    interior = D - min(windows)
    if interior < 0:
        raise ParameterError(f"degree {D} is smaller than the degree window {min(windows)}")
    return interior, None


def _centered(matrix: np.ndarray) -> np.ndarray:
    n = matrix.shape[0]
    return matrix - np.trace(matrix) / n * np.eye(n)


def _block_norms(residual: np.ndarray, degrees: np.ndarray) -> Dict[int, float]:
    return {int(k): float(np.linalg.norm(residual[degrees == k, :])) for k in np.unique(degrees)}


def _report(residual: np.ndarray, scale: float, operator: TruncatedOperator, interior: int,
            caveat: Optional[str], **extras) -> ResidualReport:
    raw = float(np.linalg.norm(residual))
    divisor = scale if scale > 1e-300 else 1.0
    return ResidualReport(
        frobenius_residual=raw / divisor,
        max_entry_residual=float(np.max(np.abs(residual), initial=0.0)) / divisor,
        degree=operator.degree,
        interior_degree=interior,
        grid=operator.grid.as_dict() if operator.grid else None,
        blocks={k: v / divisor for k, v in _block_norms(residual, operator.degrees[:residual.shape[0]]).items()},
        raw_frobenius=raw,
        scale=scale,
        caveat=caveat,
        extras=extras,
    )


def commutator_residual(f: Symbol, g: Symbol, p: SpaceParams, D: int, grid: Optional[QuadratureGrid] = None,
                        operators: Optional[Tuple[TruncatedOperator, TruncatedOperator]] = None) -> ResidualReport:
    """
    ‖[T_f, T_g]‖ on the interior block Σν <= D − w, w the smaller degree window.

    Products use the full truncated matrices. The norm is divided by
    ‖T_f − τ_f I‖₂ · ‖T_g − τ_g I‖_F on the same block, where τ is the mean
    diagonal entry.
    """
    grid = grid or QuadratureGrid.for_dimension(p.d)
    interior, caveat = _interior_degree(D, f, g)
    if f.constant_value is not None or g.constant_value is not None:
        return _zero_report(D, interior, grid, "constant symbol")
    tf, tg = operators or (build_matrix(f, p, D, grid), build_matrix(g, p, D, grid))
    n = multi_index_count(p.d, interior)
    commutator = (tf.matrix @ tg.matrix - tg.matrix @ tf.matrix)[:n, :n]
    scale = float(np.linalg.norm(_centered(tf.matrix[:n, :n]), 2) * np.linalg.norm(_centered(tg.matrix[:n, :n])))
    return _report(commutator, scale, tg, interior, caveat)


def offblock_mass(g: Symbol, p: SpaceParams, D: int, grid: Optional[QuadratureGrid] = None,
                  modulus: Optional[int] = None, operator: Optional[TruncatedOperator] = None) -> float:
    """
    Frobenius norm of the entries of T_g with Σκ ≠ Σν.

    With modulus q only entries with Σν − Σκ ≢ 0 (mod q) count.
    """
    if modulus is not None and modulus < 1:
        raise ParameterError(f"modulus must be a positive integer, got {modulus}")
    tg = operator or build_matrix(g, p, D, grid)
    degrees = tg.degrees
    shift = degrees[:, None] - degrees[None, :]
    mask = shift != 0 if modulus is None else shift % modulus != 0
    return float(np.linalg.norm(tg.matrix[mask]))


def zero_product_residual(f: Symbol, g: Symbol, p: SpaceParams, D: int,
                          grid: Optional[QuadratureGrid] = None) -> Tuple[ResidualReport, ResidualReport]:
    """
    ‖T_f T_g‖ and ‖T_g T_f‖ on the interior block, each divided by ‖T_f‖₂ · ‖T_g‖_F there.
    """
    grid = grid or QuadratureGrid.for_dimension(p.d)
    interior, caveat = _interior_degree(D, f, g)
    if f.constant_value == 0 or g.constant_value == 0:
        zero = _zero_report(D, interior, grid, "zero symbol")
        return zero, zero
    tf = build_matrix(f, p, D, grid)
    tg = build_matrix(g, p, D, grid)
    n = multi_index_count(p.d, interior)
    scale = float(np.linalg.norm(tf.matrix[:n, :n], 2) * np.linalg.norm(tg.matrix[:n, :n]))
    fg = (tf.matrix @ tg.matrix)[:n, :n]
    gf = (tg.matrix @ tf.matrix)[:n, :n]
    return (_report(fg, scale, tg, interior, caveat, order="T_f T_g"),
            _report(gf, scale, tg, interior, caveat, order="T_g T_f"))


def equation_residual(f1: Symbol, f2: Symbol, g: Symbol, k: Sequence[int], n: Sequence[int], p: SpaceParams,
                      D_l: int, grid: Optional[QuadratureGrid] = None) -> ResidualReport:
    """
    max over Σl <= D_l of |[Ω(f₁, Σk+Σl) − Ω(f₂, Σn+Σl)] · 𝒢(g z^k conj(z)^n)(l)|.

    Each term equals √(S(k+l) S(n+l)) times the (n+l, k+l) entry of
    T_g T_{f₁} − T_{f₂} T_g. Everything is taken at α = 1.
    """
    p = p.with_alpha(1.0)
    k = MultiIndex(k)
    n = MultiIndex(n)
    k.check_dimension(p.d)
    n.check_dimension(p.d)
    grid = grid or QuadratureGrid.for_dimension(p.d)
    ls = graded_basis(p, D_l)
    if f1.constant_value is not None and f1.constant_value == f2.constant_value:
        return _zero_report(D_l, D_l, grid, "equal constant symbols")

    omega1 = OmegaFunction(f1, p)
    omega2 = OmegaFunction(f2, p)
    g1 = multiply(g, monomial(k, n))
    terms = []
    for l in ls:
        bracket = omega1(k.total_degree + l.total_degree) - omega2(n.total_degree + l.total_degree)
        transform = g_transform(g1, np.array(l, dtype=float), p, grid) if bracket != 0 else 0j
        terms.append({"l": list(l), "bracket": complex(bracket), "transform": complex(transform),
                      "term": complex(bracket * transform)})
    values = np.array([t["term"] for t in terms])
    degrees = np.array([l.total_degree for l in ls])
    return ResidualReport(
        frobenius_residual=float(np.linalg.norm(values)),
        max_entry_residual=float(np.max(np.abs(values), initial=0.0)),
        degree=D_l,
        interior_degree=D_l,
        grid=grid.as_dict(),
        blocks={int(s): float(np.linalg.norm(values[degrees == s])) for s in np.unique(degrees)},
        raw_frobenius=float(np.linalg.norm(values)),
        extras={"k": list(k), "n": list(n), "terms": terms},
    )


def equation_entry(f1: Symbol, f2: Symbol, g: Symbol, k: Sequence[int], n: Sequence[int], l: Sequence[int],
                   p: SpaceParams, D: int, grid: Optional[QuadratureGrid] = None) -> complex:
    """√(S(k+l) S(n+l)) · (T_g T_{f₁} − T_{f₂} T_g)[n+l, k+l] at α = 1, from truncated matrices."""
    p = p.with_alpha(1.0)
    kappa = MultiIndex(k) + MultiIndex(l)
    nu = MultiIndex(n) + MultiIndex(l)
    if max(kappa.total_degree, nu.total_degree) > D:
        raise ParameterError(f"entry ({tuple(nu)}, {tuple(kappa)}) lies outside degree {D}")
    tg = build_matrix(g, p, D, grid)
    t1 = build_matrix(f1, p, D, grid)
    t2 = build_matrix(f2, p, D, grid)
    index = {tuple(b): i for i, b in enumerate(tg.basis)}
    # T_f is diagonal, so truncation does not touch this entry
    difference = tg.matrix @ t1.matrix - t2.matrix @ tg.matrix
    scale = math.exp(0.5 * (log_moment(p, kappa) + log_moment(p, nu)))
    return complex(scale * difference[index[tuple(nu)], index[tuple(kappa)]])


def counterexample_symbols(N: int, p: SpaceParams) -> Tuple[Symbol, Symbol, complex]:
    """
    f = e^{λ r^{2m}} with λ = α(1 − e^{−2πim/N}) and g = z₁^N/|z|^N.

    T_f e_κ = c^{d+s+Σκ} e_κ with c = e^{2πi/N}. T_g only couples degrees
    that differ by N, so it commutes with T_f although g is not rotation
    invariant.
    """
    if int(N) != N or N <= 6 * p.m:
        raise ParameterError(f"counterexample needs an integer N > 6m = {6 * p.m:g}, got N={N}")
    rate = p.alpha * (1.0 - cmath.exp(-2j * math.pi * p.m / N))
    return radial_exponential(rate, p), phase_symbol(int(N), p.d), rate


def counterexample_check(N: int, p: SpaceParams, D: int, grid: Optional[QuadratureGrid] = None) -> ResidualReport:
    f, g, rate = counterexample_symbols(N, p)
    grid = grid or QuadratureGrid.for_dimension(p.d)
    tf = diagonal_radial(f, p, D)
    tg = build_matrix(g, p, D, grid)
    report = commutator_residual(f, g, p, D, grid, operators=(tf, tg))
    c = cmath.exp(2j * math.pi / N)
    extras = {
        "N": int(N),
        "lambda": rate,
        "c": c,
        "offblock_mass": offblock_mass(g, p, D, operator=tg),
        "offblock_mass_mod_N": offblock_mass(g, p, D, modulus=int(N), operator=tg),
    }
    return replace(report, extras={**report.extras, **extras})
