"""
Space parameters for F²_{m,α,s}(ℂ^d), multi-index combinatorics,
closed-form moments and the orthonormal monomial basis.

All Gamma ratios are evaluated through log-Gamma so that degrees around
a hundred stay finite.
"""
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from modules.errors import MomentRangeError, ParameterError

# exp() overflows past this
_LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class SpaceParams:
    """The tuple (d, m, α, s) defining F²_{m,α,s}."""
    d: int = 1
    m: float = 1.0
    alpha: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"d must be a positive integer, got {self.d!r}")
        for name, value in (("m", self.m), ("alpha", self.alpha), ("s", self.s)):
            if not math.isfinite(float(value)):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.s < 0:
            raise ParameterError(f"s must be >= 0, got {self.s}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "s", float(self.s))

    def with_alpha(self, alpha: float) -> "SpaceParams":
        return SpaceParams(self.d, self.m, alpha, self.s)

    @property
    def log_kernel_constant(self) -> float:
        return float(gammaln((self.d + self.s) / self.m) - gammaln(self.d))

    @property
    def kernel_constant(self) -> float:
        """C_s = Γ((d+s)/m) / Γ(d)."""
        return math.exp(self.log_kernel_constant)

    def as_dict(self) -> dict:
        return {"d": self.d, "m": self.m, "alpha": self.alpha, "s": self.s}


class MultiIndex(tuple):
    """Non-negative integer vector ν labelling the basis vector e_ν."""

    def __new__(cls, entries: Iterable[int]):
        values = tuple(int(v) for v in entries)
        if not values:
            raise ParameterError("multi-index must have at least one entry")
        if any(v < 0 for v in values):
            raise ParameterError(f"multi-index entries must be non-negative, got {values}")
        return super().__new__(cls, values)

    @classmethod
    def parse(cls, text: str, d: int) -> "MultiIndex":
        """Parse "1,0" style text; a bare "0" is broadcast to every coordinate."""
        try:
            parts = [int(item) for item in str(text).replace(" ", "").split(",") if item != ""]
        except ValueError:
            raise ParameterError(f"malformed multi-index {text!r}")
        if len(parts) == 1 and d > 1 and parts[0] == 0:
            parts = [0] * d
        index = cls(parts)
        index.check_dimension(d)
        return index

    @property
    def total_degree(self) -> int:
        return sum(self)

    def log_factorial(self) -> float:
        return float(sum(gammaln(v + 1.0) for v in self))

    def check_dimension(self, d: int):
        if len(self) != d:
            raise ParameterError(f"multi-index {tuple(self)} has length {len(self)}, expected d={d}")

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other))

    def __repr__(self):
        return f"MultiIndex{tuple(self)}"


def _as_index(p: SpaceParams, nu: Sequence[int]) -> MultiIndex:
    index = nu if isinstance(nu, MultiIndex) else MultiIndex(nu)
    index.check_dimension(p.d)
    return index


def log_normalization_constant(p: SpaceParams) -> float:
    return (
        math.log(p.m)
        + (p.d + p.s) / p.m * math.log(p.alpha)
        - p.d * math.log(math.pi)
        + float(gammaln(p.d) - gammaln((p.d + p.s) / p.m))
    )


def normalization_constant(p: SpaceParams) -> float:
    """c_{m,α,s} = mα^{(d+s)/m}/π^d · Γ(d)/Γ((d+s)/m)."""
    return math.exp(log_normalization_constant(p))


def log_moment(p: SpaceParams, nu: Sequence[int]) -> float:
    """log S_{α,s}(ν)."""
    index = _as_index(p, nu)
    n = index.total_degree
    return (
        index.log_factorial()
        + float(gammaln((p.d + p.s + n) / p.m))
        - float(gammaln(p.d + n))
        - n / p.m * math.log(p.alpha)
        - p.log_kernel_constant
    )


def moment(p: SpaceParams, nu: Sequence[int]) -> float:
    """
    Squared norm S_{α,s}(ν) = ‖ζ^ν‖².

    Raises:
        MomentRangeError: if the value is outside the float range
    """
    value = log_moment(p, nu)
    if not math.isfinite(value) or abs(value) > _LOG_FLOAT_MAX:
        raise MomentRangeError(sum(nu), f"log S = {value:.6g}")
    return math.exp(value)


def orthonormal_coefficient(p: SpaceParams, nu: Sequence[int]) -> float:
    """S_{α,s}(ν)^{-1/2}, the factor turning z^ν into e_ν."""
    value = log_moment(p, nu)
    if not math.isfinite(value) or abs(value) > 2 * _LOG_FLOAT_MAX:
        raise MomentRangeError(sum(nu), f"log S = {value:.6g}")
    return math.exp(-0.5 * value)


def multi_index_count(d: int, D: int) -> int:
    """Number of ν ∈ ℕ^d with Σν ≤ D."""
    return math.comb(D + d, d)


@lru_cache(maxsize=64)
def _graded_basis(d: int, D: int) -> Tuple[MultiIndex, ...]:
    indices = [
        MultiIndex(entries)
        for entries in itertools.product(range(D + 1), repeat=d)
        if sum(entries) <= D
    ]
    # total degree first; within a degree the first coordinate leads
    indices.sort(key=lambda nu: (nu.total_degree, tuple(-v for v in nu)))
    return tuple(indices)


def graded_basis(p: SpaceParams, D: int) -> List[MultiIndex]:
    """All ν with Σν ≤ D in (degree, lexicographic) order."""
    if int(D) != D or D < 0:
        raise ParameterError(f"truncation degree must be a non-negative integer, got {D!r}")
    return list(_graded_basis(p.d, int(D)))


def basis_exponents(basis: Sequence[MultiIndex]) -> np.ndarray:
    return np.array([tuple(nu) for nu in basis], dtype=int).reshape(len(basis), -1)


def basis_coefficients(p: SpaceParams, basis: Sequence[MultiIndex]) -> np.ndarray:
    return np.array([orthonormal_coefficient(p, nu) for nu in basis])


def evaluate_basis(p: SpaceParams, basis: Sequence[MultiIndex], points: np.ndarray) -> np.ndarray:
    """
    Values e_ν(z) for every node.

    Args:
        points: complex array of shape (N, d)

    Returns:
        complex array of shape (N, len(basis))
    """
    points = np.asarray(points, dtype=complex).reshape(-1, p.d)
    exponents = basis_exponents(basis)
    values = np.ones((points.shape[0], len(basis)), dtype=complex)
    for j in range(p.d):
        values *= points[:, j][:, None] ** exponents[:, j][None, :]
    return values * basis_coefficients(p, basis)[None, :]
