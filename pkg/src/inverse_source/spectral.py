"""Sine-basis analysis and synthesis on a uniform grid over (0, pi).

Coefficients are stored with the ``2/pi`` normalisation, so a grid function
``g`` is represented as ``g(x) = sum_n c_n sin(n x)`` with
``c_n = (2/pi) <g, sin(n x)>``. The inner product is the composite trapezoid
rule, which is exactly orthogonal for modes ``1 <= n < K``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError, GridError, InverseSourceWarning

DEFAULT_TRUNCATION = 1000


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid ``x_j = j*pi/K``, ``j = 0..K``."""

    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise GridError(f"spatial grid needs an integer K >= 2, got {self.K!r}")

    @property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.K + 1) * (np.pi / self.K)
        x[-1] = np.pi
        return x

    @property
    def dx(self) -> float:
        return np.pi / self.K

    @property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.K + 1, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Evaluate ``func`` on the nodes and pin the two boundary values to zero."""
        values = np.asarray(func(self.nodes), dtype=float).copy()
        values[0] = values[-1] = 0.0
        return GridFunction(self, values)


@dataclass(frozen=True)
class GridFunction:
    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.K + 1,):
            raise GridError(
                f"expected {self.grid.K + 1} values on a K={self.grid.K} grid, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def satisfies_boundary(self, rtol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return abs(self.values[0]) <= rtol * scale and abs(self.values[-1]) <= rtol * scale

    def inner(self, other: "GridFunction") -> float:
        """Trapezoid approximation of the L2(0, pi) inner product."""
        if other.grid != self.grid:
            raise GridError("grid functions live on different grids")
        return float(np.sum(self.grid.trapezoid_weights * self.values * other.values))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.grid, scalar * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SineCoefficients:
    """Truncated sine series ``c_1..c_N`` (``2/pi`` normalisation)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise DimensionMismatchError(f"coefficients must be a non-empty vector, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("sine coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    @property
    def orthonormal(self) -> np.ndarray:
        """Coefficients against the orthonormal basis ``sqrt(2/pi) sin(n x)``."""
        return np.sqrt(np.pi / 2.0) * self.coeffs

    def norm(self) -> float:
        """L2(0, pi) norm of the represented function."""
        return float(np.linalg.norm(self.orthonormal))

    def inner(self, other: "SineCoefficients") -> float:
        check_same_truncation(self, other)
        return float(0.5 * np.pi * np.dot(self.coeffs, other.coeffs))

    @classmethod
    def zeros(cls, N: int) -> "SineCoefficients":
        return cls(np.zeros(N))


def check_same_truncation(*objs) -> int:
    sizes = {o.N for o in objs}
    if len(sizes) != 1:
        raise DimensionMismatchError(f"truncation orders disagree: {sorted(sizes)}")
    return sizes.pop()


def _sine_matrix(N: int, grid: SpatialGrid) -> np.ndarray:
    return np.sin(np.outer(np.arange(1, N + 1), grid.nodes))


def clamp_truncation(N: int, grid: SpatialGrid) -> tuple[int, bool]:
    """Clamp ``N`` to ``K - 1`` with a warning; returns ``(N_used, clamped)``."""
    if N < 1:
        raise GridError(f"truncation must be >= 1, got {N}")
    if N < grid.K:
        return N, False
    warnings.warn(
        f"truncation N={N} exceeds what a K={grid.K} grid resolves; clamped to {grid.K - 1}",
        InverseSourceWarning,
        stacklevel=2,
    )
    return grid.K - 1, True


def sine_transform(g: GridFunction, N: int) -> SineCoefficients:
    """Return ``c_n = (2/pi) Q[g sin(n x)]`` for ``n = 1..N``.

    Raises
    ------
    GridError
        If ``N >= K`` or ``g`` does not vanish at the boundary.
    """
    grid = g.grid
    if N < 1 or N >= grid.K:
        raise GridError(f"truncation N={N} must satisfy 1 <= N < K={grid.K}")
    if not g.satisfies_boundary():
        raise GridError(
            f"grid function violates u(0)=u(pi)=0: endpoints {g.values[0]!r}, {g.values[-1]!r}"
        )
    S = _sine_matrix(N, grid)
    return SineCoefficients((2.0 / np.pi) * (S @ (grid.trapezoid_weights * g.values)))


def synthesize(c: SineCoefficients, grid: SpatialGrid) -> GridFunction:
    values = c.coeffs @ _sine_matrix(c.N, grid)
    values[0] = values[-1] = 0.0
    return GridFunction(grid, values)


def sobolev_norm(c: SineCoefficients, k: float) -> float:
    """``||f||_{H^k} = sqrt(sum (1+n^2)^k f_n^2)`` with orthonormal coefficients ``f_n``."""
    n = c.modes.astype(float)
    return float(np.sqrt(np.sum((1.0 + n * n) ** k * c.orthonormal ** 2)))
