"""The source-to-final-data operator and its spectral inverse.

In the sine basis the map ``f -> u(., T)`` is diagonal: mode ``n`` of the data
is ``Phi(n, phi) * f_n``. Everything here works on that diagonal form.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from .coefficients import (
    AnalyticTimeFunction,
    DiffusionCoefficient,
    PhiTable,
    TimeGrid,
    TimeSeries,
    build_phi_table,
)
from .errors import DimensionMismatchError, DomainError, GridError, InverseSourceWarning, SingularOperatorError
from .spectral import GridFunction, SineCoefficients, SpatialGrid


@dataclass(frozen=True, eq=False)
class ProblemDefinition:
    """One instance of the final-time inverse source problem.

    ``f_exact`` holds the reference source when one is known (synthetic
    examples); custom problems built from measured data leave it ``None``.
    """

    a: DiffusionCoefficient
    phi: TimeSeries
    g: GridFunction
    N: int
    f_exact: Optional[GridFunction] = None
    f_exact_coeffs: Optional[SineCoefficients] = None
    name: str = "custom"
    variant: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1 or self.N >= self.g.grid.K:
            raise GridError(f"truncation N={self.N} must satisfy 1 <= N < K={self.g.grid.K}")
        if self.f_exact is not None and self.f_exact.grid != self.g.grid:
            raise GridError("exact source and data live on different spatial grids")

    @property
    def T(self) -> float:
        return self.phi.grid.T

    @property
    def spatial_grid(self) -> SpatialGrid:
        return self.g.grid

    @property
    def time_grid(self) -> TimeGrid:
        return self.phi.grid

    def phi_bounds(self) -> tuple[float, float]:
        """``(B1, B2)``; raises if ``B1 <= 0`` since the stability estimates need it."""
        B1, B2 = self.phi.sample_bounds()
        if not B1 > 0:
            raise DomainError(f"stability diagnostics need phi bounded below by B1 > 0, got B1={B1}")
        return B1, B2

    def phi_table(self, method: str = "auto") -> PhiTable:
        return build_phi_table(self.a, self.phi, self.N, method)


@dataclass(frozen=True)
class PhysicalCoefficients:
    """Diffusion ``eta``, mean velocity ``nu`` and self-purification rate ``gamma``."""

    eta: float
    nu: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"diffusion eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class CanonicalTransform:
    """Exponential change of variables for ``u_t - eta u_xx + nu u_x + gamma u = P``.

    With ``chi = nu x / (2 eta) - (nu^2 / (4 eta) + gamma) t``, ``m_u = e^chi``
    and ``m_P = e^-chi``. Then ``w = u m_P`` and ``F = P m_P`` solve
    ``w_t - eta w_xx = F``, and ``u = w m_u`` maps back.
    """

    coeffs: PhysicalCoefficients

    def _exponent(self, x, t):
        c = self.coeffs
        return c.nu / (2.0 * c.eta) * np.asarray(x) - (c.nu ** 2 / (4.0 * c.eta) + c.gamma) * np.asarray(t)

    def m_u(self, x, t):
        return np.exp(self._exponent(x, t))

    def m_P(self, x, t):
        return np.exp(-self._exponent(x, t))

    def w_from_u(self, u, x, t):
        return u * self.m_P(x, t)

    def u_from_w(self, w, x, t):
        return w * self.m_u(x, t)


def canonical_transform(
    coeffs: PhysicalCoefficients, P: Callable
) -> tuple[CanonicalTransform, Callable]:
    """Return the transform and the transformed source ``F(x, t) = P(x, t) m_P(x, t)``.

    The pure-diffusion problem has diffusion ``coeffs.eta``.
    """
    tr = CanonicalTransform(coeffs)

    def F(x, t):
        return P(x, t) * tr.m_P(x, t)

    return tr, F


def singular_values(
    a: DiffusionCoefficient, T: float, N: int, time_grid: Optional[TimeGrid] = None
) -> np.ndarray:
    """``sigma_n = int_0^T exp(n^2 B(t)) dt = Phi(n, 1)``.

    Closed form when ``a`` is constant/affine; otherwise Simpson on ``time_grid``.
    """
    grid = time_grid if time_grid is not None else TimeGrid(1000, T)
    if not math.isclose(grid.T, T):
        raise DomainError(f"time grid ends at {grid.T}, expected T={T}")
    one = TimeSeries.from_function(grid, AnalyticTimeFunction.constant(1.0))
    return build_phi_table(a, one, N).values


def forward_apply(f: SineCoefficients, table: PhiTable) -> SineCoefficients:
    """Final-time data generated by source ``f``: ``g_n = Phi_n f_n``."""
    if f.N != table.N:
        raise DimensionMismatchError(f"source has N={f.N} modes, Phi table has {table.N}")
    return SineCoefficients(table.values * f.coeffs)


def naive_inversion(g: SineCoefficients, table: PhiTable) -> SineCoefficients:
    """Unregularised inverse ``f_n = g_n / Phi_n``.

    Unstable: a data error in mode ``n`` is amplified by ``1/Phi_n``, which
    grows like ``n^2``.
    """
    if g.N != table.N:
        raise DimensionMismatchError(f"data has N={g.N} modes, Phi table has {table.N}")
    if np.any(table.values == 0):
        raise SingularOperatorError("Phi table has a zero entry; the operator is not invertible")
    return SineCoefficients(g.coeffs / table.values)


def forward_evolution(
    f: SineCoefficients, phi: TimeSeries, a: DiffusionCoefficient, t: float
) -> SineCoefficients:
    """Mode amplitudes ``u_n(t) = f_n int_0^t exp(n^2 (A(s) - A(t))) phi(s) ds``.

    ``t`` is snapped to the nearest time node; the integral is Simpson on the
    sub-grid ``[0, t_i]`` (with the usual end correction for odd ``i``).
    """
    grid = phi.grid
    if t < 0 or t > grid.T * (1 + 1e-14):
        raise DomainError(f"evolution time {t} outside [0, {grid.T}]")
    i = grid.nearest_index(t)
    nodes = grid.nodes
    if abs(nodes[i] - t) > 1e-12 * grid.T:
        warnings.warn(
            f"t={t} is off the time grid; snapped to node t_{i}={nodes[i]}",
            InverseSourceWarning,
            stacklevel=2,
        )
    if i == 0:
        return SineCoefficients.zeros(f.N)
    s = nodes[: i + 1]
    A = a.primitive(s)
    n2 = f.modes.astype(float) ** 2
    integrand = np.exp(np.outer(n2, A - A[-1])) * phi.values[: i + 1]
    weights = simpson(integrand, x=s, axis=1)
    return SineCoefficients(f.coeffs * weights)


def stability_bound(
    M: float, k: float, g_norm: float, a: DiffusionCoefficient, B1: float, T: float
) -> float:
    """Conditional-stability bound on ``||f||`` under ``||f||_{H^k} <= M``.

    ``(D2 / (B1 (1 - e^{-D1 T})))^{k/(k+2)} * M^{2/(k+2)} * ||g||^{k/(k+2)}``.
    """
    if not B1 > 0:
        raise DomainError(f"B1 must be positive, got {B1}")
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}")
    if g_norm < 0:
        raise DomainError(f"data norm must be non-negative, got {g_norm}")
    D1, D2 = a.bounds(T)
    prefactor = D2 / (B1 * (-math.expm1(-D1 * T)))
    return prefactor ** (k / (k + 2)) * M ** (2 / (k + 2)) * g_norm ** (k / (k + 2))
