"""Time-coefficient machinery.

The diffusion coefficient ``a(t)``, its primitive ``A(t)``, the shifted exponent
``B(t) = A(t) - A(T)`` and the mode weights

    Phi(n, h) = int_0^T exp(n^2 B(t)) h(t) dt

computed by composite Simpson on the time grid, or in closed form when both
``a`` and ``h`` are analytic (constant/affine ``a`` with non-negative slope,
``h`` a sum of ``c * t^k * exp(r t)`` terms).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import dawsn

from .errors import DomainError, InverseSourceWarning, QuadratureLayoutError

CLOSED_FORM = "exact-closed-form"


def simpson_tag(L: int) -> str:
    return f"simpson(L={L})"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i*T/L``; ``L`` must be even for composite Simpson."""

    L: int
    T: float = 1.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise DomainError(f"time grid needs an integer L >= 2, got {self.L!r}")
        if self.L % 2:
            raise QuadratureLayoutError(f"composite Simpson needs an even number of intervals, got L={self.L}")
        if not self.T > 0:
            raise DomainError(f"final time must be positive, got T={self.T}")

    @property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.L + 1) * (self.T / self.L)
        t[-1] = self.T
        return t

    @property
    def dt(self) -> float:
        return self.T / self.L

    @property
    def simpson_weights(self) -> np.ndarray:
        return simpson_weights(self.L, self.T)

    def trapezoid_norm(self, values: np.ndarray) -> float:
        w = np.full(self.L + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return float(np.sqrt(np.sum(w * np.asarray(values) ** 2)))

    def nearest_index(self, t: float) -> int:
        return int(round(t / self.dt))


def simpson_weights(L: int, T: float) -> np.ndarray:
    """Composite Simpson weights ``(dt/3) * [1, 4, 2, 4, ..., 2, 4, 1]``."""
    if L < 2 or L % 2:
        raise QuadratureLayoutError(f"composite Simpson needs an even number of intervals, got L={L}")
    w = np.ones(L + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (T / L / 3.0)


# -- analytic time functions -------------------------------------------------


@dataclass(frozen=True)
class AnalyticTimeFunction:
    """``h(t) = sum_j coef_j * t**power_j * exp(rate_j * t)``."""

    terms: tuple[tuple[float, int, float], ...]
    name: str = ""

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for coef, power, rate in self.terms:
            out = out + coef * t ** power * np.exp(rate * t)
        return out

    def __add__(self, other: "AnalyticTimeFunction") -> "AnalyticTimeFunction":
        return AnalyticTimeFunction(self.terms + other.terms, f"{self.name}+{other.name}")

    def scaled(self, factor: float) -> "AnalyticTimeFunction":
        return AnalyticTimeFunction(
            tuple((factor * c, p, r) for c, p, r in self.terms), f"{factor!r}*({self.name})"
        )

    @classmethod
    def constant(cls, c: float = 1.0) -> "AnalyticTimeFunction":
        return cls(((float(c), 0, 0.0),), f"{c!r}")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "AnalyticTimeFunction":
        """``coeffs[k]`` multiplies ``t**k``."""
        terms = tuple((float(c), k, 0.0) for k, c in enumerate(coeffs) if c != 0)
        return cls(terms, "poly(" + ",".join(repr(float(c)) for c in coeffs) + ")")

    @classmethod
    def exp_minus_one(cls) -> "AnalyticTimeFunction":
        return cls(((1.0, 0, 1.0), (-1.0, 0, 0.0)), "exp(t)-1")


# -- diffusion coefficients ---------------------------------------------------


class DiffusionCoefficient:
    """Positive time-dependent diffusion ``a(t)``.

    Subclasses provide ``__call__``, ``primitive`` (``A(t)`` without domain
    checks) and ``affine_params`` (``(alpha, beta)`` or ``None``).
    """

    bounds_override: Optional[tuple[float, float]] = None

    def __call__(self, t):
        raise NotImplementedError

    def primitive(self, t):
        raise NotImplementedError

    @property
    def affine_params(self) -> Optional[tuple[float, float]]:
        return None

    def bounds(self, T: float, samples: int = 1001) -> tuple[float, float]:
        """``(D1, D2)`` with ``D1 <= a(t) <= D2`` on ``[0, T]``, checked by sampling."""
        if self.bounds_override is not None:
            D1, D2 = self.bounds_override
        else:
            vals = np.asarray(self(np.linspace(0.0, T, samples)), dtype=float)
            D1, D2 = float(vals.min()), float(vals.max())
        if not D1 > 0:
            raise DomainError(f"diffusion coefficient must stay positive on [0, T]; min is {D1}")
        return D1, D2


@dataclass(frozen=True)
class ConstantDiffusion(DiffusionCoefficient):
    c: float
    bounds_override: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"constant diffusion must be positive, got {self.c}")

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c)

    def primitive(self, t):
        return self.c * np.asarray(t, dtype=float)

    @property
    def affine_params(self):
        return 0.0, float(self.c)


@dataclass(frozen=True)
class AffineDiffusion(DiffusionCoefficient):
    """``a(t) = alpha * t + beta``."""

    alpha: float
    beta: float
    bounds_override: Optional[tuple[float, float]] = None

    def __call__(self, t):
        return self.alpha * np.asarray(t, dtype=float) + self.beta

    def primitive(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * self.alpha * t * t + self.beta * t

    @property
    def affine_params(self):
        return float(self.alpha), float(self.beta)


@dataclass(frozen=True, eq=False)
class TabulatedDiffusion(DiffusionCoefficient):
    """Diffusion sampled on a time grid; ``A`` by cumulative Simpson at the nodes."""

    series: "TimeSeries"
    bounds_override: Optional[tuple[float, float]] = None

    def __post_init__(self):
        prim = cumulative_simpson(self.series.values, x=self.series.grid.nodes, initial=0.0)
        object.__setattr__(self, "_primitive_nodes", prim)

    def __call__(self, t):
        return np.interp(t, self.series.grid.nodes, self.series.values)

    def primitive(self, t):
        grid = self.series.grid
        idx = np.rint(np.asarray(t, dtype=float) / grid.dt).astype(int)
        idx = np.clip(idx, 0, grid.L)
        return self._primitive_nodes[idx]

    def bounds(self, T: float, samples: int = 1001) -> tuple[float, float]:
        if self.bounds_override is not None:
            return super().bounds(T, samples)
        D1, D2 = float(self.series.values.min()), float(self.series.values.max())
        if not D1 > 0:
            raise DomainError(f"diffusion coefficient must stay positive; min sample is {D1}")
        return D1, D2


def _check_time(t, T: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T * (1 + 1e-14)):
        raise DomainError(f"time outside [0, T={T}]")
    return t


def antiderivative(a: DiffusionCoefficient, t, T: float):
    """``A(t) = int_0^t a(s) ds`` for ``0 <= t <= T``."""
    return a.primitive(_check_time(t, T))


def exponent_B(a: DiffusionCoefficient, t, T: float):
    """``B(t) = A(t) - A(T)``; zero at ``T`` and non-positive on ``[0, T]``."""
    t = _check_time(t, T)
    return a.primitive(t) - a.primitive(T)


# -- time series and Phi tables ----------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Samples of a time function on a :class:`TimeGrid`.

    ``closed_form`` is kept when the samples come from an analytic function,
    so weight integrals can be evaluated exactly. ``bounds`` optionally carries
    the ``(lower, upper)`` envelope of the underlying function.
    """

    grid: TimeGrid
    values: np.ndarray
    closed_form: Optional[AnalyticTimeFunction] = None
    bounds: Optional[tuple[float, float]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.L + 1,):
            raise DomainError(f"expected {self.grid.L + 1} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("time series samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: TimeGrid, func: AnalyticTimeFunction, bounds=None) -> "TimeSeries":
        return cls(grid, func(grid.nodes), closed_form=func, bounds=bounds)

    def sample_bounds(self) -> tuple[float, float]:
        if self.bounds is not None:
            return self.bounds
        return float(self.values.min()), float(self.values.max())


@dataclass(frozen=True, eq=False)
class PhiTable:
    """``Phi_n`` for ``n = 1..N`` with a per-entry provenance tag."""

    values: np.ndarray
    provenance: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(self.provenance) != v.size:
            raise DomainError("Phi table values and provenance must be equal-length vectors")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def N(self) -> int:
        return self.values.size

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    def truncated(self, N: int) -> "PhiTable":
        return PhiTable(self.values[:N], self.provenance[:N])


def phi_integral(n: int, h: TimeSeries, a: DiffusionCoefficient) -> float:
    """Composite Simpson value of ``int_0^T exp(n^2 B(t)) h(t) dt``."""
    return float(_simpson_phi(np.array([n]), h, a)[0])


def _simpson_phi(n: np.ndarray, h: TimeSeries, a: DiffusionCoefficient) -> np.ndarray:
    grid = h.grid
    if np.any(h.values <= 0):
        warnings.warn(
            "weight h(t) has non-positive samples; Phi positivity is not guaranteed",
            InverseSourceWarning,
            stacklevel=3,
        )
    B = exponent_B(a, grid.nodes, grid.T)
    wh = grid.simpson_weights * h.values
    n2 = np.asarray(n, dtype=float) ** 2
    return np.exp(np.outer(n2, B)) @ wh


def _exp_quadratic_moments(p2: float, p1: float, p0: float, T: float, kmax: int) -> Optional[np.ndarray]:
    """``I_k = int_0^T t^k exp(p2 t^2 + p1 t + p0) dt`` for ``k = 0..kmax`` (``p2 >= 0``).

    Uses ``int (2 p2 t + p1) t^k e^q = [t^k e^q] - k I_{k-1}``; the base case is a
    Dawson-function expression when ``p2 > 0``.
    """
    if p2 < 0:
        return None
    qT = p2 * T * T + p1 * T + p0
    eT, e0 = math.exp(qT), math.exp(p0)
    I = np.empty(kmax + 1)
    if p2 == 0.0 and p1 == 0.0:
        for k in range(kmax + 1):
            I[k] = e0 * T ** (k + 1) / (k + 1)
        return I
    if p2 == 0.0:
        for k in range(kmax + 1):
            boundary = T ** k * eT - (e0 if k == 0 else 0.0)
            I[k] = (boundary - (k * I[k - 1] if k else 0.0)) / p1
        return I
    r = math.sqrt(p2)
    s = p1 / (2.0 * p2)
    I[0] = (eT * dawsn(r * (T + s)) - e0 * dawsn(r * s)) / r
    for k in range(kmax):
        boundary = T ** k * eT - (e0 if k == 0 else 0.0)
        I[k + 1] = (boundary - (k * I[k - 1] if k else 0.0) - p1 * I[k]) / (2.0 * p2)
    return I


def closed_form_phi(n: int, h: AnalyticTimeFunction, a: DiffusionCoefficient, T: float) -> Optional[float]:
    """Exact ``Phi(n, h)`` or ``None`` when ``(a, h)`` is outside the analytic registry."""
    params = a.affine_params
    if params is None:
        return None
    alpha, beta = params
    if alpha < 0:
        return None
    c = float(n) ** 2
    p0 = -c * float(a.primitive(T))
    total = 0.0
    for coef, power, rate in h.terms:
        I = _exp_quadratic_moments(0.5 * c * alpha, c * beta + rate, p0, T, int(power))
        if I is None:
            return None
        total += coef * I[int(power)]
    return float(total)


def build_phi_table(
    a: DiffusionCoefficient, h: TimeSeries, N: int, method: str = "auto"
) -> PhiTable:
    """Tabulate ``Phi(n, h)`` for ``n = 1..N``.

    ``method`` is ``"auto"`` (closed form where available, Simpson otherwise),
    ``"simpson"`` or ``"closed-form"``.
    """
    if method not in ("auto", "simpson", "closed-form"):
        raise ValueError(f"unknown Phi method {method!r}")
    n = np.arange(1, N + 1)
    tag = simpson_tag(h.grid.L)
    if method == "simpson" or h.closed_form is None:
        if method == "closed-form":
            raise DomainError("closed-form Phi requested for a tabulated weight")
        return PhiTable(_simpson_phi(n, h, a), (tag,) * N)
    values = np.empty(N)
    provenance = []
    fallback = []
    for i, k in enumerate(n):
        v = closed_form_phi(int(k), h.closed_form, a, h.grid.T)
        if v is None or not np.isfinite(v) or v <= 0:
            if method == "closed-form":
                raise DomainError(f"no usable closed form for Phi({k}, {h.closed_form.name})")
            fallback.append(i)
            provenance.append(tag)
        else:
            values[i] = v
            provenance.append(CLOSED_FORM)
    if fallback:
        values[fallback] = _simpson_phi(n[fallback], h, a)
    return PhiTable(values, tuple(provenance))


@dataclass(frozen=True)
class EnvelopeReport:
    passed: bool
    lower: np.ndarray
    upper: np.ndarray
    per_mode: np.ndarray


def phi_envelope_check(
    table: PhiTable, E1: float, E2: float, a: DiffusionCoefficient, T: float
) -> EnvelopeReport:
    """Check ``E1 (1-e^{-D1 T}) / (n^2 D2) <= Phi_n <= E2 (1-e^{-n^2 D2 T}) / (n^2 D1)``.

    ``E1 <= h <= E2`` is assumed for the weight that generated ``table``;
    non-positive entries always fail.
    """
    D1, D2 = a.bounds(T)
    n2 = np.arange(1, table.N + 1, dtype=float) ** 2
    lower = E1 * (1.0 - math.exp(-D1 * T)) / (n2 * D2)
    upper = E2 * (-np.expm1(-n2 * D2 * T)) / (n2 * D1)
    phi = table.values
    rtol = 1e-12
    ok = (phi > 0) & (phi >= lower * (1 - rtol)) & (phi <= upper * (1 + rtol))
    return EnvelopeReport(bool(ok.all()), lower, upper, ok)
