"""Tikhonov-filtered inversion and regularisation-parameter choice.

The regularised source has modes ``f_n = Phi_n / (mu^2 + Phi_n^2) * g_n``,
the minimiser of ``||K f - g||^2 + mu^2 ||f||^2``. ``mu`` comes from one of
the rules below: a priori power law of the noise level, the discrepancy
principle ``||K f_mu - g_eps|| = tau * eps`` solved by bisection, a fixed
value, or an arbitrary power law ``coefficient * eps**exponent``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .coefficients import PhiTable
from .errors import DimensionMismatchError, DiscrepancyInfeasibleError, DomainError, NumericalFailure
from .spectral import SineCoefficients

MU_LOWER = 1e-16
BISECTION_RTOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class APriori:
    M: float
    k: float = 1.0

    def __post_init__(self):
        if not (self.M > 0 and self.k > 0):
            raise DomainError(f"a priori rule needs M > 0 and k > 0, got M={self.M}, k={self.k}")

    tag = "apriori"


@dataclass(frozen=True)
class APosteriori:
    tau: float

    def __post_init__(self):
        if not self.tau > 1:
            raise DomainError(f"discrepancy rule needs tau > 1, got {self.tau}")

    tag = "aposteriori"


@dataclass(frozen=True)
class Fixed:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError(f"fixed mu must be positive, got {self.mu}")

    tag = "fixed"


@dataclass(frozen=True)
class PowerLaw:
    """``mu = coefficient * eps**exponent``; used for the closed-form a posteriori parameters."""

    coefficient: float
    exponent: float
    tag: str = "paper-formula"

    def __post_init__(self):
        if not (self.coefficient > 0 and self.exponent > 0):
            raise DomainError("power-law rule needs positive coefficient and exponent")


RegularizationRule = Union[APriori, APosteriori, Fixed, PowerLaw]


def describe_rule(rule: RegularizationRule) -> dict:
    if isinstance(rule, APriori):
        return {"rule": rule.tag, "M": rule.M, "k": rule.k}
    if isinstance(rule, APosteriori):
        return {"rule": rule.tag, "tau": rule.tau}
    if isinstance(rule, Fixed):
        return {"rule": rule.tag, "mu": rule.mu}
    return {"rule": rule.tag, "coefficient": rule.coefficient, "exponent": rule.exponent}


@dataclass(frozen=True, eq=False)
class RegularizedSolution:
    coeffs: SineCoefficients
    mu: float
    rule: RegularizationRule
    discrepancy: float
    metadata: dict = field(default_factory=dict)


def filter_factor(phi_n, mu):
    """``Phi / (mu^2 + Phi^2)``, bounded by ``1/(2 mu)`` and by ``1/Phi``."""
    phi_n = np.asarray(phi_n, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(phi_n <= 0) or np.any(mu <= 0):
        raise DomainError("filter factor needs Phi > 0 and mu > 0")
    out = phi_n / (mu * mu + phi_n * phi_n)
    return out if out.ndim else float(out)


def _check(g: SineCoefficients, table: PhiTable):
    if g.N != table.N:
        raise DimensionMismatchError(f"data has N={g.N} modes, Phi table has {table.N}")


def tikhonov_solve(g: SineCoefficients, table: PhiTable, mu: float) -> SineCoefficients:
    _check(g, table)
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    phi = table.values
    return SineCoefficients(phi / (mu * mu + phi * phi) * g.coeffs)


def choose_mu_apriori(epsilon: float, M: float, k: float) -> float:
    """``(eps/M)^{1/(k+2)}`` for ``k <= 2``, ``(eps/M)^{1/2}`` beyond."""
    if not (epsilon > 0 and M > 0 and k > 0):
        raise DomainError(f"a priori choice needs positive eps, M, k (got {epsilon}, {M}, {k})")
    return (epsilon / M) ** (1.0 / (k + 2.0)) if k <= 2 else math.sqrt(epsilon / M)


def discrepancy(mu: float, g_eps: SineCoefficients, table: PhiTable) -> float:
    """L2 residual ``||K f_mu - g_eps||`` in closed form.

    ``sqrt(sum (mu^2/(mu^2+Phi_n^2))^2 <g_eps, X_n>^2)``, with ``X_n`` the
    orthonormal sine basis.
    """
    _check(g_eps, table)
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    if mu == 0:
        return 0.0
    ratio = table.values / mu
    damp = 1.0 / (1.0 + ratio * ratio)
    return float(np.linalg.norm(damp * g_eps.orthonormal))


def choose_mu_aposteriori(
    epsilon: float,
    tau: float,
    g_eps: SineCoefficients,
    table: PhiTable,
    rtol: float = BISECTION_RTOL,
) -> float:
    """Solve ``discrepancy(mu) = tau * eps`` by bisection on ``log mu``.

    The residual is strictly increasing from 0 to ``||g_eps||``, so the root
    is unique whenever ``0 < tau*eps < ||g_eps||``.

    Raises
    ------
    DiscrepancyInfeasibleError
        If ``tau * eps >= ||g_eps||``.
    NumericalFailure
        If the root cannot be bracketed within 200 doublings.
    """
    if not epsilon > 0:
        raise DomainError(f"noise level must be positive, got {epsilon}")
    if not tau > 1:
        raise DomainError(f"tau must exceed 1, got {tau}")
    target = tau * epsilon
    gnorm = g_eps.norm()
    if target >= gnorm:
        raise DiscrepancyInfeasibleError(
            f"tau*eps = {target:.6g} >= ||g_eps|| = {gnorm:.6g}; noise dominates the data"
        )
    tol = rtol * gnorm

    def resid(mu):
        return discrepancy(mu, g_eps, table) - target

    lo, hi = MU_LOWER, 1.0
    for _ in range(MAX_ITER):
        if resid(hi) > 0:
            break
        hi *= 2.0
    else:
        raise NumericalFailure("discrepancy root not bracketed after 200 doublings")
    for _ in range(MAX_ITER):
        if resid(lo) < 0:
            break
        lo *= 0.5
        if lo == 0.0:
            raise NumericalFailure("discrepancy exceeds tau*eps for every representable mu")
    else:
        raise NumericalFailure("discrepancy root not bracketed from below")

    mid = math.sqrt(lo * hi)
    for _ in range(MAX_ITER):
        mid = math.sqrt(lo * hi)
        r = resid(mid)
        if abs(r) <= tol:
            return mid
        if r > 0:
            hi = mid
        else:
            lo = mid
        if hi <= lo * (1 + 4 * np.finfo(float).eps):
            break
    if abs(resid(mid)) <= tol:
        return mid
    raise NumericalFailure(f"bisection stalled at mu={mid:.6g} with residual {resid(mid):.3g}")


def select_mu(
    rule: RegularizationRule, epsilon: float, g_eps: SineCoefficients, table: PhiTable
) -> float:
    if isinstance(rule, Fixed):
        return rule.mu
    if isinstance(rule, APriori):
        return choose_mu_apriori(epsilon, rule.M, rule.k)
    if isinstance(rule, APosteriori):
        return choose_mu_aposteriori(epsilon, rule.tau, g_eps, table)
    if isinstance(rule, PowerLaw):
        if not epsilon > 0:
            raise DomainError(f"power-law rule needs a positive noise level, got {epsilon}")
        return rule.coefficient * epsilon ** rule.exponent
    raise TypeError(f"not a regularisation rule: {rule!r}")


def regularize(
    g_eps: SineCoefficients, table: PhiTable, rule: RegularizationRule, epsilon: float, **metadata
) -> RegularizedSolution:
    mu = select_mu(rule, epsilon, g_eps, table)
    coeffs = tikhonov_solve(g_eps, table, mu)
    meta = {"epsilon": epsilon, **describe_rule(rule), **metadata}
    return RegularizedSolution(coeffs, mu, rule, discrepancy(mu, g_eps, table), meta)


def h_function(y: float) -> float:
    """``y^y (1-y)^(1-y)`` on ``(0, 1)``, equal to 1 at both endpoints."""
    if not 0 <= y <= 1:
        raise DomainError(f"H(y) is defined on [0, 1], got {y}")
    if y in (0, 1):
        return 1.0
    return math.exp(y * math.log(y) + (1 - y) * math.log(1 - y))


@dataclass(frozen=True)
class BoundCheck:
    applicable: bool
    lhs: float = math.nan
    rhs: float = math.nan
    holds: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def posterior_mu_bound(
    epsilon: float,
    mu: float,
    tau: float,
    k: float,
    M: float,
    B2: float,
    C1: float,
    D1: float,
    D2: float,
    T: float,
) -> BoundCheck:
    """Check ``eps / mu^(k+1) <= P/(tau-1) * H((1-k)/2) * M``.

    ``P = B2 C1 D2^(3-k) (1 - e^{-D1 T})^(k-3) / D1``. Only meaningful for
    ``0 < k <= 1``; other ``k`` return a non-applicable result.
    """
    if not (0 < k <= 1):
        return BoundCheck(applicable=False)
    if not tau > 1:
        raise DomainError(f"tau must exceed 1, got {tau}")
    P = B2 * C1 / D1 * D2 ** (3 - k) * (-math.expm1(-D1 * T)) ** (k - 3)
    lhs = epsilon / mu ** (k + 1)
    rhs = P / (tau - 1) * h_function((1 - k) / 2) * M
    return BoundCheck(True, lhs, rhs, lhs <= rhs)
