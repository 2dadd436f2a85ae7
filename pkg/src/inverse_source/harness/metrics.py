"""Error metrics between regularised and exact sources, and empirical rates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DegenerateDataError, GridError
from ..spectral import GridFunction


@dataclass(frozen=True)
class ErrorReport:
    """One (noise level, seed, rule) cell.

    ``E1`` is the node-RMS absolute error and ``E2`` the relative
    root-sum-square error; they satisfy ``E1 sqrt(K+1) = E2 sqrt(sum f_j^2)``.
    """

    epsilon: float
    mu: float
    rule: str
    E1: float
    E2: float
    seed: int

    def __post_init__(self):
        if not (self.E1 >= 0 and self.E2 >= 0):
            raise ValueError(f"error metrics must be non-negative, got E1={self.E1}, E2={self.E2}")


def error_metrics(f_reg: GridFunction, f_exact: GridFunction) -> tuple[float, float]:
    """``(E1, E2)`` over all ``K + 1`` grid nodes.

    Raises
    ------
    DegenerateDataError
        When the exact source vanishes on the grid, so ``E2`` is undefined.
    """
    if f_reg.grid != f_exact.grid:
        raise GridError("error metrics need both functions on the same grid")
    diff = f_reg.values - f_exact.values
    ref = math.sqrt(float(np.sum(f_exact.values ** 2)))
    if ref == 0:
        raise DegenerateDataError("relative error undefined: exact source is zero on the grid")
    rss = math.sqrt(float(np.sum(diff ** 2)))
    return rss / math.sqrt(diff.size), rss / ref


def _by_epsilon(reports: Iterable[ErrorReport]) -> dict[float, list[ErrorReport]]:
    groups: dict[float, list[ErrorReport]] = {}
    for r in reports:
        groups.setdefault(r.epsilon, []).append(r)
    return dict(sorted(groups.items(), reverse=True))


@dataclass(frozen=True)
class SummaryRow:
    epsilon: float
    rule: str
    count: int
    mu: float
    E1: float
    E2: float
    E1_iqr: float
    E2_iqr: float


def _iqr(v: np.ndarray) -> float:
    q1, q3 = np.percentile(v, [25, 75])
    return float(q3 - q1)


def summarize(reports: Sequence[ErrorReport]) -> list[SummaryRow]:
    """Median and interquartile range over seeds, one row per noise level (descending)."""
    rows = []
    for eps, group in _by_epsilon(reports).items():
        e1 = np.array([r.E1 for r in group])
        e2 = np.array([r.E2 for r in group])
        rows.append(
            SummaryRow(
                epsilon=eps,
                rule=group[0].rule,
                count=len(group),
                mu=float(np.median([r.mu for r in group])),
                E1=float(np.median(e1)),
                E2=float(np.median(e2)),
                E1_iqr=_iqr(e1),
                E2_iqr=_iqr(e2),
            )
        )
    return rows


def fit_rate(reports: Sequence[ErrorReport]) -> float:
    """Least-squares slope of ``log E1`` against ``log eps``.

    Several seeds at one noise level are collapsed to their median first.

    Raises
    ------
    ValueError
        With fewer than three distinct noise levels, or non-positive values.
    """
    rows = summarize(reports)
    if len(rows) < 3:
        raise ValueError(f"rate fit needs at least 3 distinct noise levels, got {len(rows)}")
    eps = np.array([r.epsilon for r in rows])
    e1 = np.array([r.E1 for r in rows])
    if np.any(eps <= 0) or np.any(e1 <= 0):
        raise ValueError("rate fit needs positive noise levels and errors")
    slope, _ = np.polyfit(np.log(eps), np.log(e1), 1)
    return float(slope)
