"""Flat-file CSV serialisation (UTF-8, ``.`` decimal, 17 significant digits).

Formats::

    GridFunction        x,value
    TimeSeries          t,value
    PhiTable            n,phi,provenance
    RegularizedSolution n,f_mu_eps        preceded by "# key=value" header lines
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .coefficients import PhiTable, TimeGrid, TimeSeries
from .errors import ConfigError
from .regularization import RegularizedSolution
from .spectral import GridFunction, SineCoefficients, SpatialGrid


def fmt(v) -> str:
    """Full-precision, platform-independent text for one number."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_rows(path, header: Sequence[str]) -> tuple[list[list[str]], dict[str, str]]:
    """Return data rows and the ``# key=value`` metadata found before the header."""
    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ConfigError(f"{path}: no CSV header")
    reader = csv.reader(body)
    found = next(reader)
    if [h.strip() for h in found] != list(header):
        raise ConfigError(f"{path}: expected columns {','.join(header)}, got {','.join(found)}")
    for row in reader:
        if len(row) != len(header):
            raise ConfigError(f"{path}: malformed row {row!r}")
        rows.append(row)
    return rows, meta


def _floats(rows, col: int, path) -> np.ndarray:
    try:
        return np.array([float(r[col]) for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None


def write_grid_function(path, f: GridFunction) -> Path:
    return write_rows(path, ("x", "value"), zip(f.grid.nodes, f.values))


def read_grid_function(path) -> GridFunction:
    """Load ``x,value``; the nodes must form the uniform grid ``j*pi/K``."""
    rows, _ = read_rows(path, ("x", "value"))
    x, v = _floats(rows, 0, path), _floats(rows, 1, path)
    grid = SpatialGrid(len(x) - 1)
    if not np.allclose(x, grid.nodes, rtol=0, atol=1e-9):
        raise ConfigError(f"{path}: x column is not the uniform grid on [0, pi] with K={grid.K}")
    return GridFunction(grid, v)


def write_time_series(path, s: TimeSeries) -> Path:
    return write_rows(path, ("t", "value"), zip(s.grid.nodes, s.values))


def read_time_series(path) -> TimeSeries:
    """Load ``t,value`` on a uniform grid from 0 to ``T`` with an even number of steps."""
    rows, _ = read_rows(path, ("t", "value"))
    t, v = _floats(rows, 0, path), _floats(rows, 1, path)
    if len(t) < 3 or t[0] != 0:
        raise ConfigError(f"{path}: time column must start at 0 and have at least 3 nodes")
    grid = TimeGrid(len(t) - 1, float(t[-1]))
    if not np.allclose(t, grid.nodes, rtol=0, atol=1e-9 * grid.T):
        raise ConfigError(f"{path}: time column is not uniform")
    return TimeSeries(grid, v)


def write_phi_table(path, table: PhiTable) -> Path:
    rows = zip(range(1, table.N + 1), table.values, table.provenance)
    return write_rows(path, ("n", "phi", "provenance"), rows)


def read_phi_table(path) -> PhiTable:
    rows, _ = read_rows(path, ("n", "phi", "provenance"))
    n = [int(r[0]) for r in rows]
    if n != list(range(1, len(n) + 1)):
        raise ConfigError(f"{path}: modes must run 1..N")
    return PhiTable(_floats(rows, 1, path), tuple(r[2] for r in rows))


def write_solution(path, sol: RegularizedSolution, **extra) -> Path:
    meta = {"mu": sol.mu, **sol.metadata, **extra}
    comments = [f"{k}={fmt(v)}" for k, v in meta.items()]
    rows = zip(sol.coeffs.modes, sol.coeffs.coeffs)
    return write_rows(path, ("n", "f_mu_eps"), rows, comments)


def read_solution(path) -> tuple[SineCoefficients, dict[str, str]]:
    """Return the coefficients and the raw metadata strings."""
    rows, meta = read_rows(path, ("n", "f_mu_eps"))
    return SineCoefficients(_floats(rows, 1, path)), meta

