"""Seeded synthetic measurement noise for the final data ``g`` and the weight ``phi``.

    g_eps   = g * (1 + eps * r(x) / ||g||)
    phi_eps = phi + eps * r(t)          (or eps * |r(t)| in absolute mode)

with ``r`` i.i.d. uniform on (-1, 1) per grid node. Since ``|r| < 1`` both
``||g_eps - g|| <= eps`` and ``||phi_eps - phi||_{L2(0,T)} <= eps sqrt(T)`` hold
for every draw.

A master seed is split with :class:`numpy.random.SeedSequence` into two
independent child streams: child 0 drives the spatial noise, child 1 the
temporal noise. Changing the spatial grid therefore never changes ``phi_eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import TimeSeries
from .errors import DegenerateDataError, DomainError
from .spectral import GridFunction

PHI_MODES = ("signed", "absolute")


@dataclass(frozen=True)
class NoiseSpec:
    epsilon: float
    seed: int = 0
    phi_mode: str = "signed"
    gnorm_sqrt_pi: bool = False

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise DomainError(f"noise level must be non-negative, got {self.epsilon}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.phi_mode not in PHI_MODES:
            raise DomainError(f"phi_mode must be one of {PHI_MODES}, got {self.phi_mode!r}")


def noise_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """``(spatial, temporal)`` generators derived from one master seed."""
    spatial, temporal = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(spatial), np.random.default_rng(temporal)


def perturb_g(g: GridFunction, spec: NoiseSpec, rng: np.random.Generator) -> GridFunction:
    if spec.epsilon == 0:
        return g
    gnorm = g.norm()
    if gnorm == 0:
        raise DegenerateDataError("cannot apply relative noise to data with zero norm")
    if spec.gnorm_sqrt_pi:
        gnorm *= math.sqrt(math.pi)
    r = rng.uniform(-1.0, 1.0, g.values.size)
    return GridFunction(g.grid, g.values * (1.0 + spec.epsilon * r / gnorm))


def perturb_phi(phi: TimeSeries, spec: NoiseSpec, rng: np.random.Generator) -> TimeSeries:
    if spec.epsilon == 0:
        return phi
    r = rng.uniform(-1.0, 1.0, phi.values.size)
    if spec.phi_mode == "absolute":
        r = np.abs(r)
    return TimeSeries(phi.grid, phi.values + spec.epsilon * r)


def perturb(g: GridFunction, phi: TimeSeries, spec: NoiseSpec) -> tuple[GridFunction, TimeSeries]:
    """Perturb both data with the sub-streams of ``spec.seed``."""
    spatial, temporal = noise_streams(spec.seed)
    return perturb_g(g, spec, spatial), perturb_phi(phi, spec, temporal)
