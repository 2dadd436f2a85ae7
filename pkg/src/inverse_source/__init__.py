"""Recovery of the spatial factor ``f(x)`` of a separable heat source.

The model is ``u_t - a(t) u_xx = phi(t) f(x)`` on ``(0, pi) x (0, T)`` with
``u(., 0) = 0``, homogeneous Dirichlet walls and observed ``u(., T) = g``.
The map ``f -> g`` is diagonal in the sine basis, so inversion reduces to
per-mode Tikhonov filtering.
"""
from .coefficients import (
    AffineDiffusion,
    AnalyticTimeFunction,
    ConstantDiffusion,
    PhiTable,
    TabulatedDiffusion,
    TimeGrid,
    TimeSeries,
    build_phi_table,
    phi_envelope_check,
    phi_integral,
)
from .noise import NoiseSpec, perturb
from .operator import ProblemDefinition, forward_apply, forward_evolution, naive_inversion, singular_values
from .regularization import (
    APosteriori,
    APriori,
    Fixed,
    PowerLaw,
    RegularizedSolution,
    choose_mu_aposteriori,
    choose_mu_apriori,
    discrepancy,
    filter_factor,
    regularize,
    tikhonov_solve,
)
from .spectral import GridFunction, SineCoefficients, SpatialGrid, sine_transform, synthesize

__version__ = "0.1.0"
