"""Horizon geometry and Hawking spectra of rotating acoustic black holes."""

from .flowfield import (
    ConstantVortex,
    CotangentPoint,
    CrossflowSink,
    TangentVortex,
    TrigPoly,
    eval_field,
    hamiltonian_factors,
    hamiltonian_symbol,
)
from .numerics import (
    QuadratureSpec,
    adaptive_integrate,
    complex_gamma,
    fourier_coefficients,
    gamma1,
    laplace_power_integral,
    laplace_power_quadrature,
    oscillatory_log_integral,
    principal_power,
)

__version__ = "0.1.0"
