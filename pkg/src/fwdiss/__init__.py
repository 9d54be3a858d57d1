"""Spectral simulation and asymptotics verification for the dissipative
generalized Fornberg-Whitham equation."""

from .core import (
    Field,
    Grid,
    Params,
    Spectrum,
    FRAME_COMOVING,
    FRAME_LAB,
    inverse_transform,
    lq_norm,
    moment,
    transform,
)
from .kernel import apply_semigroup, gauss_deriv, g0_deriv, kernel_gap, symbol
from .profiles import (
    ProfileSpec,
    W_p,
    duhamel_selfsim_check,
    theorem_profile,
    w_p,
    w_p_bruteforce,
)
from .solver import SolveConfig, Trajectory, integrate, nonlinear_term, picard_solve
from .analysis import RateFit, compute_constants, heat_expansion_check, rate_fit, theorem_report

__version__ = "0.1.0"

__all__ = [
    "Field",
    "Grid",
    "Params",
    "Spectrum",
    "FRAME_COMOVING",
    "FRAME_LAB",
    "transform",
    "inverse_transform",
    "lq_norm",
    "moment",
    "symbol",
    "apply_semigroup",
    "gauss_deriv",
    "g0_deriv",
    "kernel_gap",
    "ProfileSpec",
    "w_p",
    "w_p_bruteforce",
    "W_p",
    "theorem_profile",
    "duhamel_selfsim_check",
    "SolveConfig",
    "Trajectory",
    "integrate",
    "nonlinear_term",
    "picard_solve",
    "RateFit",
    "rate_fit",
    "compute_constants",
    "heat_expansion_check",
    "theorem_report",
    "__version__",
]
