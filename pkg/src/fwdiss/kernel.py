"""Linear propagator of the equation and the Gaussian kernels it relaxes to.

The linear semigroup acts in Fourier space by multiplication with

    exp(-mu*t*xi**2 - i*2*B*b*t*xi / (b**2 + xi**2))        (lab frame)

whose zero-dispersion-limit is the heat kernel drifting at speed 2B/b.  The
propagator kernel itself has no closed form; it is synthesized on demand on
a periodic grid from the symbol.  The drifting heat kernel and its first
three spatial derivatives are evaluated in closed form.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .core import (
    SQRT_2PI,
    DomainError,
    Field,
    Grid,
    Params,
    ResolutionError,
    Spectrum,
    FRAME_COMOVING,
    FRAME_LAB,
    decay_exponent,
    inverse_transform,
    lq_norm,
    transform,
)


class SymbolForm(Enum):
    """Algebraically equivalent ways of writing the propagator symbol.

    FULL keeps the dispersion multiplier 2*B*b*xi/(b**2+xi**2) intact;
    DRIFT_EXTRACTED peels off the constant drift 2B/b; CUBIC_EXTRACTED
    additionally peels off the Airy-like cubic term 2B*xi**3/b**3.
    """

    FULL = "full"
    DRIFT_EXTRACTED = "drift_extracted"
    CUBIC_EXTRACTED = "cubic_extracted"


def _check_time(t: float) -> None:
    if t < 0:
        raise DomainError(f"propagation time must be nonnegative, got {t}")


def symbol(xi, t: float, params: Params, frame: str = FRAME_LAB):
    """Propagator symbol at wavenumber(s) xi and time t.

    In the co-moving frame the drift phase is removed analytically, leaving
    exp(-mu*t*xi**2 + i*2*B*t*xi**3/(b*(b**2+xi**2))); the modulus is
    exp(-mu*t*xi**2) in either frame.
    """
    _check_time(t)
    xi = np.asarray(xi, dtype=float)
    b2 = params.b**2
    damp = -params.mu * t * xi**2
    if frame == FRAME_COMOVING:
        phase = 2.0 * params.B * t * xi**3 / (params.b * (b2 + xi**2))
    elif frame == FRAME_LAB:
        phase = -2.0 * params.B * params.b * t * xi / (b2 + xi**2)
    else:
        raise DomainError(f"unknown frame {frame!r}")
    return np.exp(damp + 1j * phase)


def symbol_form(xi, t: float, params: Params, form: SymbolForm, frame: str = FRAME_LAB):
    """Evaluate one of the rewritten symbol expressions literally."""
    _check_time(t)
    xi = np.asarray(xi, dtype=float)
    B, b, mu = params.B, params.b, params.mu
    b2 = b**2
    damp = -mu * t * xi**2
    if form is SymbolForm.FULL:
        phase = -2.0 * B * b * t * xi / (b2 + xi**2)
    elif form is SymbolForm.DRIFT_EXTRACTED:
        phase = -params.alpha * t * xi + 2.0 * B * t * xi**3 / (b * (b2 + xi**2))
    elif form is SymbolForm.CUBIC_EXTRACTED:
        phase = (
            -params.alpha * t * xi
            + 2.0 * B * t * xi**3 / b**3
            - 2.0 * B * t * xi**5 / (b**3 * (b2 + xi**2))
        )
    else:
        raise DomainError(f"unknown symbol form {form!r}")
    if frame == FRAME_COMOVING:
        phase = phase + params.alpha * t * xi
    elif frame != FRAME_LAB:
        raise DomainError(f"unknown frame {frame!r}")
    return np.exp(damp + 1j * phase)


def apply_semigroup(f: Field, t: float, params: Params) -> Field:
    """Propagate a field by the exact linear flow for time t.

    The spectrum is multiplied pointwise by the symbol in the field's own
    frame; t = 0 is the identity up to transform round trip.
    """
    _check_time(t)
    s = transform(f)
    coeffs = s.coeffs * symbol(f.grid.xi, t, params, frame=f.grid.frame)
    return inverse_transform(Spectrum(f.grid, coeffs), residual_tol=1e-9)


def gauss_deriv(x, t: float, mu: float, l: int = 0):
    """Spatial derivative of order l (0..3) of the heat kernel G(x, t).

    Closed Hermite-polynomial forms; G = (4*pi*mu*t)**-0.5 exp(-x**2/(4*mu*t)).
    """
    if t <= 0:
        raise DomainError(f"heat kernel requires t > 0, got {t}")
    if l not in (0, 1, 2, 3):
        raise DomainError(f"derivative order must be 0..3, got {l}")
    x = np.asarray(x, dtype=float)
    g = np.exp(-(x**2) / (4.0 * mu * t)) / math.sqrt(4.0 * math.pi * mu * t)
    if l == 0:
        return g
    if l == 1:
        return -x / (2.0 * mu * t) * g
    if l == 2:
        return (x**2 - 2.0 * mu * t) / (4.0 * mu**2 * t**2) * g
    return -x * (x**2 - 6.0 * mu * t) / (8.0 * mu**3 * t**3) * g


def g0_deriv(x, t: float, params: Params, l: int = 0):
    """Derivative of the drifting heat kernel G0(x, t) = G(x - (2B/b) t, t)."""
    return gauss_deriv(np.asarray(x, dtype=float) - params.alpha * t, t, params.mu, l)


def g0_deriv_field(grid: Grid, t: float, params: Params, l: int = 0) -> Field:
    """Drifting heat kernel derivative sampled on a grid, honoring its frame."""
    offset = 0.0 if grid.frame == FRAME_COMOVING else params.alpha * t
    return Field(grid, gauss_deriv(grid.x - offset, t, params.mu, l))


def g0_time_deriv_field(grid: Grid, t: float, params: Params) -> Field:
    """Time derivative of the drifting heat kernel via the PDE it satisfies.

    d/dt G0 = mu * d2/dx2 G0 - (2B/b) d/dx G0, evaluated from the closed
    spatial derivatives (no finite differences).  In the co-moving frame the
    drift term is absent.
    """
    offset = 0.0 if grid.frame == FRAME_COMOVING else params.alpha * t
    y = grid.x - offset
    vals = params.mu * gauss_deriv(y, t, params.mu, 2)
    if grid.frame == FRAME_LAB:
        vals = vals - params.alpha * gauss_deriv(y, t, params.mu, 1)
    return Field(grid, vals)


def _require_resolved(grid: Grid, t: float, params: Params) -> None:
    # Gaussian factor must underflow at the Nyquist wavenumber, otherwise the
    # synthesized kernel carries spectral truncation error.
    if params.mu * t * grid.xi_max**2 <= 30.0:
        raise ResolutionError(
            f"grid does not resolve the kernel at t={t}: "
            f"mu*t*xi_max^2 = {params.mu * t * grid.xi_max**2:.2f} <= 30"
        )


def synthesize_kernel(grid: Grid, t: float, params: Params, l: int = 0) -> Field:
    """Propagator kernel (l-th spatial derivative) synthesized from its symbol."""
    _require_resolved(grid, t, params)
    xi = grid.xi
    coeffs = (1.0 / SQRT_2PI) * (1j * xi) ** l * symbol(xi, t, params, frame=grid.frame)
    return inverse_transform(Spectrum(grid, coeffs))


def kernel_gap(
    t: float,
    l: int,
    q: float,
    order: int,
    params: Params,
    grid: Grid,
) -> float:
    """L^q distance between the propagator kernel and its heat-kernel expansion.

    order 1 measures || d^l (T - G0)(t) ||_q; order 2 subtracts the next
    expansion term as well: || d^l (T - G0 + (2B/b^3) t d^3 G0)(t) ||_q.
    Both kernels are synthesized on the grid from their symbols.
    """
    if order not in (1, 2):
        raise DomainError(f"expansion order must be 1 or 2, got {order}")
    if l not in (0, 1):
        raise DomainError(f"derivative order must be 0 or 1, got {l}")
    _require_resolved(grid, t, params)
    xi = grid.xi
    s_t = symbol(xi, t, params, frame=grid.frame)
    drift_phase = (
        np.ones_like(xi)
        if grid.frame == FRAME_COMOVING
        else np.exp(-1j * params.alpha * t * xi)
    )
    s_g0 = np.exp(-params.mu * t * xi**2) * drift_phase
    diff = s_t - s_g0
    if order == 2:
        diff = diff + (2.0 * params.B / params.b**3) * t * (1j * xi) ** 3 * s_g0
    coeffs = (1.0 / SQRT_2PI) * (1j * xi) ** l * diff
    gap_field = inverse_transform(Spectrum(grid, coeffs), residual_tol=1e-6)
    return lq_norm(gap_field, q)


def gap_rate_exponent(l: int, q: float, order: int) -> float:
    """Predicted decay exponent of the kernel gap."""
    return -(decay_exponent(q) + 0.5 * order + 0.5 * l)
