"""Shared numeric substrate: parameters, periodic grids, fields, transforms, norms.

The whole-line Cauchy problem is truncated to a periodic box [-L, L).  All
solution mass is expected to stay well inside the box; `moment` checks this
and attaches a truncation warning when it fails.

Fourier convention: the discrete coefficients approximate the symmetric
continuum transform

    f_hat(xi) = (2*pi)**-0.5 * integral exp(-i*x*xi) f(x) dx

sampled at xi_k = pi*k/L, stored in numpy FFT order.  With this convention
kernel symbols written for the continuum transform apply verbatim to the
discrete coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)

FRAME_LAB = "lab"
FRAME_COMOVING = "comoving"
_FRAMES = (FRAME_LAB, FRAME_COMOVING)


class ConfigurationError(ValueError):
    """Invalid parameter or grid configuration."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ResolutionError(RuntimeError):
    """Grid cannot resolve the requested kernel or field."""


class NumericalConsistencyError(RuntimeError):
    """An internal consistency check (realness, conservation) failed."""


class AccuracyError(RuntimeError):
    """Quadrature refinement failed to converge to the requested tolerance."""


class InsufficientDataError(RuntimeError):
    """Not enough samples to carry out a fit or check."""


class TruncationWarning(UserWarning):
    """Field does not decay at the box boundary; integrals are suspect."""


@dataclass(frozen=True)
class Params:
    """Physical parameters of the dissipative nonlocal wave equation.

    p is the nonlinearity exponent (|u|^(p-1) u convection), B and b the
    amplitude and inverse width of the exponential dispersion kernel
    B*exp(-b|x|), mu the viscosity.
    """

    p: float
    B: float = 1.0
    b: float = 1.0
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.p > 2:
            raise ConfigurationError(f"nonlinearity exponent must satisfy p > 2, got {self.p}")
        for name in ("B", "b", "mu"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def alpha(self) -> float:
        """Drift speed 2B/b of the co-moving frame."""
        return 2.0 * self.B / self.b


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) with N points (N a power of two).

    frame records which coordinate the samples live in: "lab" (x) or
    "comoving" (y = x - (2B/b) t).  The two coincide at t = 0.
    """

    length: float
    n: int
    frame: str = FRAME_LAB

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ConfigurationError(f"half-length must be positive, got {self.length}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ConfigurationError(f"n must be a power of two >= 8, got {self.n}")
        if self.frame not in _FRAMES:
            raise ConfigurationError(f"frame must be one of {_FRAMES}, got {self.frame!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.length / self.n

    @property
    def x(self) -> np.ndarray:
        """Grid nodes x_j = -L + j*dx."""
        return -self.length + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Wavenumbers pi*k/L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def xi_max(self) -> float:
        return np.pi * (self.n // 2) / self.length

    def with_frame(self, frame: str) -> "Grid":
        return Grid(self.length, self.n, frame)


@dataclass(frozen=True)
class Field:
    """Real samples u(x_j) on a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n,):
            raise ConfigurationError(
                f"values shape {values.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field values must be finite")


@dataclass(frozen=True)
class Spectrum:
    """Discrete Fourier coefficients (FFT order) of a field."""

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.shape != (self.grid.n,):
            raise ConfigurationError(
                f"coeffs shape {coeffs.shape} does not match grid n={self.grid.n}"
            )


def _phase(n: int) -> np.ndarray:
    # (-1)**k factor translating FFT indexing (x_0 = 0) to the box [-L, L).
    ph = np.ones(n)
    ph[1::2] = -1.0
    return ph


def forward_coeffs(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Raw transform: samples -> coefficients (no type wrapping)."""
    return (grid.dx / SQRT_2PI) * _phase(grid.n) * np.fft.fft(values)


def inverse_values(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Raw inverse transform; returns the complex samples unchecked."""
    dxi = np.pi / grid.length
    return (dxi * grid.n / SQRT_2PI) * np.fft.ifft(_phase(grid.n) * coeffs)


def transform(f: Field) -> Spectrum:
    """Discrete realization of the symmetric Fourier transform."""
    return Spectrum(f.grid, forward_coeffs(f.values, f.grid))


def inverse_transform(s: Spectrum, residual_tol: float = 1e-9) -> Field:
    """Inverse transform back to a real field.

    The imaginary residue (conjugate-symmetry violation) is checked against
    residual_tol times the field scale and discarded.
    """
    z = inverse_values(s.coeffs, s.grid)
    scale = np.max(np.abs(z.real))
    residue = np.max(np.abs(z.imag))
    if residue > residual_tol * max(scale, 1e-300):
        raise NumericalConsistencyError(
            f"imaginary residue {residue:.3e} exceeds {residual_tol:.1e} of field scale {scale:.3e}"
        )
    return Field(s.grid, z.real)


def lq_norm(f: Field, q: float) -> float:
    """L^q norm by the rectangle rule; q may be math.inf."""
    if q != math.inf and q < 1:
        raise DomainError(f"q must be >= 1 or infinity, got {q}")
    a = np.abs(f.values)
    if q == math.inf:
        return float(a.max(initial=0.0))
    return float((f.grid.dx * np.sum(a**q)) ** (1.0 / q))


def l2_distance(f: Field, g: Field) -> float:
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")
    return lq_norm(Field(f.grid, f.values - g.values), 2)


_BOUNDARY_DECAY = 1e-10


def moment(f: Field, order: int) -> float:
    """Zeroth or first moment of the field by the rectangle rule.

    Emits TruncationWarning when the field fails to decay below 1e-10 of
    its peak at the box boundary (the integral then carries truncation
    error from the periodic wrap).
    """
    if order not in (0, 1):
        raise DomainError(f"moment order must be 0 or 1, got {order}")
    v = f.values
    peak = np.max(np.abs(v))
    if peak > 0 and max(abs(v[0]), abs(v[-1])) > _BOUNDARY_DECAY * peak:
        warnings.warn(
            "field does not decay at the box boundary; moment is truncated",
            TruncationWarning,
            stacklevel=2,
        )
    if order == 0:
        return float(f.grid.dx * np.sum(v))
    return float(f.grid.dx * np.sum(f.grid.x * v))


def decay_exponent(q: float) -> float:
    """The ubiquitous L^q heat scaling exponent (1/2)(1 - 1/q)."""
    if q == math.inf:
        return 0.5
    return 0.5 * (1.0 - 1.0 / q)
