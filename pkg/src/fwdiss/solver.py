"""Time evolution of the nonlinear Cauchy problem.

Two independent routes:

* `integrate` — pseudo-spectral fourth-order exponential time differencing.
  The linear part (viscosity + nonlocal dispersion) is applied exactly
  through its Fourier symbol; only the convection term is stepped, so the
  scheme has no stiffness restriction from the linear terms.

* `picard_solve` — successive substitution on the mild-solution integral
  equation, with the memory integral discretized by the trapezoid rule on a
  fixed time grid.  Valid for small data and moderate horizons; used to
  cross-validate the time stepper.

Mass is conserved exactly at the semi-discrete level: every term of the
equation is a spatial derivative and the dispersion symbol vanishes at
xi = 0, so the k = 0 Fourier mode never moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConfigurationError,
    Field,
    Grid,
    NumericalConsistencyError,
    Params,
    ResolutionError,
    FRAME_COMOVING,
    forward_coeffs,
    inverse_values,
)
from .kernel import symbol


class StabilityError(RuntimeError):
    """Blow-up of the iteration; carries a suggested smaller time step."""

    def __init__(self, message: str, suggested_dt: float | None = None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class DivergenceError(RuntimeError):
    """Picard iteration failed to contract (data too large for the map)."""


@dataclass(frozen=True)
class SolveConfig:
    params: Params
    grid: Grid
    t_end: float
    dt: float
    dealias: float = 2.0 / 3.0
    snapshot_times: tuple[float, ...] = ()
    accumulate_calM: bool = False
    disable_nonlinearity: bool = False  # test hook: pure linear propagation

    def __post_init__(self) -> None:
        if not 0 < self.dt <= self.t_end:
            raise ConfigurationError(f"need 0 < dt <= t_end, got dt={self.dt}, t_end={self.t_end}")
        if not 0.5 < self.dealias <= 1.0:
            raise ConfigurationError(f"dealias fraction must lie in (0.5, 1], got {self.dealias}")
        n_steps = self.t_end / self.dt
        if abs(n_steps - round(n_steps)) > 1e-8 * max(1.0, n_steps):
            raise ConfigurationError("t_end must be an integer multiple of dt")
        times = tuple(sorted(self.snapshot_times))
        for t in times:
            if not 0 <= t <= self.t_end + 1e-12:
                raise ConfigurationError(f"snapshot time {t} outside [0, t_end]")
        object.__setattr__(self, "snapshot_times", times)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    """Snapshots plus per-step diagnostics of one solve."""

    config: SolveConfig
    snapshots: list[tuple[float, Field]]
    calM_partial: float | None
    diagnostics: dict[str, np.ndarray] = field(repr=False)

    def diagnostic_series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self.diagnostics["t"], self.diagnostics[name]


def linear_symbol(grid: Grid, params: Params) -> np.ndarray:
    """Fourier multiplier of the linear part in the grid's frame."""
    xi = grid.xi
    b2 = params.b**2
    damp = -params.mu * xi**2
    if grid.frame == FRAME_COMOVING:
        disp = 1j * 2.0 * params.B * xi**3 / (params.b * (b2 + xi**2))
    else:
        disp = -1j * 2.0 * params.B * params.b * xi / (b2 + xi**2)
    return damp + disp


def dealias_mask(grid: Grid, fraction: float) -> np.ndarray:
    return (np.abs(grid.xi) <= fraction * grid.xi_max * (1.0 + 1e-12)).astype(float)


def _odd_power(v: np.ndarray, p: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = np.sign(v) * np.abs(v) ** p
    if not np.all(np.isfinite(out)):
        raise NumericalConsistencyError("nonlinearity overflowed")
    return out


def nonlinear_term(u: Field, params: Params, dealias: float = 2.0 / 3.0) -> Field:
    """-d/dx (|u|^(p-1) u), pseudo-spectral with the 2/3-rule mask."""
    grid = u.grid
    ghat = forward_coeffs(_odd_power(u.values, params.p), grid)
    ghat *= dealias_mask(grid, dealias)
    vals = inverse_values(-1j * grid.xi * ghat, grid).real
    return Field(grid, vals)


# ---------------------------------------------------------------------------
# ETDRK4 machinery


def _phi(z: np.ndarray, k: int) -> np.ndarray:
    """phi_k(z) = sum_j z^j / (j+k)!, stable near z = 0 via truncated series."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1.0
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.ones_like(zs) / math.factorial(k)
    acc += term
    for j in range(1, 25):
        term = term * zs / (j + k)
        acc += term
    out[small] = acc
    zl = z[~small]
    ez = np.exp(zl)
    if k == 1:
        out[~small] = (ez - 1.0) / zl
    elif k == 2:
        out[~small] = (ez - 1.0 - zl) / zl**2
    else:
        out[~small] = (ez - 1.0 - zl - 0.5 * zl**2) / zl**3
    return out


@dataclass(frozen=True)
class _EtdCoeffs:
    e_full: np.ndarray
    e_half: np.ndarray
    q: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


def _etdrk4_coeffs(lin: np.ndarray, dt: float) -> _EtdCoeffs:
    z = dt * lin
    phi1 = _phi(z, 1)
    phi2 = _phi(z, 2)
    phi3 = _phi(z, 3)
    return _EtdCoeffs(
        e_full=np.exp(z),
        e_half=np.exp(0.5 * z),
        q=0.5 * dt * _phi(0.5 * z, 1),
        f1=dt * (phi1 - 3.0 * phi2 + 4.0 * phi3),
        f2=dt * (phi2 - 2.0 * phi3),
        f3=dt * (4.0 * phi3 - phi2),
    )


def _check_initial_resolution(u0hat: np.ndarray, grid: Grid) -> None:
    peak = np.max(np.abs(u0hat))
    if peak == 0.0:
        return
    tail = np.abs(u0hat[np.abs(grid.xi) > (2.0 / 3.0) * grid.xi_max]).max()
    if tail > 1e-12 * peak:
        raise ResolutionError(
            f"initial spectrum tail {tail / peak:.2e} of peak exceeds 1e-12; refine the grid"
        )


def integrate(u0: Field, config: SolveConfig) -> Trajectory:
    """Advance the full nonlinear problem, collecting snapshots and diagnostics.

    Raises StabilityError (with a suggested dt) on blow-up of the iterates
    and NumericalConsistencyError if the exactly-conserved mass drifts.
    """
    grid, params, dt = config.grid, config.params, config.dt
    xi = grid.xi
    uhat = forward_coeffs(u0.values, grid)
    _check_initial_resolution(uhat, grid)
    lin = linear_symbol(grid, params)
    co = _etdrk4_coeffs(lin, dt)
    mask = dealias_mask(grid, config.dealias)
    deriv = -1j * xi * mask

    if config.disable_nonlinearity:
        def nl(vhat: np.ndarray) -> np.ndarray:
            return np.zeros_like(vhat)
    else:
        def nl(vhat: np.ndarray) -> np.ndarray:
            v = inverse_values(vhat, grid).real
            return deriv * forward_coeffs(_odd_power(v, params.p), grid)

    n_steps = config.n_steps
    snap_steps = sorted({int(round(t / dt)) for t in config.snapshot_times})
    snap_set = set(snap_steps)

    t_diag = np.empty(n_steps + 1)
    mass = np.empty(n_steps + 1)
    l2 = np.empty(n_steps + 1)
    linf = np.empty(n_steps + 1)
    nl_mass = np.empty(n_steps + 1)
    dx = grid.dx

    def record(k: int, values: np.ndarray) -> None:
        t_diag[k] = k * dt
        mass[k] = dx * values.sum()
        l2[k] = math.sqrt(dx * np.dot(values, values))
        linf[k] = np.max(np.abs(values))
        nl_mass[k] = dx * _odd_power(values, params.p).sum()

    snapshots: list[tuple[float, Field]] = []
    u_phys = u0.values.copy()
    record(0, u_phys)
    if 0 in snap_set:
        snapshots.append((0.0, Field(grid, u_phys.copy())))
    calM = 0.0

    for k in range(1, n_steps + 1):
        n0 = nl(uhat)
        a = co.e_half * uhat + co.q * n0
        n1 = nl(a)
        b = co.e_half * uhat + co.q * n1
        n2 = nl(b)
        c = co.e_half * a + co.q * (2.0 * n2 - n0)
        n3 = nl(c)
        uhat = co.e_full * uhat + co.f1 * n0 + 2.0 * co.f2 * (n1 + n2) + co.f3 * n3

        u_phys = inverse_values(uhat, grid).real
        if not np.all(np.isfinite(u_phys)):
            raise StabilityError(
                f"solution lost finiteness at t={k * dt:.4g}; retry with dt={dt / 2:g}",
                suggested_dt=dt / 2,
            )
        record(k, u_phys)
        if linf[k] > 10.0 * max(linf[k - 1], 1e-300):
            raise StabilityError(
                f"norm grew more than tenfold in one step at t={k * dt:.4g}; "
                f"retry with dt={dt / 2:g}",
                suggested_dt=dt / 2,
            )
        if abs(mass[k] - mass[0]) > 1e-8 * abs(mass[0]) + 1e-12:
            raise NumericalConsistencyError(
                f"mass drifted by {abs(mass[k] - mass[0]):.3e} at t={k * dt:.4g}"
            )
        if config.accumulate_calM:
            calM += 0.5 * dt * (nl_mass[k - 1] + nl_mass[k])
        if k in snap_set:
            snapshots.append((k * dt, Field(grid, u_phys.copy())))

    diagnostics = {"t": t_diag, "mass": mass, "l2": l2, "linf": linf, "nl_mass": nl_mass}
    return Trajectory(
        config=config,
        snapshots=snapshots,
        calM_partial=calM if config.accumulate_calM else None,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Picard fixed point on the mild-solution equation


@dataclass(frozen=True)
class PicardResult:
    """Fixed point of the mild-solution map plus the contraction history."""

    u: Field
    ratios: tuple[float, ...]
    iterations: int
    converged: bool


def picard_solve(
    u0: Field,
    t: float,
    params: Params,
    grid: Grid,
    max_iter: int = 30,
    n_nodes: int | None = None,
    tol: float = 1e-9,
) -> PicardResult:
    """Iterate u -> T(t)*u0 - integral_0^t dx T(t-tau) * (|u|^(p-1) u)(tau) dtau.

    The candidate solution is represented by its spectra on a uniform tau
    grid; the memory integral uses trapezoid weights.  Divergence (three
    consecutive non-contracting sweeps) raises DivergenceError, which is the
    numerical signature of data outside the small-data regime.
    """
    if t <= 0:
        raise ConfigurationError(f"horizon must be positive, got {t}")
    if n_nodes is None:
        n_nodes = max(81, int(round(t / 0.025)) + 1)
    xi = grid.xi
    dtau = t / (n_nodes - 1)
    u0hat = forward_coeffs(u0.values, grid)
    prop = np.stack([symbol(xi, l * dtau, params, frame=grid.frame) for l in range(n_nodes)])
    lin = prop * u0hat[None, :]
    dxi_factor = math.sqrt(np.pi / grid.length)  # Parseval: ||f||_2 = sqrt(dxi)*|coeffs|_2

    uhat = lin.copy()
    ratios: list[float] = []
    prev_delta = None
    bad_streak = 0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ghat = np.empty_like(uhat)
        for j in range(n_nodes):
            v = inverse_values(uhat[j], grid).real
            ghat[j] = forward_coeffs(_odd_power(v, params.p), grid)
        ghat *= (1j * xi)[None, :]
        new = lin.copy()
        for i in range(1, n_nodes):
            w = np.full(i + 1, dtau)
            w[0] = w[-1] = 0.5 * dtau
            new[i] -= np.sum(w[:, None] * prop[i::-1] * ghat[: i + 1], axis=0)
        delta = dxi_factor * float(np.linalg.norm(new[-1] - uhat[-1]))
        uhat = new
        if prev_delta is not None and prev_delta > 0:
            ratio = delta / prev_delta
            ratios.append(ratio)
            bad_streak = bad_streak + 1 if ratio >= 1.0 else 0
            if bad_streak >= 3:
                raise DivergenceError(
                    f"Picard map not contracting (last ratios {ratios[-3:]}); "
                    "initial data too large for the small-data regime"
                )
        prev_delta = delta
        if delta < tol:
            converged = True
            break
    final = inverse_values(uhat[-1], grid).real
    return PicardResult(
        u=Field(grid, final),
        ratios=tuple(ratios),
        iterations=iterations,
        converged=converged,
    )
