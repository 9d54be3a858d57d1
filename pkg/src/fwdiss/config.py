"""Flat key-value run configuration and the named presets.

Config files are plain text, one `section.key = value` per line, `#`
comments allowed.  Every run writes a manifest echoing the fully resolved
configuration in the same format, so a manifest is itself a valid config
and re-running from it reproduces the run (keys under `result.` are
ignored on load).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ConfigurationError, Field, Grid, Params
from .snapshots import read_snapshot
from .solver import SolveConfig


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected 'section.key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


def dump_kv(entries: dict[str, object]) -> str:
    lines = []
    for key, value in entries.items():
        if isinstance(value, float):
            value = repr(float(value))  # plain-float repr even for numpy scalars
        elif isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(repr(float(v)) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _get(cfg: dict[str, str], key: str, default=None) -> str | None:
    if key in cfg:
        return cfg[key]
    if default is None:
        raise ConfigurationError(f"missing config key {key!r}")
    return default


def _as_float(v: str) -> float:
    return math.inf if v in ("inf", "infinity") else float(v)


def _as_bool(v: str) -> bool:
    if v.lower() in ("true", "1", "yes", "on"):
        return True
    if v.lower() in ("false", "0", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {v!r}")


def _float_list(v: str) -> tuple[float, ...]:
    return tuple(_as_float(tok) for tok in v.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one CLI run."""

    command: str
    raw: dict[str, str]

    def params(self) -> Params:
        return Params(
            p=float(_get(self.raw, "params.p")),
            B=float(_get(self.raw, "params.B", "1.0")),
            b=float(_get(self.raw, "params.b", "1.0")),
            mu=float(_get(self.raw, "params.mu", "1.0")),
        )

    def grid(self) -> Grid:
        return Grid(
            length=float(_get(self.raw, "grid.L")),
            n=int(_get(self.raw, "grid.N")),
            frame=_get(self.raw, "grid.frame", "comoving"),
        )

    def solve_config(self) -> SolveConfig:
        t_end = float(_get(self.raw, "solve.t_end"))
        dt = float(_get(self.raw, "solve.dt"))
        n_snaps = int(_get(self.raw, "solve.n_snapshots", "48"))
        t_first = float(_get(self.raw, "solve.first_snapshot", "2.0"))
        snap = _get(self.raw, "solve.snapshot_times", "auto")
        if snap == "auto":
            times = (0.0,) + tuple(np.geomspace(t_first, t_end, n_snaps))
        else:
            times = _float_list(snap)
        return SolveConfig(
            params=self.params(),
            grid=self.grid(),
            t_end=t_end,
            dt=dt,
            dealias=float(_get(self.raw, "solve.dealias", repr(2.0 / 3.0))),
            snapshot_times=times,
            accumulate_calM=_as_bool(_get(self.raw, "solve.accumulate_calM", "false")),
        )

    def initial_field(self) -> Field:
        """Initial-data menu: gaussian, dipole (its derivative), or FWS1 file."""
        kind = _get(self.raw, "init.kind", "gaussian")
        grid = self.grid()
        if kind == "file":
            f, _, _ = read_snapshot(_get(self.raw, "init.file"))
            return f
        amp = float(_get(self.raw, "init.amplitude", "0.05"))
        width = float(_get(self.raw, "init.width", "1.0"))
        center = float(_get(self.raw, "init.center", "0.0"))
        z = (grid.x - center) / width
        if kind == "gaussian":
            values = amp * np.exp(-0.5 * z**2)
        elif kind == "dipole":
            values = -amp * z / width * np.exp(-0.5 * z**2)
        else:
            raise ConfigurationError(f"unknown init.kind {kind!r}")
        return Field(grid, values)

    def q_list(self) -> tuple[float, ...]:
        return _float_list(_get(self.raw, "check.q_list", "2 inf"))

    def tolerance(self, default: float) -> float:
        return float(_get(self.raw, "check.tolerance", repr(default)))


PRESETS: dict[str, dict[str, str]] = {
    # The fit window [10, 1e3] must sit inside the asymptotic regime of the
    # kernel expansion; at B=b=mu=1 the exact gaps are still 15-50% below
    # their asymptotes at t=10 and the fitted slopes land outside +-0.05.
    # These parameters balance the cubic-phase and fifth-power corrections
    # (worst-case slope deviation ~0.006 over all order/l/q combinations).
    "kernel-default": {
        "params.p": "2.5",
        "params.B": "2.0",
        "params.b": "2.0",
        "params.mu": "2.0",
        "grid.L": "600.0",
        "grid.N": "8192",
        "grid.frame": "comoving",
        "check.t_min": "10.0",
        "check.t_max": "1000.0",
        "check.n_times": "30",
        "check.l_list": "0 1",
        "check.q_list": "2 inf",
        "check.orders": "1 2",
        "check.tolerance": "0.05",
    },
    "profile-default": {
        "params.p": "2.5",
        "params.B": "1.0",
        "params.b": "1.0",
        "params.mu": "1.0",
        "grid.L": "40.0",
        "grid.N": "4096",
        "grid.frame": "comoving",
        "profile.M": "0.1",
        "check.t_list": "1 4 16",
        "check.x_list": "0 0.5 -0.5 1 -1 2 -2",
        "check.tolerance": "1e-4",
    },
    "decay": {
        "params.p": "2.5",
        "params.B": "1.0",
        "params.b": "1.0",
        "params.mu": "1.0",
        "grid.L": "256.0",
        "grid.N": "16384",
        "grid.frame": "comoving",
        "init.kind": "gaussian",
        "init.amplitude": "0.05",
        "init.width": "1.0",
        "solve.t_end": "500.0",
        "solve.dt": "0.1",
        "check.fit_t_min": "10.0",
        "check.tolerance": "0.05",
    },
    # Regime presets are tuned so the second-order profile dominates the
    # slowly decaying remainders (dispersive kernel gap ~ B*M, early-time
    # nonlinear-mass deficit, heat second moment) within the t <= 500
    # horizon; see the preset notes in the README.
    "p2.5": {
        "params.p": "2.5",
        "params.B": "0.02",
        "params.b": "1.0",
        "params.mu": "4.0",
        "grid.L": "512.0",
        "grid.N": "8192",
        "grid.frame": "comoving",
        "init.kind": "gaussian",
        "init.amplitude": "0.2",
        "init.width": "1.0",
        "solve.t_end": "500.0",
        "solve.dt": "0.2",
        "check.q_list": "2 inf",
        "check.tolerance": "0.2",
    },
    # Data shaped like the heat kernel at unit time (width sqrt(2 mu)) so the
    # log-window mismatch of the critical correction cancels.
    "p3": {
        "params.p": "3.0",
        "params.B": "0.005",
        "params.b": "1.0",
        "params.mu": "0.5",
        "grid.L": "256.0",
        "grid.N": "4096",
        "grid.frame": "comoving",
        "init.kind": "gaussian",
        "init.amplitude": "0.24",
        "init.width": "1.0",
        "solve.t_end": "500.0",
        "solve.dt": "0.2",
        "check.q_list": "2 inf",
        "check.tolerance": "0.2",
    },
    # Off-center data gives a nonzero first moment, so every term of the
    # supercritical profile (m, calM, dispersive cubic) is exercised.
    "p4": {
        "params.p": "4.0",
        "params.B": "0.4",
        "params.b": "1.0",
        "params.mu": "1.0",
        "grid.L": "256.0",
        "grid.N": "4096",
        "grid.frame": "comoving",
        "init.kind": "gaussian",
        "init.amplitude": "0.1",
        "init.width": "1.5",
        "init.center": "2.0",
        "solve.t_end": "500.0",
        "solve.dt": "0.2",
        "solve.accumulate_calM": "true",
        "check.q_list": "2 inf",
        "check.tolerance": "0.2",
    },
}


def resolve_config(
    command: str,
    preset: str | None,
    config_path: str | None,
    overrides: dict[str, str] | None = None,
) -> RunConfig:
    raw: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(
                f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        raw.update(PRESETS[preset])
    if config_path is not None:
        file_cfg = parse_kv(Path(config_path).read_text(encoding="utf-8"))
        raw.update({k: v for k, v in file_cfg.items() if not k.startswith("result.")})
    if overrides:
        raw.update(overrides)
    if not raw:
        raise ConfigurationError("no configuration given: pass --preset and/or --config")
    return RunConfig(command=command, raw=dict(sorted(raw.items())))


def manifest_text(config: RunConfig, results: dict[str, object] | None = None) -> str:
    entries: dict[str, object] = dict(config.raw)
    entries["run.command"] = config.command
    if results:
        for k, v in results.items():
            entries[f"result.{k}"] = v
    return dump_kv(entries)
