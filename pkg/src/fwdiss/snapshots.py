"""Binary snapshot format and trajectory persistence.

Snapshot layout (little-endian): magic "FWS1", u32 N, f64 L, u8 frame,
f64 t, then N float64 samples.  Profile dumps append one trailing tag byte
after the payload; the base layout stays parseable either way.

A trajectory is persisted as a directory: `manifest.txt` (flat key-value
configuration), `diagnostics.csv`, and one snapshot file per stored time.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import ConfigurationError, Field, Grid, FRAME_COMOVING, FRAME_LAB
from .solver import Trajectory

MAGIC = b"FWS1"
_HEADER = struct.Struct("<Id B d")  # N, L, frame, t (magic handled separately)

_FRAME_CODES = {FRAME_LAB: 0, FRAME_COMOVING: 1}
_FRAME_NAMES = {v: k for k, v in _FRAME_CODES.items()}

PROFILE_TAGS = {
    "solution": None,
    "similarity": 1,
    "heat_lead": 2,
    "theorem": 3,
}


def write_snapshot(path, f: Field, t: float, profile_tag: int | None = None) -> None:
    payload = MAGIC + _HEADER.pack(f.grid.n, f.grid.length, _FRAME_CODES[f.grid.frame], t)
    payload += np.asarray(f.values, dtype="<f8").tobytes()
    if profile_tag is not None:
        payload += struct.pack("<B", profile_tag)
    Path(path).write_bytes(payload)


def read_snapshot(path) -> tuple[Field, float, int | None]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ConfigurationError(f"{path}: not a snapshot file (bad magic {raw[:4]!r})")
    n, length, frame_code, t = _HEADER.unpack_from(raw, 4)
    if frame_code not in _FRAME_NAMES:
        raise ConfigurationError(f"{path}: unknown frame code {frame_code}")
    start = 4 + _HEADER.size
    end = start + 8 * n
    if len(raw) not in (end, end + 1):
        raise ConfigurationError(f"{path}: truncated or oversized payload")
    values = np.frombuffer(raw[start:end], dtype="<f8").copy()
    tag = raw[end] if len(raw) == end + 1 else None
    grid = Grid(length, n, _FRAME_NAMES[frame_code])
    return Field(grid, values), t, tag


DIAG_COLUMNS = ("t", "mass", "l2", "linf", "calM_partial")


def write_diagnostics_csv(path, traj: Trajectory) -> None:
    t = traj.diagnostics["t"]
    if traj.config.accumulate_calM:
        nl = traj.diagnostics["nl_mass"]
        calm = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (nl[1:] + nl[:-1]))])
    else:
        calm = np.zeros_like(t)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DIAG_COLUMNS) + "\n")
        for i in range(len(t)):
            row = (
                t[i],
                traj.diagnostics["mass"][i],
                traj.diagnostics["l2"][i],
                traj.diagnostics["linf"][i],
                calm[i],
            )
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_trajectory(dirpath, traj: Trajectory, manifest_text: str) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    (d / "manifest.txt").write_text(manifest_text, encoding="utf-8")
    write_diagnostics_csv(d / "diagnostics.csv", traj)
    for i, (t, f) in enumerate(traj.snapshots):
        write_snapshot(d / f"snapshot_{i:04d}.fws", f, t)


def load_snapshots(dirpath) -> list[tuple[float, Field]]:
    d = Path(dirpath)
    out = []
    for p in sorted(d.glob("snapshot_*.fws")):
        f, t, _ = read_snapshot(p)
        out.append((t, f))
    return out


def load_diagnostics(dirpath) -> dict[str, np.ndarray]:
    path = Path(dirpath) / "diagnostics.csv"
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}
