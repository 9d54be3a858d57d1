"""Command-line front end.

Subcommands: kernel-verify, profile-verify, simulate, theorem-verify,
report.  Exit codes: 0 pass, 2 verification failure, 3 configuration
error, 4 numerical-stability error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, kernel, profiles, snapshots
from .config import RunConfig, manifest_text, parse_kv, resolve_config
from .core import (
    AccuracyError,
    ConfigurationError,
    DomainError,
    Field,
    InsufficientDataError,
    NumericalConsistencyError,
    ResolutionError,
    moment,
)
from .solver import DivergenceError, StabilityError, integrate

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4


def _qstr(q: float) -> str:
    return "inf" if q == math.inf else f"{q:g}"


def _write_manifest(out: Path, config: RunConfig, results: dict | None = None) -> None:
    (out / "manifest.txt").write_text(manifest_text(config, results), encoding="utf-8")


def cmd_kernel_verify(config: RunConfig, out: Path) -> int:
    """Rate table for the kernel expansion gaps; PASS iff all slopes match."""
    params = config.params()
    grid = config.grid()
    raw = config.raw
    t_min = float(raw.get("check.t_min", "10.0"))
    t_max = float(raw.get("check.t_max", "1000.0"))
    n_times = int(raw.get("check.n_times", "30"))
    l_list = [int(float(v)) for v in raw.get("check.l_list", "0 1").split()]
    orders = [int(float(v)) for v in raw.get("check.orders", "1 2").split()]
    q_list = config.q_list()
    tol = config.tolerance(0.05)

    times = np.geomspace(t_min, t_max, n_times)
    rows = []
    for order in orders:
        for l in l_list:
            for q in q_list:
                for t in times:
                    gap = kernel.kernel_gap(float(t), l, q, order, params, grid)
                    rate = kernel.gap_rate_exponent(l, q, order)
                    rows.append(
                        {
                            "t": float(t),
                            "l": l,
                            "q": q,
                            "order": order,
                            "gap": gap,
                            "scaled_gap": gap * float(t) ** -rate,
                        }
                    )

    with open(out / "kernel_gaps.csv", "w", encoding="utf-8") as fh:
        fh.write("t,l,q,order,gap,scaled_gap\n")
        for r in rows:
            fh.write(
                f"{r['t']!r},{r['l']},{_qstr(r['q'])},{r['order']},"
                f"{r['gap']!r},{r['scaled_gap']!r}\n"
            )

    results: dict[str, object] = {}
    failures = []
    lines = []
    for order in orders:
        for l in l_list:
            for q in q_list:
                pts = [
                    (r["t"], r["gap"])
                    for r in rows
                    if (r["order"], r["l"], r["q"]) == (order, l, q)
                ]
                fit = analysis.rate_fit(pts)
                predicted = kernel.gap_rate_exponent(l, q, order)
                ok = abs(fit.slope - predicted) <= tol
                name = f"order{order}.l{l}.q{_qstr(q)}"
                results[f"{name}.slope"] = fit.slope
                results[f"{name}.predicted"] = predicted
                results[f"{name}.verdict"] = "PASS" if ok else "FAIL"
                lines.append(
                    f"{name}: slope={fit.slope:+.4f} predicted={predicted:+.4f} "
                    f"{'PASS' if ok else 'FAIL'}"
                )
                if not ok:
                    failures.append(name)
    (out / "kernel_rates.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(out, config, results)
    from .plotting import save_kernel_gap_figure

    save_kernel_gap_figure(out / "kernel_gaps.png", rows)
    for line in lines:
        print(line)
    if failures:
        print(f"FAILED: {', '.join(failures)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_profile_verify(config: RunConfig, out: Path) -> int:
    """Oracle checks for the profile machinery."""
    params = config.params()
    grid = config.grid()
    raw = config.raw
    rel_tol = config.tolerance(1e-4)
    t_list = [float(v) for v in raw.get("check.t_list", "1 4 16").split()]
    x_list = np.array([float(v) for v in raw.get("check.x_list", "0 0.5 -0.5 1 -1 2 -2").split()])
    M = float(raw.get("profile.M", "0.1"))

    rows = []
    ok = True

    # Gaussian-power mass against the closed constant.
    for tau in (0.5, 1.0, 2.0):
        gp = kernel.gauss_deriv(grid.x, tau, params.mu, 0) ** params.p
        num = float(grid.dx * gp.sum())
        ref = profiles.gaussian_power_mass(tau, params.p, params.mu)
        err = abs(num - ref) / ref
        rows.append(("gaussian_power_mass", tau, num, ref, err))
        ok &= err <= 1e-10

    # Reduction vs definitional brute force.
    scheme = None if params.p < 3.0 else profiles.default_scheme(params)
    reduced = profiles.w_p(x_list, params)
    brute = profiles.w_p_bruteforce(x_list, params, scheme=scheme)
    for x, a, b in zip(x_list, reduced, brute):
        err = abs(a - b)
        rows.append(("w_p_reduction", float(x), float(a), float(b), err))
        ok &= err <= 1e-7

    # Duhamel self-similarity (subcritical only; diverges at the endpoint otherwise).
    if params.p < 3.0:
        spec = profiles.ProfileSpec(params=params, M=M)
        for t in t_list:
            chk = profiles.duhamel_selfsim_check(t, spec, grid)
            rows.append(("duhamel_selfsim", t, chk.distance, chk.rhs_norm, chk.rel_distance))
            ok &= chk.rel_distance <= rel_tol

    with open(out / "profile_checks.csv", "w", encoding="utf-8") as fh:
        fh.write("check,arg,value,reference,error\n")
        for name, arg, val, ref, err in rows:
            fh.write(f"{name},{arg!r},{val!r},{ref!r},{err!r}\n")
    _write_manifest(out, config, {"verdict": "PASS" if ok else "FAIL"})
    for name, arg, val, ref, err in rows:
        print(f"{name}({arg:g}): err={err:.3e}")
    return EXIT_OK if ok else EXIT_VERIFY


def _run_simulation(config: RunConfig, out: Path):
    solve_cfg = config.solve_config()
    u0 = config.initial_field()
    traj = integrate(u0, solve_cfg)
    params = solve_cfg.params
    want_calm = solve_cfg.accumulate_calM and params.p > 3.0
    consts = analysis.compute_constants(u0, traj if want_calm else None, params)
    results = {"M": consts.M, "m": consts.m}
    if consts.calM is not None:
        results["calM"] = consts.calM
        results["calM_tail"] = consts.calM_tail
    snapshots.save_trajectory(out / "trajectory", traj, manifest_text(config, results))
    _write_manifest(out, config, results)
    return traj, u0, consts


def cmd_simulate(config: RunConfig, out: Path) -> int:
    traj, _, consts = _run_simulation(config, out)
    print(
        f"simulated {traj.config.n_steps} steps to t={traj.config.t_end:g}; "
        f"M={consts.M:.6g}, m={consts.m:.3g}"
        + (f", calM={consts.calM:.6g}" if consts.calM is not None else "")
    )
    return EXIT_OK


def cmd_theorem_verify(config: RunConfig, out: Path) -> int:
    """Solve one regime and check its asymptotics end to end."""
    traj, u0, consts = _run_simulation(config, out)
    params = traj.config.params
    spec = profiles.ProfileSpec(params=params, M=consts.M, m=consts.m, calM=consts.calM)
    report = analysis.theorem_report(
        traj,
        spec,
        q_list=config.q_list(),
        corollary_tolerance=config.tolerance(0.2),
    )
    _write_report_files(out, report)
    results = {"regime": report.regime}
    all_ok = True
    for q, v in report.verdicts.items():
        tag = f"q{_qstr(q)}"
        results[f"{tag}.limit"] = v.verdict
        results[f"{tag}.decade_ratio"] = v.decade_ratio
        results[f"{tag}.corollary_rel_error"] = v.corollary_rel_error
        corollary_ok = v.corollary_pass or report.degenerate
        all_ok &= v.limit_pass and corollary_ok
        print(
            f"q={_qstr(q)}: limit {v.verdict} (decade ratio {v.decade_ratio:.3f}), "
            f"corollary err {v.corollary_rel_error:.1%} "
            f"({'PASS' if corollary_ok else 'FAIL'})"
        )
    _write_manifest(out, config, results)
    return EXIT_OK if all_ok else EXIT_VERIFY


def _write_report_files(out: Path, report) -> None:
    lines = [
        f"regime = {report.regime}",
        f"degenerate = {report.degenerate}",
        f"window = {report.window[0]!r} {report.window[1]!r}",
    ]
    for q, v in report.verdicts.items():
        tag = f"q{_qstr(q)}"
        lines += [
            f"{tag}.measured_slope = {v.measured_slope!r}",
            f"{tag}.predicted_slope = {v.predicted_slope!r}",
            f"{tag}.decade_ratio = {v.decade_ratio!r}",
            f"{tag}.corollary_measured = {v.corollary_measured!r}",
            f"{tag}.corollary_predicted = {v.corollary_predicted!r}",
            f"{tag}.verdict = {v.verdict}",
        ]
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for name, raw_key, scaled_key in (
        ("residual", "residual_raw", "residual_scaled"),
        ("corollary", "corollary_raw", "corollary_scaled"),
    ):
        with open(out / f"{name}.csv", "w", encoding="utf-8") as fh:
            fh.write("t,q,raw_norm,scaled_norm\n")
            for q in report.q_list:
                s = report.series[q]
                for t, rn, sn in zip(s["t"], s[raw_key], s[scaled_key]):
                    fh.write(f"{t!r},{_qstr(q)},{rn!r},{sn!r}\n")


def cmd_report(out: Path, run_dir: Path) -> int:
    """Render figures and summary tables from a persisted trajectory."""
    from .plotting import save_decay_figure, save_profile_figure, save_residual_figure

    manifest = parse_kv((run_dir / "manifest.txt").read_text(encoding="utf-8"))
    run_cfg = RunConfig(command="report", raw=manifest)
    params = run_cfg.params()
    diag = snapshots.load_diagnostics(run_dir)
    snaps = snapshots.load_snapshots(run_dir)
    if not snaps:
        raise ConfigurationError(f"no snapshots found under {run_dir}")

    sel = diag["t"] >= 10.0
    fits = []
    if np.count_nonzero(sel) >= 8 and np.all(diag["linf"][sel] > 0):
        idx = np.unique(
            np.searchsorted(
                diag["t"], np.geomspace(max(10.0, diag["t"][sel][0]), diag["t"][-1], 100)
            ).clip(0, len(diag["t"]) - 1)
        )
        for key in ("linf", "l2"):
            fits.append(analysis.rate_fit(list(zip(diag["t"][idx], diag[key][idx]))))
    save_decay_figure(out / "decay.png", diag, fits)

    M = float(manifest.get("result.M", "nan"))
    m = float(manifest.get("result.m", "nan"))
    calm_entry = manifest.get("result.calM")
    if math.isnan(M):
        u0 = snaps[0][1]
        M, m = moment(u0, 0), moment(u0, 1)
    calM = float(calm_entry) if calm_entry is not None else None
    spec = profiles.ProfileSpec(params=params, M=M, m=m, calM=calM)

    t_last, u_last = snaps[-1]
    save_profile_figure(out / "profiles.png", t_last, u_last, spec)
    _dump_profiles(out, t_last, u_last.grid, spec)

    traj_stub = _trajectory_stub(run_cfg, snaps, diag)
    try:
        report = analysis.theorem_report(traj_stub, spec, q_list=run_cfg.q_list())
    except InsufficientDataError:
        report = None
    if report is not None:
        save_residual_figure(out / "residuals.png", report)
        _write_report_files(out, report)
    print(f"report written to {out}")
    return EXIT_OK


def _dump_profiles(out: Path, t: float, grid, spec) -> None:
    """Tagged FWS1 dumps of the asymptotic profiles at the final time."""
    lead = Field(grid, spec.M * kernel.g0_deriv_field(grid, t, spec.params, 0).values)
    snapshots.write_snapshot(
        out / "profile_heat_lead.fws", lead, t, snapshots.PROFILE_TAGS["heat_lead"]
    )
    snapshots.write_snapshot(
        out / "profile_theorem.fws",
        profiles.theorem_profile_field(grid, t, spec),
        t,
        snapshots.PROFILE_TAGS["theorem"],
    )
    if spec.regime == profiles.SUBCRITICAL:
        snapshots.write_snapshot(
            out / "profile_similarity.fws",
            profiles.w_p_field(grid, t, spec),
            t,
            snapshots.PROFILE_TAGS["similarity"],
        )


def _trajectory_stub(run_cfg: RunConfig, snaps, diag):
    from .solver import SolveConfig, Trajectory

    t_end = float(diag["t"][-1])
    cfg = SolveConfig(
        params=run_cfg.params(),
        grid=snaps[0][1].grid,
        t_end=t_end,
        dt=float(diag["t"][1] - diag["t"][0]),
        snapshot_times=tuple(t for t, _ in snaps),
    )
    diagnostics = {k: np.asarray(v) for k, v in diag.items() if k != "calM_partial"}
    return Trajectory(config=cfg, snapshots=list(snaps), calM_partial=None, diagnostics=diagnostics)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwdiss",
        description="Spectral solver and asymptotics verification for the "
        "dissipative generalized Fornberg-Whitham equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_run in (
        ("kernel-verify", False),
        ("profile-verify", False),
        ("simulate", False),
        ("theorem-verify", False),
        ("report", True),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None, help="key-value config file")
        sp.add_argument("--preset", type=str, default=None, help="named preset")
        sp.add_argument("--out", type=Path, required=True, help="output directory")
        sp.add_argument("--tolerance", type=float, default=None, help="tolerance override")
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a single config key",
        )
        if needs_run:
            sp.add_argument("--run", type=Path, required=True, help="trajectory directory")
    return parser


_DEFAULT_PRESET = {
    "kernel-verify": "kernel-default",
    "profile-verify": "profile-default",
    "simulate": "decay",
    "theorem-verify": "p2.5",
    "report": None,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
            overrides[key.strip()] = value.strip()
        if args.tolerance is not None:
            overrides["check.tolerance"] = repr(args.tolerance)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "report":
            return cmd_report(out, Path(args.run))
        preset = args.preset
        if preset is None and args.config is None:
            preset = _DEFAULT_PRESET[args.command]
        config = resolve_config(args.command, preset, args.config, overrides)
        if args.command == "kernel-verify":
            return cmd_kernel_verify(config, out)
        if args.command == "profile-verify":
            return cmd_profile_verify(config, out)
        if args.command == "simulate":
            return cmd_simulate(config, out)
        if args.command == "theorem-verify":
            return cmd_theorem_verify(config, out)
        raise ConfigurationError(f"unknown command {args.command}")
    except (
        ConfigurationError,
        DomainError,
        ResolutionError,
        InsufficientDataError,
        FileNotFoundError,
    ) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StabilityError, NumericalConsistencyError, AccuracyError, DivergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
