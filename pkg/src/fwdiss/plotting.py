"""Figure rendering for the report path.

Every figure is written straight to a file next to the delimited output;
nothing interactive.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import RegimeReport
from .core import Field
from .profiles import ProfileSpec, theorem_profile_field
from .kernel import g0_deriv_field


def _qlabel(q: float) -> str:
    return "inf" if q == math.inf else f"{q:g}"


def save_decay_figure(path, diagnostics: dict[str, np.ndarray], fits=None) -> None:
    t = diagnostics["t"]
    sel = t > 0
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(t[sel], diagnostics["linf"][sel], label=r"$\|u\|_\infty$")
    ax.loglog(t[sel], diagnostics["l2"][sel], label=r"$\|u\|_2$")
    if fits:
        for fit, style in zip(fits, ("--", ":")):
            tt = np.geomspace(max(fit.window[0], t[sel][0]), fit.window[1], 50)
            ax.loglog(
                tt,
                np.exp(fit.intercept) * tt**fit.slope,
                style,
                color="k",
                label=f"slope {fit.slope:+.3f}",
            )
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_residual_figure(path, report: RegimeReport) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for q in report.q_list:
        s = report.series[q]
        ax1.semilogx(s["t"], s["residual_scaled"], marker=".", label=f"q={_qlabel(q)}")
        ax2.semilogx(s["t"], s["corollary_scaled"], marker=".", label=f"q={_qlabel(q)}")
        v = report.verdicts[q]
        if v.corollary_predicted > 0:
            ax2.axhline(v.corollary_predicted, color="k", lw=0.8, ls="--")
    ax1.set_xlabel("t")
    ax1.set_ylabel("scaled theorem residual")
    ax2.set_xlabel("t")
    ax2.set_ylabel("scaled distance to M G0")
    ax1.legend(frameon=False)
    ax2.legend(frameon=False)
    fig.suptitle(f"{report.regime} regime (p={report.params.p:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_profile_figure(path, t: float, u: Field, spec: ProfileSpec) -> None:
    grid = u.grid
    lead = spec.M * g0_deriv_field(grid, t, spec.params, 0).values
    prof = theorem_profile_field(grid, t, spec).values
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.5, 6.0), sharex=True)
    ax1.plot(grid.x, u.values, label="u")
    ax1.plot(grid.x, lead, "--", label="M G0")
    ax1.plot(grid.x, prof, ":", label="profile")
    ax1.legend(frameon=False)
    ax1.set_ylabel(f"u(x, t={t:g})")
    ax2.plot(grid.x, u.values - lead, label="u - M G0")
    ax2.plot(grid.x, u.values - prof, label="u - profile")
    ax2.legend(frameon=False)
    ax2.set_xlabel("x" if grid.frame == "lab" else "x - (2B/b) t")
    width = 12.0 * math.sqrt(2.0 * spec.params.mu * t)
    ax1.set_xlim(-width, width)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_kernel_gap_figure(path, rows: list[dict]) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    keys = sorted({(r["order"], r["l"], r["q"]) for r in rows})
    for order, l, q in keys:
        pts = [(r["t"], r["gap"]) for r in rows if (r["order"], r["l"], r["q"]) == (order, l, q)]
        pts.sort()
        t = np.array([p[0] for p in pts])
        g = np.array([p[1] for p in pts])
        ax.loglog(t, g, marker=".", label=f"order {order}, l={l}, q={_qlabel(q)}")
    ax.set_xlabel("t")
    ax.set_ylabel("kernel gap")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
