"""Report figures rendered next to the CSV outputs.

Each builder returns a matplotlib Figure; save_figure writes it as a PNG.
The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_figure(fig, path, dpi=150):
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)


def scan_figure(result):
    """Digit accuracy versus the grid value, with the chaos threshold."""
    spec = result.spec
    values = [r.grid_value for r in result.records if r.status == "ok"]
    digs = [r.maxdig for r in result.records if r.status == "ok"]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(values, digs, ".", ms=3, color="tab:blue")
    ax.axhline(spec.threshold, color="tab:red", lw=1, ls="--",
               label=f"threshold {spec.threshold:g}")
    ax.set_xlabel(spec.axis)
    ax.set_ylabel("digit accuracy")
    ax.set_title(f"{spec.system}: digit accuracy at T={spec.T:g}")
    ax.legend(loc="best", fontsize=8)
    return fig


def rotation_figure(profile, axis_name, system_name):
    values = [v for v, _ in profile]
    rho = [r for _, r in profile]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(values, rho, ".", ms=3, color="tab:blue")
    ax.set_xlabel(axis_name)
    ax.set_ylabel("rotation number")
    ax.set_title(f"{system_name}: rotation number profile")
    return fig


def poincare_figure(sections, system, coord_pair=None):
    """Scatter of section points; sections is a list of (orbit, points)."""
    if coord_pair is None:
        names = [c for i, c in enumerate(system.coords) if i != system.clock]
        idx = [i for i in range(len(system.coords)) if i != system.clock]
        coord_pair = (idx[0], idx[1])
    else:
        names = [system.coords[coord_pair[0]], system.coords[coord_pair[1]]]
    i, j = coord_pair
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    for _, points in sections:
        ax.plot(points[:, i], points[:, j], ",", color="black", alpha=0.7)
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    ax.set_title(f"{system.name}: section at integer {system.coords[system.clock]}")
    return fig


def fraction_figure(curve, parameter):
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot([p.parameter for p in curve], [p.fraction for p in curve],
            "+-", color="tab:blue", lw=0.8)
    ax.set_xlabel(parameter)
    ax.set_ylabel("chaotic fraction")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("fraction of chaotic initial conditions")
    return fig


def widths_figure(sweep, T):
    ws = [w for w, _ in sweep]
    digs = [acc.maxdig for _, acc in sweep]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(ws, digs, "o-", ms=3, lw=0.8, color="tab:blue")
    ax.set_xscale("log")
    ax.set_xlabel("bump width w")
    ax.set_ylabel("digit accuracy")
    ax.set_title(f"digit accuracy vs weight width at T={T:g}")
    return fig


def dig_vs_T_figure(curve, label=""):
    Ts = [T for T, _ in curve]
    digs = [acc.maxdig for _, acc in curve]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(Ts, digs, "o-", ms=3, lw=0.8, color="tab:blue", label=label or None)
    ax.set_xlabel("T")
    ax.set_ylabel("digit accuracy")
    ax.set_title("digit accuracy vs averaging time")
    if label:
        ax.legend(loc="best", fontsize=8)
    return fig


def eps_critical_figure(points, psi_target):
    eps = [p.epsilon for p in points]
    mp = [p.max_psi for p in points]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(eps, mp, "o-", ms=3, lw=0.8, color="tab:blue")
    ax.axhline(psi_target, color="tab:red", lw=1, ls="--",
               label=f"target {psi_target:g}")
    crossed = [p.epsilon for p in points if p.crossed]
    if crossed:
        ax.axvline(crossed[0], color="tab:green", lw=1, ls=":",
                   label=f"first crossing {crossed[0]:g}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("max psi reached")
    ax.legend(loc="best", fontsize=8)
    return fig
