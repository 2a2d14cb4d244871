"""Figure rendering for the report path.

Each CLI command that writes a CSV can also render a PNG next to it.
The figures mirror the delimited output: trajectories of the
shallow-well probability, sweep summaries, method comparisons, and the
well-with-eigenstates picture.  The CSV remains the machine contract;
these are for eyes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .potential import evaluate


def _save(fig, path: str):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectory(traj, path: str, title: str = ""):
    has_occ = traj.occupations is not None
    fig, axes = plt.subplots(
        2 if has_occ else 1, 1, figsize=(7, 6 if has_occ else 3.6), sharex=True
    )
    ax = axes[0] if has_occ else axes
    ax.plot(traj.times, traj.p_shallow, lw=1.2)
    ax.set_ylabel("shallow-well probability")
    if title:
        ax.set_title(title)
    if has_occ:
        ax2 = axes[1]
        n_show = min(4, traj.occupations.shape[1])
        for i in range(n_show):
            ax2.plot(traj.times, traj.occupations[:, i], lw=1.0, label=f"state {i + 1}")
        ax2.set_ylabel("occupation")
        ax2.legend(loc="best", fontsize=8)
        ax2.set_xlabel("t (ps)")
    else:
        ax.set_xlabel("t (ps)")
    _save(fig, path)


def plot_compare(times, p_grid, p_eigen, path: str, title: str = ""):
    fig, (ax, axd) = plt.subplots(2, 1, figsize=(7, 6), sharex=True,
                                  height_ratios=[3, 1])
    ax.plot(times, p_grid, lw=1.2, label="pointer basis")
    ax.plot(times, p_eigen, lw=1.2, ls="--", label="eigenbasis")
    ax.set_ylabel("shallow-well probability")
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    axd.semilogy(times, np.abs(np.asarray(p_grid) - np.asarray(p_eigen)) + 1e-18, lw=0.9)
    axd.set_ylabel("|difference|")
    axd.set_xlabel("t (ps)")
    _save(fig, path)


def plot_sweep(rows, axis: str, path: str, title: str = ""):
    snapshots = sorted({r[1] for r in rows})
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for snap in snapshots:
        pts = sorted((r[0], r[2]) for r in rows if r[1] == snap)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", lw=1.1,
                label=f"{snap:g} ps")
    if axis == "frequency":
        ax.set_xscale("log")
        ax.set_xlabel("measurement frequency (1/ps)")
    else:
        ax.set_xlabel("bath temperature (K)")
    ax.set_ylabel("shallow-well probability")
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_eigens(basis, params, path: str, n_show: int | None = None):
    """The double well with eigenfunctions drawn at their energies."""
    z = basis.grid.points
    v = evaluate(z, params)
    n_show = basis.n_basis if n_show is None else min(n_show, basis.n_basis)
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.plot(z, v, "k-", lw=1.4)
    span = basis.energies[n_show - 1] - basis.energies[0]
    amp = 0.08 * max(span, 1.0)
    for i in range(n_show):
        e = basis.energies[i]
        ax.axhline(e, color="0.8", lw=0.6, zorder=0)
        ax.plot(z, e + amp * basis.states[:, i] / np.max(np.abs(basis.states[:, i])),
                lw=0.9, label=f"E{i + 1} = {e:.1f}")
    ax.set_xlabel("zeta")
    ax.set_ylabel("energy (cm$^{-1}$)")
    ax.set_ylim(min(v.min(), basis.energies[0]) - 0.1 * span,
                basis.energies[n_show - 1] + 0.35 * span)
    ax.legend(loc="upper center", fontsize=7, ncol=2)
    _save(fig, path)
