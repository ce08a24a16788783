"""Matplotlib figure rendering for the report paths (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import os

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import Trajectory


def _save(fig, path: str) -> None:
    """Atomic figure write: render to a temp sibling, then rename."""
    fmt = os.path.splitext(path)[1].lstrip(".") or "png"
    tmp = path + ".tmp"
    fig.savefig(tmp, dpi=150, format=fmt)
    os.replace(tmp, path)
    plt.close(fig)


def _thin(times: np.ndarray, max_points: int = 4000) -> np.ndarray:
    stride = max(1, len(times) // max_points)
    idx = np.arange(0, len(times), stride)
    if idx[-1] != len(times) - 1:
        idx = np.append(idx, len(times) - 1)
    return idx


def trajectory_figure(traj: Trajectory, path: str, title: str = "") -> None:
    """Per-agent state lines over time; second-order runs get a velocity panel."""
    idx = _thin(traj.times)
    t = traj.times[idx]
    panels = 2 if traj.velocities is not None else 1
    fig, axes = plt.subplots(panels, 1, figsize=(8, 3.2 * panels), sharex=True, squeeze=False)
    ax = axes[0][0]
    for i in range(traj.n_agents):
        ax.plot(t, traj.states[idx, i, 0], lw=1.0, label=f"agent {i + 1}")
    ax.set_ylabel("position" if traj.dim == 1 else "position (1st coord)")
    if traj.n_agents <= 10:
        ax.legend(fontsize=7, ncol=2)
    if traj.velocities is not None:
        axv = axes[1][0]
        for i in range(traj.n_agents):
            axv.plot(t, traj.velocities[idx, i, 0], lw=1.0)
        axv.set_ylabel("velocity")
        axv.set_xlabel("t")
    else:
        ax.set_xlabel("t")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def diameter_figure(traj: Trajectory, path: str, envelope=None, title: str = "") -> None:
    """Diameter series on a log axis, optionally with the certified envelope."""
    idx = _thin(traj.times)
    t = traj.times[idx]
    fig, ax = plt.subplots(figsize=(8, 4))
    dx = traj.position_diameters()[idx]
    ax.semilogy(t, np.maximum(dx, 1e-300), label="position diameter")
    if traj.velocities is not None:
        dv = traj.velocity_diameters()[idx]
        ax.semilogy(t, np.maximum(dv, 1e-300), label="velocity diameter")
    if envelope is not None:
        env_t, env_v = envelope
        ax.semilogy(env_t, np.maximum(env_v, 1e-300), "k--", lw=1.0, label="certified bound")
    ax.set_xlabel("t")
    ax.set_ylabel("diameter")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def table1_figure(rows, path: str) -> None:
    """Reference-table comparison: measured contraction vs certified bound."""
    ns = [r.n_agents for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(ns, [r.one_minus_diameter for r in rows], "o-", label="1 - D(d*T) computed")
    ax.semilogy(ns, [r.reference_one_minus_diameter for r in rows], "s--", label="1 - D(d*T) reference")
    ax.semilogy(ns, [r.one_minus_C for r in rows], "o-", label="1 - C computed")
    ax.semilogy(ns, [r.reference_one_minus_C for r in rows], "s--", label="1 - C reference")
    ax.set_xlabel("N")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
