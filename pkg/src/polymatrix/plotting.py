"""SVG figures for simulated trajectories.

Figures are written with a fixed hash salt and no date stamp so that the
same trajectory always produces the same bytes.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import ConvergenceReport, Trajectory  # noqa: E402

STYLE = {
    "svg.hashsalt": "polymatrix",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
}


def _figure(width: float = 6.0, height: Optional[float] = None):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, height or width * golden_ratio))


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def default_pairs(K: int, limit: int = 3) -> List[Tuple[int, int]]:
    return [(k, k + 1) for k in range(min(K - 1, limit))]


def plot_projection(traj: Trajectory, i: int, j: int, path: Path) -> Path:
    """Orbit and time average projected onto coordinates ``(i, j)``."""
    with plt.rc_context(STYLE):
        fig, ax = _figure(4.5, 4.5)
        ax.plot(traj.states[:, i], traj.states[:, j], color="0.6", label="x(t)")
        ax.plot(traj.averages[:, i], traj.averages[:, j], color="C0", label="time average")
        ax.plot(*traj.states[0, [i, j]], "ko", label="x(0)")
        if traj.x_star is not None:
            ax.plot(*traj.x_star[[i, j]], "r*", markersize=10, label="closest equilibrium")
        ax.set_xlabel(f"x_{i + 1}")
        ax.set_ylabel(f"x_{j + 1}")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best", fontsize=8)
        return _save(fig, path)


def plot_energy(traj: Trajectory, path: Path) -> Path:
    """Squared distance to each tracked equilibrium, plus hyperplane drift."""
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 5.0), sharex=True)
        for e in range(traj.energy.shape[1]):
            top.plot(traj.times, traj.energy[:, e], label=f"equilibrium {e}")
        top.set_ylabel("||x(t) - x*||^2")
        if traj.energy.shape[1]:
            top.legend(loc="best", fontsize=8)
        for w in range(traj.hyperplane_drift.shape[1]):
            bottom.plot(traj.times, traj.hyperplane_drift[:, w], label=f"d_{w + 1}")
        bottom.set_ylabel("d . (x(t) - x*)")
        bottom.set_xlabel("t")
        return _save(fig, path)


def plot_convergence(traj: Trajectory, report: Optional[ConvergenceReport], path: Path) -> Path:
    """Log-log decay of the time-average residual and distance."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        t = traj.times[1:]
        ax.loglog(t, np.maximum(traj.residual[1:], 1e-300), color="C1", label="||A xbar - b||")
        if report is not None:
            ax.loglog(t, np.maximum(report.distances[1:], 1e-300), color="C0",
                      label="||xbar - x*||")
            scale = report.distances[1] * t[0] if report.distances[1] > 0 else 1.0
            ax.loglog(t, scale / t, "k--", linewidth=0.8, label="1/t")
        ax.set_xlabel("t")
        ax.legend(loc="best", fontsize=8)
        return _save(fig, path)


def render_trajectory(traj: Trajectory, report: Optional[ConvergenceReport], prefix: Path,
                      pairs: Optional[Sequence[Tuple[int, int]]] = None) -> List[Path]:
    """All trajectory figures, named ``<prefix>_*.svg``."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    K = traj.states.shape[1]
    out = []
    for i, j in pairs or default_pairs(K):
        out.append(plot_projection(traj, i, j, Path(f"{prefix}_proj_{i + 1}_{j + 1}.svg")))
    out.append(plot_energy(traj, Path(f"{prefix}_energy.svg")))
    out.append(plot_convergence(traj, report, Path(f"{prefix}_residual.svg")))
    return out
