"""Continuous-time gradient descent ``dx/dt = A x - b`` and its diagnostics.

Each agent follows the gradient of its own utility. For zero-sum games the
distance to every equilibrium is conserved, the orbit stays in the affine
slice through the closest equilibrium, and the time average converges to
that equilibrium at rate ``O(1/t)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .equilibrium import (
    EquilibriumSet,
    NoEquilibrium,
    NoEquilibriumError,
    closest_equilibrium,
    equilibrium_set,
)
from .game import GameClass, PolymatrixGame, classify


class Method(str, enum.Enum):
    EXACT = "exact"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.EXACT
    step: float = 1e-3
    horizon: float = 1e3
    record_every: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.step > 0 and self.record_every > 0 and self.horizon > 0):
            raise ValueError("step, record_every and horizon must be positive")
        if self.record_every > self.horizon:
            raise ValueError("record_every must not exceed horizon")
        if self.method is Method.RK4:
            if self.step > self.record_every:
                raise ValueError("step must not exceed record_every")
            ratio = self.record_every / self.step
            if abs(ratio - round(ratio)) > 1e-9 * ratio:
                raise ValueError("record_every must be an integer multiple of step")

    @property
    def n_records(self) -> int:
        return int(math.floor(self.horizon / self.record_every + 1e-9))

    @property
    def substeps(self) -> int:
        return int(round(self.record_every / self.step))

    def to_dict(self) -> dict:
        return {"method": self.method.value, "step": self.step,
                "horizon": self.horizon, "record_every": self.record_every}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states, time averages and diagnostics of one run.

    ``averages`` come from the integrator itself: exact for the matrix
    exponential flow, the RK4 stage quadrature otherwise. ``energy[:, e]``
    is ``||x(t) - tracked[e]||^2``; ``hyperplane_drift[:, w]`` is
    ``d_w . (x(t) - x_star)``.
    """

    times: np.ndarray
    states: np.ndarray
    averages: np.ndarray
    method: Method
    x_star: Optional[np.ndarray]
    basis: np.ndarray
    tracked: np.ndarray
    energy: np.ndarray
    hyperplane_drift: np.ndarray
    residual: np.ndarray
    warnings: Tuple[str, ...] = field(default=())

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    def csv_rows(self):
        K = self.states.shape[1]
        header = (["t"] + [f"x_{k + 1}" for k in range(K)] + [f"xbar_{k + 1}" for k in range(K)]
                  + ["energy", "max_hyperplane_drift", "avg_residual"])
        energy = self.energy[:, 0] if self.energy.shape[1] else np.full(len(self.times), np.nan)
        if self.hyperplane_drift.shape[1]:
            drift = np.max(np.abs(self.hyperplane_drift), axis=1)
        else:
            drift = np.zeros(len(self.times)) if self.x_star is not None else np.full(len(self.times), np.nan)
        rows = (
            [t, *x, *xb, e, d, r]
            for t, x, xb, e, d, r in zip(self.times, self.states, self.averages,
                                         energy, drift, self.residual)
        )
        return header, rows


def _rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _augmented(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Generator of ``z = (x, int x, 1)``: ``x' = A x - b``, ``(int x)' = x``."""
    K = len(b)
    M = np.zeros((2 * K + 1, 2 * K + 1))
    M[:K, :K] = A
    M[:K, 2 * K] = -b
    M[K:2 * K, :K] = np.eye(K)
    return M


def _stability_warnings(game: PolymatrixGame, eqset) -> list:
    warnings = []
    if isinstance(eqset, NoEquilibrium):
        warnings.append("unbounded drift: no equilibrium exists; the part of b outside "
                        "the range of A grows linearly")
    A = game.matrix
    growth = float(np.max(np.linalg.eigvals(A).real))
    if growth > 1e-9 * max(1.0, float(np.max(np.abs(A)))):
        warnings.append(f"exponential divergence: A has an eigenvalue with real part {growth:.6g}")
    return warnings


def simulate(game: PolymatrixGame, x0, config: Optional[IntegratorConfig] = None,
             track: Optional[Sequence] = None) -> Trajectory:
    """Integrate gradient play from ``x0``.

    ``exact`` propagates ``x(t) = x* + e^{At}(x0 - x*)`` with one exponential
    per recording interval (it needs an equilibrium); ``rk4`` uses fixed
    steps and also runs on games without equilibria. ``track`` lists the
    equilibria whose squared distance is recorded; it defaults to the one
    closest to ``x0``.
    """
    config = config or IntegratorConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (game.K,):
        raise ValueError(f"x0 must have length {game.K}, got shape {x0.shape}")
    A, b, K = game.matrix, game.costs, game.K
    eqset = equilibrium_set(game)
    if isinstance(eqset, NoEquilibrium) and config.method is Method.EXACT:
        raise NoEquilibriumError("unbounded drift: no equilibrium exists")

    n = config.n_records
    h = config.record_every
    times = np.arange(n + 1) * h
    states = np.empty((n + 1, K))
    integrals = np.empty((n + 1, K))

    with np.errstate(over="ignore", invalid="ignore"):
        if config.method is Method.EXACT:
            x_star = closest_equilibrium(eqset, x0)
            flow = expm(A * h)
            gen = np.zeros((2 * K, 2 * K))
            gen[:K, :K] = A
            gen[:K, K:] = np.eye(K)
            # top-right block of exp([[A, I], [0, 0]] h) is int_0^h e^{As} ds
            flow_integral = expm(gen * h)[:K, K:]
            dev = x0 - x_star
            acc = np.zeros(K)
            for k in range(n + 1):
                states[k] = x_star + dev
                integrals[k] = acc
                acc = acc + flow_integral @ dev
                dev = flow @ dev
            centre = x_star
        else:
            M = _augmented(A, b)
            one_step = _rk4_step(lambda Z: M @ Z, np.eye(2 * K + 1), config.step)
            propagator = np.linalg.matrix_power(one_step, config.substeps)
            z = np.concatenate([x0, np.zeros(K), [1.0]])
            for k in range(n + 1):
                states[k] = z[:K]
                integrals[k] = z[K:2 * K]
                z = propagator @ z
            centre = np.zeros(K)

        states[0] = x0
        averages = np.empty_like(states)
        averages[0] = x0
        averages[1:] = centre + integrals[1:] / times[1:, None]
        residual = np.linalg.norm(averages @ A.T - b, axis=1)

        if isinstance(eqset, EquilibriumSet):
            if config.method is Method.RK4:
                x_star = closest_equilibrium(eqset, x0)
            tracked = np.atleast_2d(np.asarray(track, dtype=float)) if track is not None else x_star[None, :]
            if tracked.shape[1] != K:
                raise ValueError("tracked equilibria must have length K")
            energy = np.stack([np.sum((states - p) ** 2, axis=1) for p in tracked], axis=1)
            drift = (states - x_star) @ eqset.basis.T
            basis = eqset.basis
        else:
            x_star = None
            tracked = np.zeros((0, K))
            energy = np.zeros((n + 1, 0))
            drift = np.zeros((n + 1, 0))
            basis = np.zeros((0, K))

    return Trajectory(times, states, averages, config.method, x_star, basis, tracked,
                      energy, drift, residual, tuple(_stability_warnings(game, eqset)))


def time_average(traj: Trajectory) -> np.ndarray:
    """Running averages by the trapezoidal rule on the recorded grid.

    Independent of the integrator's own averages, which it matches to
    second order in the recording interval.
    """
    t, x = traj.times, traj.states
    if len(t) == 0:
        raise ValueError("empty trajectory")
    out = np.empty_like(x)
    out[0] = x[0]
    if len(t) > 1:
        pieces = 0.5 * (x[1:] + x[:-1]) * np.diff(t)[:, None]
        out[1:] = np.cumsum(pieces, axis=0) / t[1:, None]
    return out


def residual_identity_check(game: PolymatrixGame, traj: Trajectory) -> float:
    """Largest violation of ``A xbar(t) - b = (x(t) - x(0)) / t`` over recorded ``t > 0``."""
    t = traj.times[1:]
    if len(t) == 0:
        return 0.0
    lhs = traj.averages[1:] @ game.matrix.T - game.costs
    rhs = (traj.states[1:] - traj.states[0]) / t[:, None]
    return float(np.max(np.linalg.norm(lhs - rhs, axis=1)))


def energy_series(traj: Trajectory, xstar) -> np.ndarray:
    """``||x(t_k) - xstar||^2`` along the trajectory."""
    xstar = np.asarray(xstar, dtype=float)
    return np.sum((traj.states - xstar) ** 2, axis=1)


def envelope_points(times: np.ndarray, values: np.ndarray,
                    t_min: float, t_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """Points where ``values`` attains its maximum over the remaining window.

    For an oscillating decay these are the successive dominant peaks, which
    trace the upper envelope.
    """
    mask = (times >= t_min) & (times <= t_max)
    t, v = times[mask], values[mask]
    keep = np.zeros(len(v), dtype=bool)
    best = -np.inf
    for k in range(len(v) - 1, -1, -1):
        if v[k] > best:
            best = v[k]
            keep[k] = True
    return t[keep], v[keep]


def loglog_slope(times: np.ndarray, values: np.ndarray,
                 t_min: float = 10.0, t_max: float = 1000.0) -> Optional[float]:
    """Least-squares slope of ``log value`` against ``log t`` on the upper envelope."""
    t, v = envelope_points(times, values, t_min, t_max)
    ok = v > 0
    t, v = t[ok], v[ok]
    if len(t) < 2 or np.ptp(np.log(t)) == 0:
        return None
    slope, _ = np.polyfit(np.log(t), np.log(v), 1)
    return float(slope)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    x_star: np.ndarray
    times: np.ndarray
    distances: np.ndarray
    slope: Optional[float]
    window: Tuple[float, float]
    max_hyperplane_drift: float
    max_energy_drift: float
    max_relative_energy_drift: float
    residual_identity_error: float

    @property
    def final_distance(self) -> float:
        return float(self.distances[-1])

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star,
            "final_time": float(self.times[-1]),
            "final_distance": self.final_distance,
            "loglog_slope": self.slope,
            "slope_window": list(self.window),
            "max_hyperplane_drift": self.max_hyperplane_drift,
            "max_energy_drift": self.max_energy_drift,
            "max_relative_energy_drift": self.max_relative_energy_drift,
            "residual_identity_error": self.residual_identity_error,
        }

    def summary(self) -> str:
        slope = "n/a" if self.slope is None else f"{self.slope:.4f}"
        return (f"final |xbar - x*| = {self.final_distance:.6g}  loglog slope = {slope}  "
                f"max energy drift = {self.max_energy_drift:.6g}  "
                f"max hyperplane drift = {self.max_hyperplane_drift:.6g}")


def convergence_report(game: PolymatrixGame, traj: Trajectory,
                       window: Tuple[float, float] = (10.0, 1000.0)) -> ConvergenceReport:
    """Distance of the time average to the equilibrium closest to ``x(0)``.

    Only meaningful for zero-sum games; other classes are rejected.
    """
    if classify(game.matrix, game.partition) is not GameClass.ZERO_SUM:
        raise ValueError("convergence_report needs a zero-sum game")
    eqset = equilibrium_set(game)
    if isinstance(eqset, NoEquilibrium):
        raise NoEquilibriumError("no equilibrium exists")
    x_star = closest_equilibrium(eqset, traj.x0)
    distances = np.linalg.norm(traj.averages - x_star, axis=1)
    drift = np.abs((traj.states - x_star) @ eqset.basis.T)
    energy = energy_series(traj, x_star)
    energy_drift = float(np.max(np.abs(energy - energy[0])))
    rel = energy_drift / energy[0] if energy[0] > 0 else energy_drift
    return ConvergenceReport(
        x_star=x_star,
        times=traj.times,
        distances=distances,
        slope=loglog_slope(traj.times, distances, *window),
        window=tuple(window),
        max_hyperplane_drift=float(drift.max(initial=0.0)),
        max_energy_drift=energy_drift,
        max_relative_energy_drift=float(rel),
        residual_identity_error=residual_identity_check(game, traj),
    )
