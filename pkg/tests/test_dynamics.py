import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from polymatrix import (
    IntegratorConfig,
    NoEquilibriumError,
    PolymatrixGame,
    closest_equilibrium,
    convergence_report,
    energy_series,
    equilibrium_set,
    residual_identity_check,
    simulate,
    time_average,
)
from polymatrix.dynamics import Trajectory, loglog_slope
from polymatrix.sampling import SamplerConfig, sample_game

from conftest import rotation, three_agent

SHORT = IntegratorConfig(horizon=50.0, record_every=0.1)


def test_rotation_closed_form():
    cfg = IntegratorConfig(horizon=2 * math.pi, record_every=2 * math.pi / 1000)
    traj = simulate(rotation(), [1.0, 0.0], cfg)
    t = traj.times
    assert np.allclose(traj.states, np.c_[np.cos(t), -np.sin(t)], atol=1e-12)
    assert np.linalg.norm(traj.states[-1] - [1.0, 0.0]) <= 1e-9
    # exact averages: (sin t / t, (cos t - 1) / t)
    avg = np.c_[np.sin(t[1:]) / t[1:], (np.cos(t[1:]) - 1) / t[1:]]
    assert np.allclose(traj.averages[1:], avg, atol=1e-12)


def test_fixed_point_stays_put():
    game = three_agent(costs=[1.0, 0.0, -1.0])
    x0 = equilibrium_set(game).point([0.4])
    for method in ("exact", "rk4"):
        traj = simulate(game, x0, IntegratorConfig(method, horizon=5.0))
        assert np.abs(traj.states - x0).max() <= 1e-12
        assert residual_identity_check(game, traj) <= 1e-12
        assert np.abs(energy_series(traj, x0)).max() <= 1e-24


def test_three_agent_hyperplane_against_rk4():
    game = three_agent()
    traj = simulate(game, [1.0, 0.0, 0.0], IntegratorConfig("rk4", horizon=20.0))
    d = np.array([1.0, -1.0, 1.0]) / math.sqrt(3)
    assert np.abs(traj.states @ d - 1 / math.sqrt(3)).max() <= 1e-9


def test_rk4_matches_independent_ode_solver():
    game = three_agent(0.7, -1.2, 0.4, costs=[0.2, 0.1, 0.3])
    game = game.with_costs(game.matrix @ [0.5, -0.3, 1.0])
    cfg = IntegratorConfig("rk4", step=1e-3, horizon=10.0, record_every=0.5)
    traj = simulate(game, [1.0, 2.0, -1.0], cfg)
    A, b = game.matrix, game.costs
    ref = solve_ivp(lambda t, x: A @ x - b, (0, 10.0), [1.0, 2.0, -1.0], t_eval=traj.times,
                    rtol=1e-12, atol=1e-12, method="DOP853")
    assert np.abs(ref.y.T - traj.states).max() <= 1e-9


def test_rk4_agrees_with_exact_flow(rng):
    for K in (2, 5, 10):
        dims = (K // 2, K - K // 2)
        A = rng.uniform(-2, 2, size=(K, K))
        A = A - A.T
        for i, s in enumerate((slice(0, dims[0]), slice(dims[0], K))):
            A[s, s] = 0.0
        game = PolymatrixGame.from_matrix(A, dims, "zero-sum")
        x0 = rng.normal(size=K)
        exact = simulate(game, x0, IntegratorConfig("exact", horizon=100.0))
        rk4 = simulate(game, x0, IntegratorConfig("rk4", step=1e-3, horizon=100.0))
        assert np.abs(exact.states - rk4.states).max() <= 1e-6


def test_time_average_constant():
    game = rotation()
    traj = simulate(game, [0.0, 0.0], IntegratorConfig(horizon=3.0))
    assert np.array_equal(time_average(traj), np.zeros_like(traj.states))


def test_time_average_rotation_bound():
    traj = simulate(rotation(), [1.0, 0.0], IntegratorConfig(horizon=200.0))
    t = traj.times[1:]
    norms = np.linalg.norm(traj.averages[1:], axis=1)
    assert np.all(norms <= 2 / t + 1e-12)
    # trapezoid recomputation agrees to second order in the grid spacing
    h = traj.times[1]
    assert np.abs(time_average(traj) - traj.averages).max() <= h**2


def test_three_agent_average_converges_to_closest():
    game = three_agent()
    traj = simulate(game, [1.0, 0.0, 0.0])
    target = np.array([1 / 3, -1 / 3, 1 / 3])
    err = np.linalg.norm(traj.averages[-1] - target)
    R = math.sqrt(2 / 3)
    assert err <= 2 * R / 1000 + 1e-9


def test_residual_identity():
    traj = simulate(rotation(), [1.0, 0.0], IntegratorConfig(horizon=100.0, record_every=0.01))
    assert residual_identity_check(rotation(), traj) <= 1e-6
    game = sample_game(SamplerConfig("zero-sum", (2, 2, 2), seed=12, samples=1), 0)
    traj = simulate(game, np.ones(6), IntegratorConfig("rk4", step=1e-3, horizon=20.0))
    assert residual_identity_check(game, traj) <= 1e-6


def test_energy_series_examples():
    traj = simulate(rotation(), [1.0, 0.0], SHORT)
    assert np.allclose(energy_series(traj, [0.0, 0.0]), 1.0, atol=1e-12)
    game = three_agent()
    traj = simulate(game, [1.0, 0.0, 0.0], SHORT)
    assert np.allclose(energy_series(traj, [1 / 3, -1 / 3, 1 / 3]), 2 / 3, atol=1e-12)
    assert np.allclose(traj.energy[:, 0], 2 / 3, atol=1e-12)


def test_energy_conserved_for_every_equilibrium(rng):
    game = sample_game(SamplerConfig("zero-sum", (2, 2, 1), seed=3, samples=1), 0)
    eqset = equilibrium_set(game)
    points = [eqset.point(rng.uniform(-5, 5, size=eqset.W)) for _ in range(5)]
    traj = simulate(game, rng.normal(size=5), IntegratorConfig(horizon=200.0), track=points)
    assert traj.energy.shape == (len(traj.times), 5)
    drift = np.abs(traj.energy - traj.energy[0]) / traj.energy[0]
    assert drift.max() <= 1e-9


def test_convergence_report_rotation():
    traj = simulate(rotation(), [1.0, 0.0])
    rep = convergence_report(rotation(), traj)
    assert -1.1 <= rep.slope <= -0.9
    assert rep.final_distance <= 0.003
    assert rep.max_hyperplane_drift == 0.0


def test_convergence_report_three_agent():
    game = three_agent()
    traj = simulate(game, [1.0, 0.0, 0.0])
    rep = convergence_report(game, traj)
    assert np.allclose(rep.x_star, [1 / 3, -1 / 3, 1 / 3], atol=1e-15)
    assert rep.final_distance <= 2 * math.sqrt(2 / 3) / 1000 + 1e-9
    assert rep.max_hyperplane_drift <= 1e-12
    assert rep.max_relative_energy_drift <= 1e-9


def test_convergence_report_at_equilibrium():
    game = three_agent()
    x0 = np.array([2.0, -2.0, 2.0])
    rep = convergence_report(game, simulate(game, x0, SHORT))
    assert rep.final_distance <= 1e-14
    assert rep.max_hyperplane_drift <= 1e-14
    assert rep.max_energy_drift <= 1e-28
    assert rep.slope is None or rep.final_distance <= 1e-14


def test_convergence_report_rejects_coordination():
    game = PolymatrixGame((1, 1), {(0, 1): [[1.0]]}, None, "coordination")
    traj = simulate(game, [1.0, 0.0], IntegratorConfig(horizon=1.0))
    with pytest.raises(ValueError, match="zero-sum"):
        convergence_report(game, traj)
    assert any("exponential divergence" in w for w in traj.warnings)


def test_exact_flow_requires_equilibrium():
    game = three_agent(costs=[1.0, 0.0, 0.0])
    with pytest.raises(NoEquilibriumError, match="unbounded drift"):
        simulate(game, np.zeros(3), SHORT)


def test_rk4_without_equilibrium_drifts_linearly():
    game = three_agent(costs=[1.0, 0.0, 0.0])
    traj = simulate(game, np.zeros(3), IntegratorConfig("rk4", horizon=10.0, record_every=0.5))
    assert any("no equilibrium" in w for w in traj.warnings)
    assert traj.x_star is None and traj.energy.shape[1] == 0
    # the component of -b along the nullspace d grows at rate -b.d
    d = np.array([1.0, -1.0, 1.0]) / math.sqrt(3)
    assert np.allclose(traj.states @ d, -traj.times / math.sqrt(3), atol=1e-9)


def test_closest_equilibrium_depends_only_on_nullspace_component(rng):
    game = sample_game(SamplerConfig("zero-sum", (2, 2, 1), seed=21, samples=1), 0)
    eqset = equilibrium_set(game)
    x0 = rng.normal(size=5) * 2
    xs = closest_equilibrium(eqset, x0)
    # rotate x0 - xs within the orthogonal complement of the nullspace
    Q, _ = np.linalg.qr(np.c_[eqset.basis.T, rng.normal(size=(5, 5 - eqset.W))])
    comp = Q[:, eqset.W:]
    angle = rng.uniform(0, 2 * np.pi)
    c = comp.T @ (x0 - xs)
    G = np.eye(len(c))
    G[:2, :2] = [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
    x0_rot = xs + comp @ (G @ c)
    assert np.linalg.norm(x0_rot - x0) > 1e-3
    cfg = IntegratorConfig(horizon=100.0)
    a = convergence_report(game, simulate(game, x0, cfg))
    b = convergence_report(game, simulate(game, x0_rot, cfg))
    assert np.allclose(a.x_star, b.x_star, atol=1e-12)
    assert np.linalg.norm(b.x_star - xs) <= 1e-12


def test_loglog_slope_of_known_power():
    t = np.linspace(0, 1000, 10001)
    with np.errstate(divide="ignore"):
        v = 3.0 / t**2
    assert loglog_slope(t, v) == pytest.approx(-2.0, abs=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig("rk4", step=0.3, record_every=0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(record_every=10.0, horizon=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig("rk4", step=0.03, record_every=0.1)


def test_csv_rows_layout():
    traj = simulate(three_agent(), [1.0, 0.0, 0.0], IntegratorConfig(horizon=1.0))
    header, rows = traj.csv_rows()
    assert header == ["t", "x_1", "x_2", "x_3", "xbar_1", "xbar_2", "xbar_3",
                      "energy", "max_hyperplane_drift", "avg_residual"]
    rows = list(rows)
    assert len(rows) == len(traj.times) and all(len(r) == 10 for r in rows)
    assert isinstance(traj, Trajectory)
