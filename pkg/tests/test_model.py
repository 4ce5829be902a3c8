import numpy as np
import pytest
from scipy.integrate import solve_ivp

from secalloc.graph import Graph, generate_erdos_renyi, laplacian, path_graph
from secalloc.model import (
    SimulationDivergedError,
    SwingParams,
    SystemModel,
    build_consensus_model,
    build_swing_model,
    load_ieee14,
    simulate,
    vertex_set,
)


def test_consensus_structure():
    g = generate_erdos_renyi(6, 0.6, 1)
    m = build_consensus_model(g, [2, 5], [1])
    assert np.array_equal(m.a_mat, -laplacian(g))
    assert m.b_cols[:, 0].tolist() == [0, 1, 0, 0, 0, 0]
    assert m.b_cols[:, 1].tolist() == [0, 0, 0, 0, 1, 0]
    assert np.array_equal(m.perf_rows, np.eye(6))
    assert m.monitor_rows.tolist() == [[1, 0, 0, 0, 0, 0]]


def test_vertex_set_validation():
    assert vertex_set([3, 1], 4) == (1, 3)
    with pytest.raises(ValueError, match="duplicate"):
        vertex_set([1, 1], 4)
    with pytest.raises(ValueError, match="outside"):
        vertex_set([0], 4)
    with pytest.raises(ValueError, match="expected 2"):
        vertex_set([1], 4, size=2)


def test_consensus_needs_connected_graph():
    with pytest.raises(ValueError):
        build_consensus_model(Graph(3, ((1, 2, 1.0),)), [1], [2])


def test_ieee14_asset():
    p = load_ieee14()
    assert p.n == 14 and len(p.susceptance_edges) == 20
    assert p.damping[0] == 0.0
    assert laplacian(p.graph)[3, 3] == pytest.approx(161.6664)


def test_swing_structure():
    p = load_ieee14()
    m = build_swing_model(p, [3], [2])
    n = 14
    assert m.state_dim == 28
    assert np.array_equal(m.a_mat[:n, n:], np.eye(n))
    assert np.allclose(m.a_mat[n:, :n], -laplacian(p.graph) / p.inertia[:, None])
    assert np.allclose(np.diag(m.a_mat[n:, n:]), -p.damping / p.inertia)
    assert np.flatnonzero(m.b_cols[:, 0]).tolist() == [n + 2]
    assert m.b_cols[n + 2, 0] == pytest.approx(1 / p.inertia[2])
    assert np.array_equal(m.perf_rows, np.eye(2 * n)[:n])
    assert np.flatnonzero(m.monitor_rows[0]).tolist() == [1]
    # the only marginal mode is the common angle shift
    ev = np.linalg.eigvals(m.a_mat)
    assert np.sum(np.abs(ev) < 1e-9) == 1
    assert ev.real.max() < 1e-9


def test_swing_params_validation_and_roundtrip():
    with pytest.raises(ValueError):
        SwingParams([1.0, -1.0], [0.0, 0.0], ((1, 2, 1.0),))
    p = SwingParams([1.0, 2.0], [0.5, 0.0], ((1, 2, -3.0),))
    assert p.susceptance_edges == ((1, 2, 3.0),)
    assert SwingParams.from_dict(p.to_dict()) == p


def test_rk4_matches_reference_integrator():
    m = build_consensus_model(path_graph(4), [1], [3])
    sig = lambda t: np.sin(1.3 * t) + 0.5 * np.cos(0.4 * t)
    res = simulate(m, sig, horizon=5.0, step=1e-3)
    ref = solve_ivp(lambda t, x: m.a_mat @ x + m.b_cols[:, 0] * sig(t), (0, 5), np.zeros(4), t_eval=res.t, rtol=1e-10, atol=1e-12)
    assert np.allclose(res.perf, ref.y.T, atol=1e-8)
    assert np.allclose(res.monitor[:, 0], ref.y[2], atol=1e-8)


def test_energies_of_constant_attack_on_integrator():
    # one vertex: x' = zeta = 1, so x = t and (1/T) int t^2 = T^2 / 3
    m = build_consensus_model(Graph(1, ()), [1], [1])
    res = simulate(m, lambda t: np.ones_like(t), horizon=3.0, step=1e-2)
    assert res.attack_energy == pytest.approx(1.0)
    assert res.perf_energy == pytest.approx(3.0, rel=1e-10)
    assert res.monitor_energy[0] == pytest.approx(3.0, rel=1e-10)


def test_sampled_attack_input():
    m = build_consensus_model(path_graph(3), [2], [1])
    t = np.linspace(0, 2, 201)
    a = simulate(m, np.sin(t), horizon=2.0, step=0.01)
    b = simulate(m, np.sin, horizon=2.0, step=0.01)
    assert np.allclose(a.perf, b.perf, atol=1e-5)
    with pytest.raises(ValueError):
        simulate(m, np.zeros(10), horizon=2.0, step=0.01)


def test_divergence_detected():
    m = SystemModel(np.array([[60.0]]), np.ones((1, 1)), np.eye(1), np.eye(1))
    with pytest.raises(SimulationDivergedError):
        simulate(m, lambda t: np.ones_like(t), horizon=20.0, step=0.05)
