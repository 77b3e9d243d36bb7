import pytest
import numpy as np
from hypothesis import given, settings as hsettings, strategies as st

from src.core.errors import SimulationFault
from src.core.models import ModelParams
from src.engines import kernels
from src.engines.dynamics import (
    E3,
    SystemState,
    WrenchInput,
    coriolis_vector,
    generalized_force,
    hat,
    load_position,
    mass_matrix,
    rotation_matrix,
    solve_accelerations,
    step,
    total_energy,
)


def random_state(n, seed, spread=1.0):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 3))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    omega = rng.normal(scale=spread, size=(n, 3))
    omega -= np.einsum("ij,ij->i", omega, q)[:, None] * q
    return SystemState(
        r_q=rng.normal(size=3),
        v_q=rng.normal(size=3),
        q=q,
        omega=omega,
        euler=rng.uniform(-0.4, 0.4, size=3),
        body_rates=rng.normal(scale=0.3, size=3),
    )


def chain(n):
    return ModelParams(link_masses=(0.05,) * (n - 1) + (0.25,), link_lengths=(0.25,) * n)


def test_hat_zero():
    np.testing.assert_array_equal(hat((0.0, 0.0, 0.0)), np.zeros((3, 3)))


def test_hat_cross_identity():
    np.testing.assert_allclose(hat((1.0, 0.0, 0.0)) @ np.array([0.0, 1.0, 0.0]), [0.0, 0.0, 1.0])


@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_hat_is_skew(seed):
    v, w = np.random.default_rng(seed).normal(size=(2, 3))
    H = hat(v)
    np.testing.assert_array_equal(H.T, -H)
    np.testing.assert_allclose(H @ w, np.cross(v, w), atol=1e-12)


def test_rotation_is_orthonormal():
    R = rotation_matrix((0.2, -0.3, 1.1))
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)
    assert np.linalg.det(R) == pytest.approx(1.0)


def test_single_link_mass_blocks():
    p = ModelParams(link_masses=(0.25,), link_lengths=(0.5,))
    state = random_state(1, 3)
    M = mass_matrix(state, p)
    np.testing.assert_allclose(M[:3, :3], (0.775 + 0.25) * np.eye(3))
    np.testing.assert_allclose(M[:3, 3:], -0.25 * 0.5 * hat(state.q[0]))
    np.testing.assert_allclose(M[3:, 3:], 0.25 * 0.25 * np.eye(3))


def test_reference_total_mass_on_diagonal(reference_model):
    M = mass_matrix(SystemState.hanging(3), reference_model)
    np.testing.assert_allclose(np.diag(M)[:3], 1.125)


@hsettings(max_examples=300)
@given(n=st.integers(min_value=1, max_value=3), seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_mass_matrix_symmetric_positive_definite(n, seed):
    M = mass_matrix(random_state(n, seed), chain(n))
    np.testing.assert_allclose(M, M.T, atol=1e-15)
    assert np.linalg.eigvalsh(M).min() > 0


def test_hanging_coriolis_is_gravity_only(reference_model):
    C = coriolis_vector(SystemState.hanging(3), reference_model)
    np.testing.assert_allclose(C[:3], [0.0, 0.0, -1.125 * 9.81])
    np.testing.assert_allclose(C[3:], 0.0, atol=1e-15)


def test_single_link_coriolis_by_hand():
    p = ModelParams(link_masses=(0.3,), link_lengths=(0.4,), g=9.81)
    state = random_state(1, 21)
    q, w = state.q[0], state.omega[0]
    expected_r = -0.3 * 0.4 * (w @ w) * q - (0.775 + 0.3) * 9.81 * E3
    expected_w = -0.3 * 9.81 * 0.4 * np.cross(q, E3)
    C = coriolis_vector(state, p)
    np.testing.assert_allclose(C[:3], expected_r, rtol=1e-12)
    np.testing.assert_allclose(C[3:], expected_w, rtol=1e-12, atol=1e-15)


def test_velocity_terms_are_quadratic(reference_model):
    state = random_state(3, 5)
    doubled = SystemState(state.r_q, state.v_q, state.q, 2.0 * state.omega, state.euler, state.body_rates)
    at_rest = SystemState(state.r_q, state.v_q, state.q, 0.0 * state.omega, state.euler, state.body_rates)
    base = coriolis_vector(at_rest, reference_model)
    np.testing.assert_allclose(coriolis_vector(doubled, reference_model) - base,
                               4.0 * (coriolis_vector(state, reference_model) - base), rtol=1e-12, atol=1e-12)


def test_hover_is_equilibrium(reference_model):
    state = SystemState.hanging(3, (1.0, 2.0, -5.0))
    u = WrenchInput(reference_model.total_mass * reference_model.g)
    acc = solve_accelerations(state, u, reference_model)
    np.testing.assert_allclose(acc.v_dot, 0.0, atol=1e-12)
    np.testing.assert_allclose(acc.omega_dot, 0.0, atol=1e-12)
    after = step(state, u, reference_model, 1e-3)
    np.testing.assert_allclose(after.to_vector(), state.to_vector(), atol=1e-9)


def test_zero_thrust_free_fall(reference_model):
    acc = solve_accelerations(SystemState.hanging(3), WrenchInput(0.0), reference_model)
    np.testing.assert_allclose(acc.v_dot, [0.0, 0.0, 9.81], atol=1e-12)
    np.testing.assert_allclose(acc.omega_dot, 0.0, atol=1e-12)


@given(n=st.integers(min_value=1, max_value=3), seed=st.integers(min_value=0, max_value=2**32 - 1),
       thrust=st.floats(min_value=0.0, max_value=30.0))
def test_solve_residual(n, seed, thrust):
    p = chain(n)
    state = random_state(n, seed)
    u = WrenchInput(thrust, f_dis=np.array([0.01, -0.02, 0.03]))
    acc = solve_accelerations(state, u, p)
    X_dot = np.concatenate([acc.v_dot, acc.omega_dot.ravel()])
    rhs = generalized_force(state, u) - coriolis_vector(state, p)
    residual = mass_matrix(state, p) @ X_dot - rhs
    assert np.linalg.norm(residual) < 1e-10 * (1.0 + np.linalg.norm(rhs))


def test_thrust_acts_along_negative_body_z():
    state = SystemState.hanging(1)
    euler = np.array([0.1, -0.2, 0.3])
    tilted = SystemState(state.r_q, state.v_q, state.q, state.omega, euler, state.body_rates)
    T = generalized_force(tilted, WrenchInput(2.0))
    np.testing.assert_allclose(T[:3], -2.0 * rotation_matrix(euler) @ E3)
    np.testing.assert_array_equal(T[3:], 0.0)


def test_step_keeps_link_constraints(reference_model):
    state = random_state(3, 8)
    after = step(state, WrenchInput(8.0), reference_model, 1e-3)
    np.testing.assert_allclose(np.linalg.norm(after.q, axis=1), 1.0, atol=1e-12)
    assert np.all(np.abs(np.einsum("ij,ij->i", after.q, after.omega)) < 1e-12)
    assert after.satisfies_invariants()


def test_step_rejects_non_positive_dt(reference_model):
    with pytest.raises(ValueError):
        step(SystemState.hanging(3), WrenchInput(1.0), reference_model, 0.0)


def test_negative_thrust_rejected():
    with pytest.raises(ValueError):
        WrenchInput(-1.0)


def test_gimbal_fault(reference_model):
    state = SystemState.hanging(3)
    near_lock = SystemState(state.r_q, state.v_q, state.q, state.omega,
                            np.array([0.0, 1.39, 0.0]), np.array([0.0, 5.0, 0.0]))
    with pytest.raises(SimulationFault) as exc:
        step(near_lock, WrenchInput(11.0), reference_model, 1e-2)
    assert exc.value.kind == "gimbal"


def test_ill_conditioned_fault():
    p = ModelParams(link_masses=(1e-13,), link_lengths=(0.25,))
    with pytest.raises(SimulationFault) as exc:
        solve_accelerations(SystemState.hanging(1), WrenchInput(5.0), p)
    assert exc.value.kind == "ill-conditioned"


def test_solve_agrees_with_dense_solve(reference_model):
    state = random_state(3, 4)
    M = mass_matrix(state, reference_model)
    rhs = np.linspace(-1.0, 1.0, M.shape[0])
    x, cond, status = kernels.cholesky_solve(M, rhs, 1e12)
    assert status == kernels.STATUS_OK
    np.testing.assert_allclose(x, np.linalg.solve(M, rhs), rtol=1e-10, atol=1e-12)
    assert cond == pytest.approx(np.linalg.cond(M), rel=1e-8)


def test_condition_number_is_not_the_pivot_ratio():
    # squared pivot ratio is about 5e7 here while the true condition number is about 2e8
    eps = 1e-8
    A = np.array([[1.0, 1.0 - eps], [1.0 - eps, 1.0]])
    L = np.linalg.cholesky(A)
    assert (L[0, 0] / L[1, 1]) ** 2 < 1e8
    _, cond, status = kernels.cholesky_solve(A, np.ones(2), 1e8)
    assert status == kernels.STATUS_ILL_CONDITIONED
    assert cond == pytest.approx(np.linalg.cond(A), rel=1e-6)


def test_indefinite_matrix_rejected():
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    x, cond, status = kernels.cholesky_solve(A, np.ones(2), 1e12)
    assert status == kernels.STATUS_NOT_POSITIVE
    assert np.isinf(cond)
    np.testing.assert_array_equal(x, 0.0)


def test_hanging_load_position(reference_model):
    state = SystemState.hanging(3, (1.0, 2.0, -3.0))
    np.testing.assert_allclose(load_position(state, reference_model), [1.0, 2.0, -2.25])


def test_sideways_single_link_load():
    p = ModelParams(link_masses=(0.25,), link_lengths=(0.25,))
    state = SystemState.hanging(1)
    side = SystemState(state.r_q, state.v_q, np.array([[1.0, 0.0, 0.0]]), state.omega, state.euler, state.body_rates)
    np.testing.assert_allclose(load_position(side, p), [0.25, 0.0, 0.0])


def test_straight_line_load_ignores_links(reference_model):
    a, b = random_state(3, 1), random_state(3, 2)
    b = SystemState(a.r_q, a.v_q, b.q, b.omega, a.euler, a.body_rates)
    np.testing.assert_array_equal(load_position(a, reference_model, straight_line=True),
                                  load_position(b, reference_model, straight_line=True))


def test_energy_at_rest_on_datum(reference_model):
    state = SystemState.hanging(3)
    flat = SystemState(state.r_q, state.v_q, np.tile([1.0, 0.0, 0.0], (3, 1)), state.omega,
                       state.euler, state.body_rates)
    assert total_energy(flat, reference_model) == pytest.approx(0.0, abs=1e-15)


@given(dx=st.floats(min_value=-100, max_value=100), dy=st.floats(min_value=-100, max_value=100))
def test_energy_ignores_horizontal_translation(dx, dy):
    p = chain(2)
    state = random_state(2, 4)
    moved = SystemState(state.r_q + np.array([dx, dy, 0.0]), state.v_q, state.q, state.omega,
                        state.euler, state.body_rates)
    assert total_energy(moved, p) == pytest.approx(total_energy(state, p), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_unforced_energy_drift(n):
    p = chain(n)
    state = random_state(n, 40 + n, spread=2.0)
    state = SystemState(np.array([0.0, 0.0, -10.0]), state.v_q, state.q, state.omega,
                        np.zeros(3), np.zeros(3))
    start = total_energy(state, p)
    for _ in range(10_000):
        state = step(state, WrenchInput(0.0), p, 1e-3)
    assert abs(total_energy(state, p) - start) < 1e-3 * abs(start)


def _pendulum_oracle(r_q, v_q, r_l, v_l, m_q, m, length, thrust, g, dt, steps):
    """Point masses joined by a rigid rod; rod tension solved from the length constraint"""
    inv_mu = 1.0 / m + 1.0 / m_q
    thrust_force = -thrust * E3

    def rates(y):
        rq, vq, rl, vl = y[0:3], y[3:6], y[6:9], y[9:12]
        d = rl - rq
        q = d / np.linalg.norm(d)
        rel = vl - vq
        tension = (rel @ rel - d @ thrust_force / m_q) / (length * inv_mu)
        aq = thrust_force / m_q + g * E3 + tension * q / m_q
        al = g * E3 - tension * q / m
        return np.concatenate([vq, aq, vl, al])

    y = np.concatenate([r_q, v_q, r_l, v_l]).astype(float)
    for _ in range(steps):
        k1 = rates(y)
        k2 = rates(y + 0.5 * dt * k1)
        k3 = rates(y + 0.5 * dt * k2)
        k4 = rates(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y[0:3], y[6:9]


def test_single_link_matches_rigid_rod_oracle():
    length, m = 0.5, 0.25
    p = ModelParams(link_masses=(m,), link_lengths=(length,))
    angle, spin = 0.4, 1.5
    q0 = np.array([np.sin(angle), 0.0, np.cos(angle)])
    w0 = np.array([0.0, spin, 0.0])
    v0 = np.array([0.2, -0.1, 0.0])
    state = SystemState(np.zeros(3), v0.copy(), q0[None, :].copy(), w0[None, :].copy(), np.zeros(3), np.zeros(3))
    thrust = 0.9 * p.total_mass * p.g
    dt, steps = 1e-3, 1000
    for _ in range(steps):
        state = step(state, WrenchInput(thrust), p, dt)
    rq, rl = _pendulum_oracle(np.zeros(3), v0, length * q0, v0 + length * np.cross(w0, q0),
                              p.m_q, m, length, thrust, p.g, dt, steps)
    scale = np.linalg.norm(rq) + 1.0
    np.testing.assert_allclose(state.r_q, rq, atol=1e-6 * scale)
    np.testing.assert_allclose(load_position(state, p), rl, atol=1e-6 * scale)
