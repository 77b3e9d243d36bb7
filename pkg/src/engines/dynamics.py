"""
Euler-Lagrange model of a quadrotor carrying an n-link rigid chain.

The translational/link subsystem is M(q) X_dot = T - C(q, w) with
X = [v_q, w_1, ..., w_n]; link directions evolve as q_i_dot = w_i x q_i. The
attitude uses ZYX Euler angles with body rates and J W_dot = tau + tau_dis - W x J W.
Gravity acts along +e3.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np

from src.core.constants import ErrorMessages, Numerics
from src.core.errors import SimulationFault
from src.core.gates import check_gimbal
from src.core.models import ModelParams

from . import kernels

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class SystemState:
    r_q: np.ndarray
    v_q: np.ndarray
    q: np.ndarray             # (n, 3) unit link directions
    omega: np.ndarray         # (n, 3) link angular velocities, orthogonal to q
    euler: np.ndarray         # (phi, theta, psi)
    body_rates: np.ndarray    # quadrotor angular velocity in the body frame

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @classmethod
    def hanging(cls, n: int, r_q=(0.0, 0.0, 0.0)) -> "SystemState":
        """All links straight down, everything at rest"""
        return cls(
            r_q=np.asarray(r_q, dtype=float).copy(),
            v_q=np.zeros(3),
            q=np.tile(E3, (n, 1)),
            omega=np.zeros((n, 3)),
            euler=np.zeros(3),
            body_rates=np.zeros(3),
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.r_q, self.v_q, self.q.ravel(), self.omega.ravel(),
                               self.euler, self.body_rates]).astype(float)

    @classmethod
    def from_vector(cls, y: np.ndarray, n: int) -> "SystemState":
        base = 6 + 6 * n
        return cls(
            r_q=y[0:3].copy(),
            v_q=y[3:6].copy(),
            q=y[6:6 + 3 * n].reshape(n, 3).copy(),
            omega=y[6 + 3 * n:base].reshape(n, 3).copy(),
            euler=y[base:base + 3].copy(),
            body_rates=y[base + 3:base + 6].copy(),
        )

    def satisfies_invariants(self, tol: float = 1e-9) -> bool:
        norms_ok = np.all(np.abs(np.linalg.norm(self.q, axis=1) - 1.0) <= tol)
        tangent_ok = np.all(np.abs(np.einsum("ij,ij->i", self.q, self.omega)) <= tol)
        return bool(norms_ok and tangent_ok)


@dataclass(frozen=True, eq=False)
class WrenchInput:
    thrust: float
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_dis: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tau_dis: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.thrust < 0:
            raise ValueError("thrust f >= 0")


class Accelerations(NamedTuple):
    v_dot: np.ndarray
    omega_dot: np.ndarray


@lru_cache(maxsize=32)
def _arrays(p: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    J = np.ascontiguousarray(p.inertia())
    return p.masses(), p.lengths(), J, np.linalg.inv(J)


def _vec(v) -> np.ndarray:
    return np.ascontiguousarray(v, dtype=float)


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix with hat(v) @ w == cross(v, w)"""
    return kernels.hat3(_vec(v))


def rotation_matrix(euler) -> np.ndarray:
    phi, theta, psi = (float(a) for a in euler)
    return kernels.rotation_zyx(phi, theta, psi)


def euler_rates(euler, body_rates) -> np.ndarray:
    return kernels.euler_rates(float(euler[0]), float(euler[1]), _vec(body_rates))


def mass_matrix(state: SystemState, p: ModelParams) -> np.ndarray:
    masses, lengths, _, _ = _arrays(p)
    return kernels.assemble_mass_matrix(_vec(state.q), p.m_q, masses, lengths)


def coriolis_vector(state: SystemState, p: ModelParams) -> np.ndarray:
    masses, lengths, _, _ = _arrays(p)
    return kernels.coriolis_vector(_vec(state.q), _vec(state.omega), p.m_q, masses, lengths, p.g)


def generalized_force(state: SystemState, u: WrenchInput) -> np.ndarray:
    """T = [-f R e3 + F_dis, 0, ..., 0]"""
    return kernels.generalized_force(_vec(state.euler), float(u.thrust), _vec(u.f_dis), state.n)


def solve_accelerations(state: SystemState, u: WrenchInput, p: ModelParams) -> Accelerations:
    M = mass_matrix(state, p)
    rhs = generalized_force(state, u) - coriolis_vector(state, p)
    xdot, cond, status = kernels.cholesky_solve(M, rhs, Numerics.CONDITION_LIMIT)
    if status != kernels.STATUS_OK:
        raise SimulationFault("ill-conditioned", f"{ErrorMessages.ILL_CONDITIONED} ({cond:.3g})")
    return Accelerations(v_dot=xdot[:3].copy(), omega_dot=xdot[3:].reshape(state.n, 3).copy())


def step(state: SystemState, u: WrenchInput, p: ModelParams, dt: float) -> SystemState:
    """One classical RK4 step with the wrench held constant over dt"""
    if not dt > 0:
        raise ValueError("dt > 0")
    masses, lengths, J, J_inv = _arrays(p)
    y, status, cond = kernels.rk4_step(
        state.to_vector(), float(dt), state.n, p.m_q, masses, lengths, p.g, J, J_inv,
        float(u.thrust), _vec(u.torque), _vec(u.f_dis), _vec(u.tau_dis), Numerics.CONDITION_LIMIT,
    )
    if status != kernels.STATUS_OK:
        raise SimulationFault("ill-conditioned", f"{ErrorMessages.ILL_CONDITIONED} ({cond:.3g})")
    if not np.all(np.isfinite(y)):
        raise SimulationFault("non-finite", ErrorMessages.NON_FINITE)
    next_state = SystemState.from_vector(y, state.n)
    if not check_gimbal(next_state.euler[1]):
        raise SimulationFault("gimbal", f"{ErrorMessages.GIMBAL} (theta={next_state.euler[1]:.4f})")
    return next_state


def load_position(state: SystemState, p: ModelParams, straight_line: bool = False) -> np.ndarray:
    """Payload position: exact chain r_q + sum(l_i q_i), or the straight-line r_q + L e3"""
    if straight_line:
        return state.r_q + p.cable_length * E3
    return state.r_q + p.lengths() @ state.q


def total_energy(state: SystemState, p: ModelParams) -> float:
    """Kinetic (0.5 X'MX + 0.5 W'JW) plus gravitational potential, datum z = 0"""
    X = np.concatenate([state.v_q, state.omega.ravel()])
    kinetic = 0.5 * X @ mass_matrix(state, p) @ X
    rotational = 0.5 * state.body_rates @ p.inertia() @ state.body_rates
    tail = np.cumsum(p.masses()[::-1])[::-1]
    height_moment = p.total_mass * state.r_q[2] + np.sum(tail * p.lengths() * state.q[:, 2])
    return float(kinetic + rotational - p.g * height_moment)
