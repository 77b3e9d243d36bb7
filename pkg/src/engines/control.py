"""
Hierarchical controller: sliding-mode position loop, thrust/attitude extraction,
PID attitude loop.

Position law, with e = r_p - r_q, e_v = v_p - v_q and S = lam*e + e_v:

    U = M_T (a_p + lam*e_v + mu*sat(S/phi))

which imposes S_dot = -mu*sat(S/phi) on the nominal error dynamics M_T r_q_dd = U.
phi = 0 selects the pure sign function with sgn(0) = 0.
"""

from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from src.core.constants import ErrorMessages, Numerics
from src.core.errors import SimulationFault
from src.core.gates import check_thrust
from src.core.models import PidGains, SmcGains

from .apf import LeaderState

E3 = np.array([0.0, 0.0, 1.0])


def sat(x: np.ndarray, boundary_layer: float) -> np.ndarray:
    if boundary_layer == 0.0:
        return np.sign(x)
    return np.clip(x / boundary_layer, -1.0, 1.0)


def smc_force(leader: LeaderState, r_q, v_q, gains: SmcGains, total_mass: float) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (U, S): the commanded world-frame force and the sliding variable"""
    lam = np.asarray(gains.lam)
    mu = np.asarray(gains.mu)
    e = leader.r_p - np.asarray(r_q, dtype=float)
    e_v = leader.v_p - np.asarray(v_q, dtype=float)
    S = lam * e + e_v
    U = total_mass * (leader.a_p + lam * e_v + mu * sat(S, gains.boundary_layer))
    return U, S


class AttitudeCommand(NamedTuple):
    thrust: float
    phi_d: float
    theta_d: float
    saturated: bool


def extract_thrust_attitude(U_world, total_mass: float, g: float, psi_d: float = 0.0,
                            tilt_limit: float = Numerics.TILT_LIMIT) -> AttitudeCommand:
    """Map the position command to thrust magnitude and roll/pitch set-points.

    The thrust vector -f R e3 must equal F_des = U - M_T g e3; the body z-axis is
    therefore -F_des/f and, with yaw fixed, R e3 rotated by -psi is
    (sin(theta)cos(phi), -sin(phi), cos(theta)cos(phi)).
    """
    F_des = np.asarray(U_world, dtype=float) - total_mass * g * E3
    f = float(np.linalg.norm(F_des))
    if not check_thrust(f):
        raise SimulationFault("degenerate-thrust", ErrorMessages.DEGENERATE_THRUST)
    b3 = -F_des / f
    c, s = np.cos(psi_d), np.sin(psi_d)
    bx = c * b3[0] + s * b3[1]
    by = -s * b3[0] + c * b3[1]
    phi = float(np.arcsin(np.clip(-by, -1.0, 1.0)))
    theta = float(np.arctan2(bx, b3[2]))
    phi_c = float(np.clip(phi, -tilt_limit, tilt_limit))
    theta_c = float(np.clip(theta, -tilt_limit, tilt_limit))
    return AttitudeCommand(f, phi_c, theta_c, phi_c != phi or theta_c != theta)


def wrap_angle(angle):
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


def pid_attitude(euler, euler_dot, desired, gains: PidGains, integral, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """tau = k_p*err - k_d*rate + k_i*clamp(integral); returns (tau, advanced integral).

    The desired angular rates are zero, so the derivative term acts on the measured
    Euler rates only. The integral is advanced with the rectangle rule after use.
    """
    if not dt > 0:
        raise ValueError("dt > 0")
    limit = gains.integral_limit
    err = wrap_angle(np.asarray(desired, dtype=float) - np.asarray(euler, dtype=float))
    held = np.clip(np.asarray(integral, dtype=float), -limit, limit)
    tau = np.asarray(gains.k_p) * err - np.asarray(gains.k_d) * np.asarray(euler_dot, dtype=float) \
        + np.asarray(gains.k_i) * held
    return tau, np.clip(held + err * dt, -limit, limit)


@dataclass
class AttitudeController:
    """PID state owned by one rollout"""

    gains: PidGains
    integral: np.ndarray = None

    def __post_init__(self):
        if self.integral is None:
            self.integral = np.zeros(3)

    def update(self, euler, euler_dot, desired, dt: float) -> np.ndarray:
        tau, self.integral = pid_attitude(euler, euler_dot, desired, self.gains, self.integral, dt)
        return tau
