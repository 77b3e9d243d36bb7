"""
Improved artificial potential field driving a massless virtual leader.

The repulsive potential of one obstacle is weighted by the goal distance
rho_t = |r_l - r_t| raised to n_exp, so repulsion fades as the goal is approached:

    U_rep = 1/2 k_m (1/rho - 1/rho0)^2 rho_t^n      (rho <= rho0, else 0)

and the force is its negative gradient, split into an obstacle term along grad(rho)
and a goal term along -grad(rho_t). Per-axis gains scale the gradient componentwise.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.core.constants import Numerics
from src.core.models import ApfGains, LeaderParams, Obstacle

from .world import ObstacleField, as_field

Obstacles = Union[ObstacleField, Sequence[Obstacle]]


@dataclass(frozen=True, eq=False)
class LeaderState:
    r_p: np.ndarray
    v_p: np.ndarray
    a_p: np.ndarray

    @classmethod
    def at_rest(cls, position) -> "LeaderState":
        return cls(np.asarray(position, dtype=float).copy(), np.zeros(3), np.zeros(3))

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.v_p))


def attractive(r_l, r_t, gains: ApfGains) -> Tuple[float, np.ndarray]:
    delta = np.asarray(r_l, dtype=float) - np.asarray(r_t, dtype=float)
    k_t = np.asarray(gains.k_t)
    return float(0.5 * np.sum(k_t * delta**2)), -k_t * delta


def repulsive_shape(r_l, r_t, obstacles: Obstacles, gains: ApfGains) -> Tuple[float, np.ndarray, np.ndarray]:
    """Unit-gain potential u and its two force terms (-du split into obstacle and goal parts)"""
    field = as_field(obstacles)
    if len(field) == 0:
        return 0.0, np.zeros(3), np.zeros(3)
    r_l = np.asarray(r_l, dtype=float)
    rho, grad_rho, _ = field.clearances(r_l)
    active = rho <= gains.rho0
    if not np.any(active):
        return 0.0, np.zeros(3), np.zeros(3)
    rho = rho[active]
    grad_rho = grad_rho[active]

    n = gains.n_exp
    goal = r_l - np.asarray(r_t, dtype=float)
    rho_t = float(np.linalg.norm(goal))
    weight = rho_t**n
    gap = 1.0 / rho - 1.0 / gains.rho0

    u = float(0.5 * np.sum(gap**2) * weight)
    push = (gap * weight / rho**2) @ grad_rho
    if n == 0.0:
        pull = np.zeros(3)
    else:
        rho_t_safe = max(rho_t, Numerics.GOAL_DISTANCE_FLOOR)
        grad_goal = goal / rho_t_safe
        pull = -0.5 * n * np.sum(gap**2) * rho_t_safe ** (n - 1.0) * grad_goal
    return u, push, pull


def repulsive(r_l, r_t, obstacles: Obstacles, gains: ApfGains) -> Tuple[float, np.ndarray]:
    """Summed repulsion of all obstacles whose clearance is within rho0"""
    u, push, pull = repulsive_shape(r_l, r_t, obstacles, gains)
    k_m = np.asarray(gains.k_m)
    return float(np.mean(k_m) * u), k_m * (push + pull)


def total_force(r_l, r_t, obstacles: Obstacles, gains: ApfGains) -> np.ndarray:
    return attractive(r_l, r_t, gains)[1] + repulsive(r_l, r_t, obstacles, gains)[1]


def leader_damping(gains: ApfGains, params: LeaderParams) -> np.ndarray:
    """Per-axis damping 2*zeta*sqrt(k_t): critically damped attraction at zeta = 1"""
    return 2.0 * params.damping_ratio * np.sqrt(np.asarray(gains.k_t))


def leader_step(leader: LeaderState, r_t, obstacles: Obstacles, gains: ApfGains, dt: float,
                params: LeaderParams = LeaderParams()) -> LeaderState:
    """Semi-implicit Euler: velocity first (then clamped to v_max), then position"""
    if not dt > 0:
        raise ValueError("dt > 0")
    a_p = total_force(leader.r_p, r_t, obstacles, gains) - leader_damping(gains, params) * leader.v_p
    v_p = leader.v_p + a_p * dt
    speed = float(np.linalg.norm(v_p))
    if speed > params.v_max:
        v_p = v_p * (params.v_max / speed)
    return LeaderState(r_p=leader.r_p + v_p * dt, v_p=v_p, a_p=a_p)
