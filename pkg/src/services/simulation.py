"""Closed-loop rollout engine and the time-weighted tracking-error fitness"""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.constants import ErrorMessages, Mission
from src.core.errors import SimulationFault
from src.core.gates import check_clearance, check_reaching_margin
from src.core.logging import get_logger
from src.core.models import ApfGains, LeaderParams, ModelParams, PidGains, Scenario, SmcGains
from src.core.trace_logger import sim_logger
from src.engines.apf import LeaderState, leader_step
from src.engines.control import AttitudeController, extract_thrust_attitude, smc_force
from src.engines.dynamics import E3, SystemState, WrenchInput, euler_rates, load_position, step
from src.engines.world import DisturbanceModel, ObstacleField

logger = get_logger(__name__)


class Termination(str, Enum):
    HORIZON = "horizon"
    SETTLED = "settled"
    COLLISION = "collision"
    FAULT = "fault"


@dataclass(frozen=True)
class RolloutOptions:
    dt: Optional[float] = None            # overrides the scenario control timestep
    settle_tolerance: float = Mission.SETTLE_TOLERANCE
    settle_hold: float = Mission.SETTLE_HOLD
    stagnation_speed: float = Mission.STAGNATION_SPEED
    stagnation_window: float = Mission.STAGNATION_WINDOW
    leader: LeaderParams = LeaderParams()
    psi_d: float = 0.0


@dataclass(frozen=True, eq=False)
class RolloutLog:
    t: np.ndarray
    r_q: np.ndarray
    v_q: np.ndarray
    load: np.ndarray          # exact chained payload position
    load_approx: np.ndarray   # straight-line approximation fed to the APF
    leader: np.ndarray
    leader_v: np.ndarray
    quad_error: np.ndarray    # quadrotor reference minus r_q
    euler: np.ndarray
    S: np.ndarray
    U: np.ndarray
    f: np.ndarray
    min_clearance: np.ndarray
    termination: Termination
    dt: float
    horizon: float
    settle_time: Optional[float] = None
    fault_kind: Optional[str] = None
    fault_time: Optional[float] = None

    @property
    def steps(self) -> int:
        return len(self.t)

    def load_error(self, r_t) -> np.ndarray:
        return self.load - np.asarray(r_t, dtype=float)


class _Recorder:
    def __init__(self):
        self.rows: Dict[str, List] = {name: [] for name in (
            "t", "r_q", "v_q", "load", "load_approx", "leader", "leader_v",
            "quad_error", "euler", "S", "U", "f", "min_clearance")}

    def append(self, **values):
        for name, value in values.items():
            self.rows[name].append(np.array(value, dtype=float, copy=True))

    def __len__(self) -> int:
        return len(self.rows["t"])

    def arrays(self) -> Dict[str, np.ndarray]:
        out = {}
        for name, values in self.rows.items():
            if values:
                out[name] = np.stack(values)
            else:
                out[name] = np.zeros((0,) if name in ("t", "f", "min_clearance") else (0, 3))
        return out


def rollout(scenario: Scenario, gains: ApfGains, smc: SmcGains, pid: PidGains, model: ModelParams,
            options: RolloutOptions = RolloutOptions()) -> RolloutLog:
    """Run navigation -> position -> attitude -> plant until settle, collision, fault or horizon.

    Faults are recorded in the log and never raised past this function.
    """
    dt = options.dt or scenario.control_timestep
    n_steps = int(round(scenario.horizon / dt))
    check_reaching_margin(smc)

    target = scenario.target
    offset = model.cable_length * E3
    total_mass = model.total_mass
    state = SystemState.hanging(model.n, scenario.start)
    obstacles = ObstacleField.from_obstacles(scenario.obstacles)
    leader = LeaderState.at_rest(load_position(state, model, straight_line=True))
    attitude = AttitudeController(pid)
    disturbance = DisturbanceModel(scenario.disturbance, scenario.rng_seed)
    rec = _Recorder()

    S = np.zeros(3)
    U = np.zeros(3)
    thrust = total_mass * model.g
    termination = Termination.HORIZON
    settle_time = inside_since = stalled_since = None
    fault_kind = fault_time = None
    k = 0

    def record(t, clearance, reference):
        rec.append(t=t, r_q=state.r_q, v_q=state.v_q, load=load,
                   load_approx=load_position(state, model, straight_line=True),
                   leader=leader.r_p, leader_v=leader.v_p, quad_error=reference - state.r_q,
                   euler=state.euler, S=S, U=U, f=thrust, min_clearance=clearance)

    while True:
        t = k * dt
        load = load_position(state, model)
        error = float(np.linalg.norm(load - target))
        clearance = min(obstacles.min_distance(state.r_q), obstacles.min_distance(load))
        reference = leader.r_p - offset

        if not check_clearance(clearance):
            termination = Termination.COLLISION
            record(t, clearance, reference)
            break
        if error < options.settle_tolerance:
            inside_since = t if inside_since is None else inside_since
            if t - inside_since >= options.settle_hold - 1e-9:
                termination, settle_time = Termination.SETTLED, inside_since
                record(t, clearance, reference)
                break
        else:
            inside_since = None
        if k >= n_steps:
            record(t, clearance, reference)
            break

        recorded = False
        try:
            if not np.all(np.isfinite(leader.r_p)):
                raise SimulationFault("non-finite", ErrorMessages.NON_FINITE, t)
            next_leader = leader_step(leader, target, obstacles, gains, dt, options.leader)
            if next_leader.speed < options.stagnation_speed and error > options.settle_tolerance:
                stalled_since = t if stalled_since is None else stalled_since
                if t - stalled_since >= options.stagnation_window:
                    raise SimulationFault("apf-local-minimum", ErrorMessages.LOCAL_MINIMUM, t)
            else:
                stalled_since = None

            tracked = LeaderState(next_leader.r_p - offset, next_leader.v_p, next_leader.a_p)
            U, S = smc_force(tracked, state.r_q, state.v_q, smc, total_mass)
            command = extract_thrust_attitude(U, total_mass, model.g, options.psi_d)
            thrust = command.thrust
            rates = euler_rates(state.euler, state.body_rates)
            torque = attitude.update(state.euler, rates, (command.phi_d, command.theta_d, options.psi_d), dt)
            f_dis, tau_dis = disturbance.sample(t)
            record(t, clearance, reference)
            recorded = True
            state = step(state, WrenchInput(thrust, torque, f_dis, tau_dis), model, dt)
            leader = next_leader
        except SimulationFault as fault:
            termination = Termination.FAULT
            fault_kind, fault_time = fault.kind, t
            if not recorded:
                record(t, clearance, reference)
            break

        obstacles = obstacles.advanced(dt)
        k += 1

    arrays = rec.arrays()
    log = RolloutLog(**arrays, termination=termination, dt=dt, horizon=scenario.horizon,
                     settle_time=settle_time, fault_kind=fault_kind, fault_time=fault_time)
    final_error = float(np.linalg.norm(log.load[-1] - target))
    sim_logger.log_rollout(termination.value, float(log.t[-1]), log.steps, final_error, fault_kind)
    return log


@dataclass(frozen=True)
class FitnessReport:
    J: float
    final_error: float
    settle_time: Optional[float]
    min_clearance: float
    collided: bool
    faulted: bool
    termination: str
    settle_time_axis: Tuple[Optional[float], Optional[float], Optional[float]] = (None, None, None)
    fault_kind: Optional[str] = None

    def to_dict(self) -> Dict:
        return asdict(self)


def axis_settle_times(t: np.ndarray, error: np.ndarray, tolerance: float) -> Tuple[Optional[float], ...]:
    """Per axis, the earliest time after which |error| stays below tolerance to the end of the log"""
    times = []
    for axis in range(error.shape[1]):
        outside = np.nonzero(np.abs(error[:, axis]) >= tolerance)[0]
        if outside.size == 0:
            times.append(float(t[0]))
        elif outside[-1] == len(t) - 1:
            times.append(None)
        else:
            times.append(float(t[outside[-1] + 1]))
    return tuple(times)


def fitness(log: RolloutLog, r_t, penalty: float = Mission.EARLY_STOP_PENALTY,
            settle_tolerance: float = Mission.SETTLE_TOLERANCE) -> FitnessReport:
    """J = integral of t*|e| dt (trapezoid) plus the early-stop penalty for collisions and faults"""
    if log.steps == 0:
        raise ValueError(ErrorMessages.EMPTY_LOG)
    error = log.load_error(r_t)
    norm = np.linalg.norm(error, axis=1)
    J = float(np.trapezoid(log.t * norm, log.t)) if log.steps > 1 else 0.0
    collided = log.termination == Termination.COLLISION
    faulted = log.termination == Termination.FAULT
    if collided or faulted:
        t_stop = float(log.t[-1])
        J += penalty * max(log.horizon - t_stop, 0.0) * log.horizon
    return FitnessReport(
        J=J,
        final_error=float(norm[-1]),
        settle_time=log.settle_time,
        min_clearance=float(np.min(log.min_clearance)),
        collided=collided,
        faulted=faulted,
        termination=log.termination.value,
        settle_time_axis=axis_settle_times(log.t, error, settle_tolerance),
        fault_kind=log.fault_kind,
    )
