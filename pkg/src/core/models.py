# Pydantic contracts for scenario files, model parameters and gain sets
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, PositiveFloat, field_validator, model_validator

from .constants import Mission, Numerics, Swarm

Vec3 = Tuple[FiniteFloat, FiniteFloat, FiniteFloat]
ZERO3 = (0.0, 0.0, 0.0)


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


def _positive3(value: Vec3, name: str) -> Vec3:
    if any(v <= 0 for v in value):
        raise ValueError(f"{name} > 0")
    return value


def _non_negative3(value: Vec3, name: str) -> Vec3:
    if any(v < 0 for v in value):
        raise ValueError(f"{name} >= 0")
    return value


# ---------------------------------------------------------------------------
# World
# ---------------------------------------------------------------------------

class ObstacleShape(str, Enum):
    CYLINDER = "vertical-cylinder"
    SPHERE = "sphere"


class Obstacle(FrozenModel):
    """Static cylinder or moving sphere. Cylinders are infinite along z; their z center is ignored."""

    id: int
    shape: ObstacleShape = ObstacleShape.CYLINDER
    center: Vec3
    radius: float
    velocity: Vec3 = ZERO3

    @field_validator("radius")
    @classmethod
    def _radius_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("radius > 0")
        return v

    @model_validator(mode="after")
    def _cylinders_move_horizontally(self):
        if self.shape == ObstacleShape.CYLINDER and self.velocity[2] != 0.0:
            raise ValueError(f"obstacle {self.id}: cylinder velocity z-component must be 0")
        return self

    @property
    def is_static(self) -> bool:
        return self.velocity == ZERO3


class DisturbanceMode(str, Enum):
    NONE = "none"
    CONSTANT = "constant"
    BAND_LIMITED = "seeded-band-limited"


class DisturbanceSpec(FrozenModel):
    mode: DisturbanceMode = DisturbanceMode.NONE
    force_bound: Vec3 = ZERO3
    torque_bound: Vec3 = ZERO3

    @field_validator("force_bound", "torque_bound")
    @classmethod
    def _bounds_non_negative(cls, v: Vec3, info) -> Vec3:
        return _non_negative3(v, info.field_name)


class RandomFieldSpec(FrozenModel):
    """Seeded obstacle field: static cylinders plus constant-velocity spheres inside a box"""

    static_count: int = Field(default=0, ge=0)
    moving_count: int = Field(default=0, ge=0)
    box_min: Vec3
    box_max: Vec3
    radius_range: Tuple[PositiveFloat, PositiveFloat] = (1.0, 2.5)
    speed_range: Tuple[PositiveFloat, PositiveFloat] = (0.001, 0.5)
    max_attempts: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _ordered_ranges(self):
        if any(lo >= hi for lo, hi in zip(self.box_min, self.box_max)):
            raise ValueError("box_min < box_max")
        if self.radius_range[0] > self.radius_range[1]:
            raise ValueError("radius_range ordered")
        if self.speed_range[0] > self.speed_range[1]:
            raise ValueError("speed_range ordered")
        return self


class Scenario(FrozenModel):
    name: str = "scenario"
    start_quad_position: Vec3
    target_load_position: Vec3
    target_load_velocity: Vec3 = ZERO3
    obstacles: Tuple[Obstacle, ...] = ()
    horizon: PositiveFloat
    control_timestep: PositiveFloat
    disturbance: DisturbanceSpec = DisturbanceSpec()
    rng_seed: int = Field(default=0, ge=0, lt=2**64)
    influence_radius: PositiveFloat = 5.0

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.control_timestep > self.horizon:
            raise ValueError("dt <= T_max")
        ids = [o.id for o in self.obstacles]
        if len(set(ids)) != len(ids):
            raise ValueError("obstacle ids unique")
        for label, point in (("start", self.start_quad_position), ("target", self.target_load_position)):
            for obstacle in self.obstacles:
                if _surface_distance(np.asarray(point, dtype=float), obstacle) <= self.influence_radius:
                    raise ValueError(f"{label} inside obstacle {obstacle.id}")
        return self

    @property
    def target(self) -> np.ndarray:
        return np.asarray(self.target_load_position, dtype=float)

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.start_quad_position, dtype=float)


def _surface_distance(point: np.ndarray, obstacle: Obstacle) -> float:
    center = np.asarray(obstacle.center, dtype=float)
    delta = point - center
    if obstacle.shape == ObstacleShape.CYLINDER:
        delta[2] = 0.0
    return float(np.linalg.norm(delta) - obstacle.radius)


# ---------------------------------------------------------------------------
# Dynamics
# ---------------------------------------------------------------------------

class ModelParams(FrozenModel):
    """Quadrotor with an n-link chain; the last link mass is the payload"""

    m_q: PositiveFloat = 0.775
    J_q: Tuple[Vec3, Vec3, Vec3] = ((0.577e-2, 0.0, 0.0), (0.0, 0.577e-2, 0.0), (0.0, 0.0, 1.05e-2))
    link_masses: Tuple[float, ...] = (0.05, 0.05, 0.25)
    link_lengths: Tuple[float, ...] = (0.25, 0.25, 0.25)
    g: PositiveFloat = Numerics.GRAVITY

    @model_validator(mode="after")
    def _check_chain(self):
        if len(self.link_masses) < 1:
            raise ValueError("n >= 1")
        if len(self.link_masses) != len(self.link_lengths):
            raise ValueError("link_masses and link_lengths have equal length")
        if any(m <= 0 for m in self.link_masses):
            raise ValueError("link masses > 0")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths > 0")
        J = np.asarray(self.J_q, dtype=float)
        if not np.allclose(J, J.T):
            raise ValueError("J_q symmetric")
        if np.linalg.eigvalsh(J).min() <= 0:
            raise ValueError("J_q positive definite")
        return self

    @classmethod
    def reference(cls, n: int = 3) -> "ModelParams":
        """Reference airframe; shorter chains keep the 0.25 kg payload as the last link"""
        return cls(link_masses=(0.05,) * (n - 1) + (0.25,), link_lengths=(0.25,) * n)

    @property
    def n(self) -> int:
        return len(self.link_masses)

    @property
    def total_mass(self) -> float:
        return self.m_q + sum(self.link_masses)

    @property
    def cable_length(self) -> float:
        return sum(self.link_lengths)

    def inertia(self) -> np.ndarray:
        return np.asarray(self.J_q, dtype=float)

    def masses(self) -> np.ndarray:
        return np.asarray(self.link_masses, dtype=float)

    def lengths(self) -> np.ndarray:
        return np.asarray(self.link_lengths, dtype=float)


# ---------------------------------------------------------------------------
# Navigation and control gains
# ---------------------------------------------------------------------------

ALLOWED_EXPONENTS = (0.0, 0.5, 1.0, 2.0)

# Gains tuned by the three swarm variants on the reference mission
TUNED_GAIN_SETS = {
    "sapso": ((0.0649, 0.0646, 0.065), (0.0122, 0.0121, 0.0123)),
    "tviw": ((0.0656, 0.0654, 0.0653), (0.0146, 0.0146, 0.014)),
    "classic": ((0.0622, 0.0625, 0.0624), (0.0086, 0.0085, 0.0086)),
}


class ApfGains(FrozenModel):
    k_m: Vec3 = TUNED_GAIN_SETS["sapso"][0]
    k_t: Vec3 = TUNED_GAIN_SETS["sapso"][1]
    rho0: PositiveFloat = 5.0
    n_exp: float = 1.0

    @field_validator("k_m", "k_t")
    @classmethod
    def _gains_positive(cls, v: Vec3, info) -> Vec3:
        return _positive3(v, info.field_name)

    @field_validator("n_exp")
    @classmethod
    def _exponent_allowed(cls, v: float) -> float:
        if v not in ALLOWED_EXPONENTS:
            raise ValueError("n_exp in {0, 0.5, 1, 2}")
        return v

    def as_vector(self) -> np.ndarray:
        """Decision vector [k_xm, k_ym, k_zm, k_xt, k_yt, k_zt]"""
        return np.asarray(self.k_m + self.k_t, dtype=float)

    @classmethod
    def from_vector(cls, vector, rho0: float = 5.0, n_exp: float = 1.0) -> "ApfGains":
        v = [float(x) for x in vector]
        return cls(k_m=tuple(v[:3]), k_t=tuple(v[3:6]), rho0=rho0, n_exp=n_exp)

    @classmethod
    def tuned_sets(cls, rho0: float = 5.0, n_exp: float = 1.0) -> Dict[str, "ApfGains"]:
        return {
            name: cls(k_m=k_m, k_t=k_t, rho0=rho0, n_exp=n_exp)
            for name, (k_m, k_t) in TUNED_GAIN_SETS.items()
        }


class LeaderParams(FrozenModel):
    v_max: PositiveFloat = Mission.LEADER_MAX_SPEED
    damping_ratio: float = Field(default=Mission.LEADER_DAMPING_RATIO, ge=0.0)


class SmcGains(FrozenModel):
    lam: Vec3 = (0.04, 0.04, 0.8)
    mu: Vec3 = (0.06, 0.06, 0.08)
    boundary_layer: float = Field(default=Mission.BOUNDARY_LAYER, ge=0.0)
    f_d: Vec3 = (0.01, 0.01, 0.01)
    f_p: Vec3 = (0.03, 0.03, 0.03)

    @field_validator("lam", "mu")
    @classmethod
    def _slopes_positive(cls, v: Vec3, info) -> Vec3:
        return _positive3(v, info.field_name)

    @field_validator("f_d", "f_p")
    @classmethod
    def _bounds_non_negative(cls, v: Vec3, info) -> Vec3:
        return _non_negative3(v, info.field_name)

    def margin(self) -> np.ndarray:
        """eta = mu - f_d - f_p per axis"""
        return np.asarray(self.mu) - np.asarray(self.f_d) - np.asarray(self.f_p)


class PidGains(FrozenModel):
    k_p: Vec3
    k_d: Vec3
    k_i: Vec3
    integral_limit: float = Field(default=0.2, ge=0.0)

    @field_validator("k_p", "k_d", "k_i")
    @classmethod
    def _gains_non_negative(cls, v: Vec3, info) -> Vec3:
        return _non_negative3(v, info.field_name)

    @classmethod
    def soft(cls) -> "PidGains":
        return cls(k_p=(0.05, 0.05, 0.08), k_d=(0.6, 0.6, 0.8), k_i=(0.15, 0.15, 0.1))

    @classmethod
    def stiff(cls) -> "PidGains":
        # ~10 rad/s attitude bandwidth, damping ratio ~0.9, for the reference inertia
        return cls(k_p=(0.577, 0.577, 1.05), k_d=(0.104, 0.104, 0.189), k_i=(0.05, 0.05, 0.05))


class Variant(str, Enum):
    CLASSIC = "classic"
    TVIW = "tviw"
    SAPSO = "sapso"


class SwarmConfig(FrozenModel):
    particles: int = Field(default=Swarm.PARTICLES, ge=2)
    iterations: int = Field(default=Swarm.ITERATIONS, ge=1)
    lower: Tuple[float, ...] = (Swarm.GAIN_LOW,) * 6
    upper: Tuple[float, ...] = (Swarm.GAIN_HIGH,) * 6
    v_max: Optional[Tuple[PositiveFloat, ...]] = None
    variant: Variant = Variant.SAPSO
    w: float = Swarm.CLASSIC_W
    w_min: float = Swarm.W_MIN
    w_max: float = Swarm.W_MAX
    tviw_decreasing: bool = False
    alpha: PositiveFloat = Swarm.SAPSO_ALPHA
    c1: float = Swarm.C1
    c2: float = Swarm.C2
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_box(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper bounds have equal, nonzero length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lo < hi per dimension")
        if self.v_max is not None and len(self.v_max) != len(self.lower):
            raise ValueError("v_max has one entry per dimension")
        if not 0 < self.w_min < self.w_max:
            raise ValueError("0 < w_min < w_max")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def velocity_clamp(self) -> np.ndarray:
        if self.v_max is not None:
            return np.asarray(self.v_max, dtype=float)
        lo, hi = self.bounds()
        return Swarm.VMAX_FRACTION * (hi - lo)


# ---------------------------------------------------------------------------
# Scenario file
# ---------------------------------------------------------------------------

class PsoOverrides(FrozenModel):
    particles: Optional[int] = Field(default=None, ge=2)
    iterations: Optional[int] = Field(default=None, ge=1)
    variant: Optional[Variant] = None
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    alpha: Optional[PositiveFloat] = None
    tviw_decreasing: Optional[bool] = None


class AttitudeProfile(str, Enum):
    SOFT = "soft"
    STIFF = "stiff"


class PidBlock(FrozenModel):
    """Either a named profile or explicit gains"""

    profile: Optional[AttitudeProfile] = None
    k_p: Optional[Vec3] = None
    k_d: Optional[Vec3] = None
    k_i: Optional[Vec3] = None
    integral_limit: float = Field(default=0.2, ge=0.0)

    @model_validator(mode="after")
    def _gains_all_or_none(self):
        given = [name for name in ("k_p", "k_d", "k_i") if getattr(self, name) is not None]
        if given and len(given) < 3:
            raise ValueError(f"k_p, k_d and k_i must be given together (got only {', '.join(given)})")
        return self

    def resolve(self) -> PidGains:
        if self.k_p is not None:
            return PidGains(k_p=self.k_p, k_d=self.k_d, k_i=self.k_i, integral_limit=self.integral_limit)
        base = PidGains.soft() if self.profile == AttitudeProfile.SOFT else PidGains.stiff()
        return base.model_copy(update={"integral_limit": self.integral_limit})


class ScenarioFile(FrozenModel):
    """Top-level shape of a scenario YAML document"""

    name: str = "scenario"
    start_quad_position: Vec3
    target_load_position: Vec3
    target_load_velocity: Vec3 = ZERO3
    horizon: PositiveFloat
    control_timestep: PositiveFloat = 1e-3
    rng_seed: int = Field(default=0, ge=0, lt=2**64)
    disturbance: DisturbanceSpec = DisturbanceSpec()
    obstacles: Tuple[Obstacle, ...] = ()
    random_field: Optional[RandomFieldSpec] = None
    model: ModelParams = ModelParams()
    apf: ApfGains = ApfGains()
    leader: LeaderParams = LeaderParams()
    smc: SmcGains = SmcGains()
    pid: PidBlock = PidBlock()
    pso: PsoOverrides = PsoOverrides()
