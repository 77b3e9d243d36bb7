"""
Obstacle field, scenario ingestion and disturbance realization.

Axes are NED-style: gravity acts along +z, so altitude is negative z. Cylinders are
infinite along z and only their x-y center matters.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from src.core.constants import ErrorMessages, Numerics
from src.core.errors import ScenarioParseError, ScenarioValidationError
from src.core.logging import get_logger
from src.core.models import (
    ApfGains,
    DisturbanceMode,
    DisturbanceSpec,
    LeaderParams,
    ModelParams,
    Obstacle,
    ObstacleShape,
    PidGains,
    RandomFieldSpec,
    Scenario,
    ScenarioFile,
    SmcGains,
    SwarmConfig,
)

logger = get_logger(__name__)

FALLBACK_DIRECTION = np.array([1.0, 0.0, 0.0])
DISTURBANCE_COMPONENTS = 4
DISTURBANCE_BAND_HZ = (0.05, 0.5)


class Clearance(NamedTuple):
    rho: float              # clamped surface distance, >= RHO_FLOOR
    grad: np.ndarray        # unit gradient of rho w.r.t. the query point
    degenerate: bool        # point on the center/axis, grad is the +x fallback
    distance: float         # signed surface distance, negative inside


def obstacle_clearance(point, obstacle: Obstacle) -> Clearance:
    p = np.asarray(point, dtype=float)
    delta = p - np.asarray(obstacle.center, dtype=float)
    if obstacle.shape == ObstacleShape.CYLINDER:
        delta[2] = 0.0
    norm = float(np.linalg.norm(delta))
    distance = norm - obstacle.radius
    rho = max(distance, Numerics.RHO_FLOOR)
    if norm == 0.0:
        return Clearance(rho, FALLBACK_DIRECTION.copy(), True, distance)
    return Clearance(rho, delta / norm, False, distance)


def advance_obstacles(world: Sequence[Obstacle], dt: float) -> List[Obstacle]:
    """Constant-velocity motion; static obstacles are returned unchanged"""
    advanced = []
    for obstacle in world:
        if obstacle.is_static or dt == 0:
            advanced.append(obstacle)
            continue
        center = tuple(float(c + v * dt) for c, v in zip(obstacle.center, obstacle.velocity))
        advanced.append(obstacle.model_copy(update={"center": center}))
    return advanced


class ObstacleField:
    """Array view of an obstacle list for per-step queries inside a rollout"""

    def __init__(self, centers: np.ndarray, radii: np.ndarray, velocities: np.ndarray,
                 cylinder: np.ndarray, ids: Tuple[int, ...]):
        self.centers = centers
        self.radii = radii
        self.velocities = velocities
        self.cylinder = cylinder
        self.ids = ids

    @classmethod
    def from_obstacles(cls, obstacles: Sequence[Obstacle]) -> "ObstacleField":
        k = len(obstacles)
        centers = np.array([o.center for o in obstacles], dtype=float).reshape(k, 3)
        radii = np.array([o.radius for o in obstacles], dtype=float)
        velocities = np.array([o.velocity for o in obstacles], dtype=float).reshape(k, 3)
        cylinder = np.array([o.shape == ObstacleShape.CYLINDER for o in obstacles], dtype=bool)
        return cls(centers, radii, velocities, cylinder, tuple(o.id for o in obstacles))

    def __len__(self) -> int:
        return len(self.radii)

    def advanced(self, dt: float) -> "ObstacleField":
        return ObstacleField(self.centers + self.velocities * dt, self.radii,
                             self.velocities, self.cylinder, self.ids)

    def clearances(self, point) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rho, grad, distance) for every obstacle, same conventions as obstacle_clearance"""
        delta = np.asarray(point, dtype=float)[None, :] - self.centers
        delta[self.cylinder, 2] = 0.0
        norms = np.linalg.norm(delta, axis=1)
        distance = norms - self.radii
        rho = np.maximum(distance, Numerics.RHO_FLOOR)
        grad = np.empty_like(delta)
        degenerate = norms == 0.0
        safe = ~degenerate
        grad[safe] = delta[safe] / norms[safe, None]
        grad[degenerate] = FALLBACK_DIRECTION
        return rho, grad, distance

    def min_distance(self, point) -> float:
        if len(self) == 0:
            return float("inf")
        return float(self.clearances(point)[2].min())

    def to_obstacles(self) -> List[Obstacle]:
        return [
            Obstacle(
                id=obstacle_id,
                shape=ObstacleShape.CYLINDER if cyl else ObstacleShape.SPHERE,
                center=tuple(float(c) for c in center),
                radius=float(radius),
                velocity=tuple(float(v) for v in velocity),
            )
            for obstacle_id, center, radius, velocity, cyl in zip(
                self.ids, self.centers, self.radii, self.velocities, self.cylinder)
        ]


def as_field(obstacles: Union[ObstacleField, Sequence[Obstacle]]) -> ObstacleField:
    if isinstance(obstacles, ObstacleField):
        return obstacles
    return ObstacleField.from_obstacles(list(obstacles))


def random_obstacle_field(spec: RandomFieldSpec, rng: np.random.Generator,
                          keep_clear: Sequence[np.ndarray], influence_radius: float,
                          first_id: int = 1) -> List[Obstacle]:
    """Static cylinders then moving spheres, each placed outside the influence radius of keep_clear points"""
    lo = np.asarray(spec.box_min, dtype=float)
    hi = np.asarray(spec.box_max, dtype=float)
    shapes = [ObstacleShape.CYLINDER] * spec.static_count + [ObstacleShape.SPHERE] * spec.moving_count
    obstacles: List[Obstacle] = []
    for offset, shape in enumerate(shapes):
        obstacle_id = first_id + offset
        for _ in range(spec.max_attempts):
            center = rng.uniform(lo, hi)
            radius = float(rng.uniform(*spec.radius_range))
            if shape == ObstacleShape.CYLINDER:
                center[2] = 0.0
                velocity = (0.0, 0.0, 0.0)
            else:
                heading = rng.uniform(0.0, 2.0 * np.pi)
                speed = rng.uniform(*spec.speed_range)
                velocity = (float(speed * np.cos(heading)), float(speed * np.sin(heading)), 0.0)
            candidate = Obstacle(id=obstacle_id, shape=shape, center=tuple(float(c) for c in center),
                                 radius=radius, velocity=velocity)
            if all(obstacle_clearance(p, candidate).distance > influence_radius for p in keep_clear):
                obstacles.append(candidate)
                break
        else:
            raise ScenarioValidationError(f"could not place obstacle {obstacle_id} clear of start and target",
                                          field="random_field")
    return obstacles


class DisturbanceModel:
    """Bounded force/torque disturbance realized from the scenario seed"""

    def __init__(self, spec: DisturbanceSpec, seed: int):
        self.spec = spec
        self._force_bound = np.asarray(spec.force_bound, dtype=float)
        self._torque_bound = np.asarray(spec.torque_bound, dtype=float)
        rng = np.random.default_rng([seed, 1])
        shape = (2, 3, DISTURBANCE_COMPONENTS)
        self._freq = 2.0 * np.pi * rng.uniform(*DISTURBANCE_BAND_HZ, size=shape)
        self._phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
        weights = rng.uniform(0.5, 1.0, size=shape)
        self._weights = weights / weights.sum(axis=2, keepdims=True)

    def sample(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        if self.spec.mode == DisturbanceMode.NONE:
            return np.zeros(3), np.zeros(3)
        if self.spec.mode == DisturbanceMode.CONSTANT:
            return self._force_bound.copy(), self._torque_bound.copy()
        waves = (self._weights * np.sin(self._freq * t + self._phase)).sum(axis=2)
        return self._force_bound * waves[0], self._torque_bound * waves[1]


# ---------------------------------------------------------------------------
# Scenario ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioBundle:
    """A validated scenario plus the model, gain and swarm settings that came with it"""

    scenario: Scenario
    model: ModelParams
    apf: ApfGains
    leader: LeaderParams
    smc: SmcGains
    pid: PidGains
    swarm: SwarmConfig


def _field_path(loc) -> Optional[str]:
    return ".".join(str(part) for part in loc) or None


def _translate(exc: ValidationError):
    error = exc.errors()[0]
    field = _field_path(error.get("loc", ()))
    if error.get("type") == "value_error":
        reason = error.get("ctx", {}).get("error", error.get("msg"))
        return ScenarioValidationError(str(reason), field=field)
    return ScenarioParseError(error.get("msg", "invalid value"), field=field)


def _parse(text: str) -> ScenarioFile:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioParseError(str(getattr(exc, "problem", None) or exc), line=line) from exc
    if not isinstance(raw, dict):
        raise ScenarioParseError("scenario must be a mapping of keys to values", line=1)
    try:
        return ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        raise _translate(exc) from exc


def load_bundle(text: str) -> ScenarioBundle:
    doc = _parse(text)
    obstacles = list(doc.obstacles)
    if doc.random_field is not None:
        first_id = max((o.id for o in obstacles), default=0) + 1
        rng = np.random.default_rng([doc.rng_seed, 0])
        keep_clear = [np.asarray(doc.start_quad_position, dtype=float),
                      np.asarray(doc.target_load_position, dtype=float)]
        obstacles += random_obstacle_field(doc.random_field, rng, keep_clear, doc.apf.rho0, first_id)
    try:
        scenario = Scenario(
            name=doc.name,
            start_quad_position=doc.start_quad_position,
            target_load_position=doc.target_load_position,
            target_load_velocity=doc.target_load_velocity,
            obstacles=tuple(obstacles),
            horizon=doc.horizon,
            control_timestep=doc.control_timestep,
            disturbance=doc.disturbance,
            rng_seed=doc.rng_seed,
            influence_radius=doc.apf.rho0,
        )
        overrides = {k: v for k, v in doc.pso.model_dump().items() if v is not None}
        swarm = SwarmConfig(**overrides)
    except ValidationError as exc:
        raise _translate(exc) from exc
    logger.debug("scenario_loaded", name=scenario.name, obstacles=len(scenario.obstacles))
    return ScenarioBundle(scenario=scenario, model=doc.model, apf=doc.apf, leader=doc.leader,
                          smc=doc.smc, pid=doc.pid.resolve(), swarm=swarm)


def load_scenario(text: str) -> Scenario:
    """Parse and validate scenario-file contents"""
    return load_bundle(text).scenario


def resolve_scenario_path(path: Union[str, Path]) -> Path:
    candidate = Path(path)
    for option in (candidate, candidate.with_suffix(".yaml"), candidate.with_suffix(".yml")):
        if option.is_file():
            return option
    raise ScenarioParseError(f"{ErrorMessages.UNKNOWN_SCENARIO}: {candidate}")


def read_bundle(path: Union[str, Path]) -> ScenarioBundle:
    return load_bundle(resolve_scenario_path(path).read_text(encoding="utf-8"))
