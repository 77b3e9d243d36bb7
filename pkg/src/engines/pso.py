"""
Particle swarm optimizer with classic, time-varying-inertia and self-adaptive
coefficient schedules.

Each particle draws from its own generator spawned from the swarm seed, so the
random stream of a particle never depends on evaluation order. Fitness calls within
one iteration may run on an executor; results are reduced in particle order.
"""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.logging import get_logger
from src.core.models import SwarmConfig, Variant
from src.core.trace_logger import sim_logger

logger = get_logger(__name__)

Fitness = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class Particle:
    x: np.ndarray
    v: np.ndarray
    pbest_x: np.ndarray
    pbest_f: float = math.inf
    substream: int = 0


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    gbest_x: np.ndarray
    gbest_f: float
    history: List[float] = field(default_factory=list)
    evaluations: int = 0
    variant: str = Variant.SAPSO.value
    coefficients: List[Tuple[float, float, float]] = field(default_factory=list)


def schedule(variant: Variant, k: int, swarm_stats: Tuple[float, float], cfg: SwarmConfig) -> Tuple[float, float, float]:
    """Coefficients (w, c1, c2) for iteration k"""
    variant = Variant(variant)
    if variant == Variant.CLASSIC:
        return cfg.w, cfg.c1, cfg.c2
    if variant == Variant.TVIW:
        sweep = math.cos(math.pi * k / (2.0 * cfg.iterations))
        if cfg.tviw_decreasing:
            w = cfg.w_min + (cfg.w_max - cfg.w_min) * sweep
        else:
            w = cfg.w_max - (cfg.w_max - cfg.w_min) * sweep
        return w, cfg.c1, cfg.c2
    mean_speed, max_speed = swarm_stats
    w = 1.0 - math.exp(-mean_speed / max_speed)
    c1 = cfg.alpha * w
    return w, c1, cfg.alpha - c1


def swarm_stats(particles: Sequence[Particle], cfg: SwarmConfig) -> Tuple[float, float]:
    """(mean |v_ij| over the swarm, mean per-dimension velocity clamp)"""
    velocities = np.stack([p.v for p in particles])
    return float(np.mean(np.abs(velocities))), float(np.mean(np.abs(cfg.velocity_clamp())))


def update_particle(p: Particle, gbest_x: np.ndarray, coeffs: Tuple[float, float, float],
                    r1: np.ndarray, r2: np.ndarray, cfg: SwarmConfig) -> Particle:
    w, c1, c2 = coeffs
    v_max = cfg.velocity_clamp()
    lo, hi = cfg.bounds()
    v = w * p.v + c1 * r1 * (p.pbest_x - p.x) + c2 * r2 * (gbest_x - p.x)
    v = np.clip(v, -v_max, v_max)
    x = p.x + v
    clipped = (x < lo) | (x > hi)
    x = np.clip(x, lo, hi)
    v = np.where(clipped, 0.0, v)
    return replace(p, x=x, v=v)


def _evaluate(fitness: Fitness, positions: List[np.ndarray], executor: Optional[Executor]) -> List[float]:
    if executor is None:
        raw = [fitness(x) for x in positions]
    else:
        raw = list(executor.map(fitness, positions))
    values = []
    for index, value in enumerate(raw):
        value = float(value)
        if not math.isfinite(value):
            logger.warning("non_finite_fitness", particle=index, value=str(value))
            value = math.inf
        values.append(value)
    return values


def initialize(cfg: SwarmConfig) -> Tuple[List[Particle], List[np.random.Generator]]:
    lo, hi = cfg.bounds()
    v_max = cfg.velocity_clamp()
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.particles)]
    particles = []
    for index, rng in enumerate(streams):
        x = rng.uniform(lo, hi)
        v = rng.uniform(-v_max, v_max)
        particles.append(Particle(x=x, v=v, pbest_x=x.copy(), substream=index))
    return particles, streams


def optimize(fitness: Fitness, cfg: SwarmConfig, executor: Optional[Executor] = None) -> OptimizationResult:
    """Minimize fitness over the box [lower, upper]"""
    particles, streams = initialize(cfg)
    gbest_x = particles[0].x.copy()
    gbest_f = math.inf
    history: List[float] = []
    coefficients: List[Tuple[float, float, float]] = []
    evaluations = 0

    for k in range(cfg.iterations):
        values = _evaluate(fitness, [p.x for p in particles], executor)
        evaluations += len(values)
        for index, (p, value) in enumerate(zip(particles, values)):
            if value < p.pbest_f:
                particles[index] = replace(p, pbest_x=p.x.copy(), pbest_f=value)
        best = min(range(len(particles)), key=lambda i: particles[i].pbest_f)
        if particles[best].pbest_f < gbest_f:
            gbest_f = particles[best].pbest_f
            gbest_x = particles[best].pbest_x.copy()
        history.append(gbest_f)

        coeffs = schedule(cfg.variant, k, swarm_stats(particles, cfg), cfg)
        coefficients.append(coeffs)
        sim_logger.log_pso_iteration(cfg.variant.value, k, gbest_f, *coeffs)
        dimension = cfg.dimension
        for index, rng in enumerate(streams):
            r1 = rng.random(dimension)
            r2 = rng.random(dimension)
            particles[index] = update_particle(particles[index], gbest_x, coeffs, r1, r2, cfg)

    sim_logger.log_optimization(cfg.variant.value, gbest_f, evaluations)
    return OptimizationResult(gbest_x=gbest_x, gbest_f=gbest_f, history=history,
                              evaluations=evaluations, variant=cfg.variant.value,
                              coefficients=coefficients)
