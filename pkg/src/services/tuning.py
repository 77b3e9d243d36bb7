"""
Gain tuning: the swarm searches (k_m, k_t) in [0.001, 1]^6, scoring every candidate
with one closed-loop rollout at the coarse tuning timestep.
"""

from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.core.config import settings
from src.core.constants import Swarm
from src.core.logging import get_logger
from src.core.models import ApfGains, ModelParams, PidGains, Scenario, SmcGains, SwarmConfig, Variant
from src.engines.pso import OptimizationResult, optimize

from .simulation import RolloutOptions, fitness, rollout

logger = get_logger(__name__)

GAIN_DIMENSION = 6


@dataclass(frozen=True)
class RolloutFitness:
    """Picklable objective: gain vector -> J of one rollout"""

    scenario: Scenario
    model: ModelParams
    smc: SmcGains
    pid: PidGains
    rho0: float
    n_exp: float
    options: RolloutOptions

    def __call__(self, vector: np.ndarray) -> float:
        gains = ApfGains.from_vector(vector, rho0=self.rho0, n_exp=self.n_exp)
        log = rollout(self.scenario, gains, self.smc, self.pid, self.model, self.options)
        return fitness(log, self.scenario.target).J


@dataclass(frozen=True, eq=False)
class TuningResult:
    gains: ApfGains
    result: OptimizationResult


def _check_gain_box(cfg: SwarmConfig):
    if cfg.dimension != GAIN_DIMENSION:
        raise ValueError(f"gain search has {GAIN_DIMENSION} dimensions, got {cfg.dimension}")
    lo, hi = cfg.bounds()
    if np.any(lo < Swarm.GAIN_LOW) or np.any(hi > Swarm.GAIN_HIGH):
        raise ValueError(f"gain bounds lie within [{Swarm.GAIN_LOW}, {Swarm.GAIN_HIGH}]")


def _executor(workers: int):
    return ProcessPoolExecutor(max_workers=workers) if workers > 0 else nullcontext(None)


def tune(scenario: Scenario, model: ModelParams, smc: SmcGains, pid: PidGains, cfg: SwarmConfig,
         base: ApfGains = ApfGains(), options: Optional[RolloutOptions] = None,
         workers: int = 0) -> TuningResult:
    """Run one swarm variant; rho0 and n_exp are taken from base and held fixed"""
    _check_gain_box(cfg)
    options = options or RolloutOptions(dt=settings.TUNING_DT)
    objective = RolloutFitness(scenario, model, smc, pid, base.rho0, base.n_exp, options)
    logger.info("tuning_started", variant=cfg.variant.value, particles=cfg.particles,
                iterations=cfg.iterations, workers=workers, dt=options.dt)
    with _executor(workers) as executor:
        result = optimize(objective, cfg, executor=executor)
    gains = ApfGains.from_vector(result.gbest_x, rho0=base.rho0, n_exp=base.n_exp)
    logger.info("tuning_finished", variant=cfg.variant.value, gbest_f=result.gbest_f)
    return TuningResult(gains=gains, result=result)


def compare(scenario: Scenario, model: ModelParams, smc: SmcGains, pid: PidGains, cfg: SwarmConfig,
            base: ApfGains = ApfGains(), options: Optional[RolloutOptions] = None, workers: int = 0,
            variants: Sequence[Variant] = tuple(Variant)) -> Dict[str, TuningResult]:
    """Same scenario, seed and budget for every variant"""
    results = {}
    for variant in variants:
        variant_cfg = cfg.model_copy(update={"variant": Variant(variant)})
        results[Variant(variant).value] = tune(scenario, model, smc, pid, variant_cfg, base, options, workers)
    return results


def winner(results: Dict[str, TuningResult]) -> Tuple[str, float]:
    """Variant with the lowest final best fitness; ties go to the earlier variant"""
    name = min(results, key=lambda key: results[key].result.gbest_f)
    return name, results[name].result.gbest_f
