"""
Command-line surface: simulate, tune and compare.

Exit codes: 0 success, 1 usage, 2 scenario, 3 simulation fault, 4 output I/O.
Flag defaults come from SLUNG_* environment variables, then the scenario file.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.core.config import Settings
from src.core.constants import Columns, ExitCodes
from src.core.errors import OutputError, PlannerError, ScenarioValidationError, UsageError
from src.core.logging import get_logger, setup_logging
from src.core.models import ApfGains, Scenario, SwarmConfig, Variant
from src.core.trace_logger import RunTrace
from src.engines.world import ScenarioBundle, read_bundle
from src.services.export import (
    ComparisonOutput,
    RunManifest,
    SimulationOutput,
    TuningOutput,
    write_outputs,
)
from src.services.simulation import RolloutOptions, Termination, fitness, rollout
from src.services.tuning import compare, tune

logger = get_logger(__name__)

COMMANDS = ("simulate", "tune", "compare")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors here map to exit 1"""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser(cfg: Settings) -> argparse.ArgumentParser:
    parser = _Parser(prog="slung-planner", description="Swarm-tuned potential-field planner for a slung payload")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument("--scenario", default=cfg.SCENARIO, required=cfg.SCENARIO is None,
                         help="scenario YAML file (extension optional)")
        sub.add_argument("--out", default=cfg.OUT, help="output directory")
        sub.add_argument("--seed", type=int, default=cfg.SEED)
        sub.add_argument("--dt", type=float, default=cfg.DT, help="rollout timestep in seconds")
        sub.add_argument("--horizon", type=float, default=cfg.HORIZON, help="rollout horizon in seconds")
        if name == "simulate":
            sub.add_argument("--gains", default=None, help="gains.json written by tune")
        else:
            sub.add_argument("--particles", type=int, default=cfg.PARTICLES)
            sub.add_argument("--iters", type=int, default=cfg.ITERS)
            sub.add_argument("--workers", type=int, default=cfg.WORKERS)
        if name == "tune":
            sub.add_argument("--variant", choices=Columns.VARIANTS, default=cfg.VARIANT)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("seed", "dt", "horizon", "particles", "iters", "variant", "workers", "gains")
    found = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    found["out"] = args.out
    return found


def _apply_overrides(bundle: ScenarioBundle, args: argparse.Namespace) -> ScenarioBundle:
    scenario_update = {}
    if args.horizon is not None:
        scenario_update["horizon"] = args.horizon
    if args.dt is not None:
        scenario_update["control_timestep"] = args.dt
    if args.seed is not None:
        scenario_update["rng_seed"] = args.seed

    swarm_update = {}
    for flag, key in (("seed", "seed"), ("particles", "particles"), ("iters", "iterations"),
                      ("variant", "variant")):
        value = getattr(args, flag, None)
        if value is not None:
            swarm_update[key] = value

    try:
        scenario = Scenario.model_validate({**bundle.scenario.model_dump(), **scenario_update})
        swarm = SwarmConfig.model_validate({**bundle.swarm.model_dump(), **swarm_update})
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(p) for p in error.get("loc", ())) or None
        raise ScenarioValidationError(error.get("msg", "invalid value"), field=field) from exc
    return ScenarioBundle(scenario=scenario, model=bundle.model, apf=bundle.apf, leader=bundle.leader,
                          smc=bundle.smc, pid=bundle.pid, swarm=swarm)


def _read_gains(path: str) -> ApfGains:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return ApfGains.model_validate(payload.get("gains", payload))
    except (OSError, ValueError, AttributeError) as exc:
        raise UsageError(f"cannot read gains from {path}: {exc}") from exc


def _validation_run(bundle: ScenarioBundle, gains: ApfGains, dt: Optional[float]) -> SimulationOutput:
    options = RolloutOptions(dt=dt, leader=bundle.leader)
    scenario = bundle.scenario
    log = rollout(scenario, gains, bundle.smc, bundle.pid, bundle.model, options)
    return SimulationOutput(log=log, report=fitness(log, scenario.target), gains=gains, target=scenario.target)


def _simulate(bundle: ScenarioBundle, args, manifest: RunManifest, cfg: Settings) -> int:
    gains = _read_gains(args.gains) if args.gains else bundle.apf
    output = _validation_run(bundle, gains, None)
    write_outputs(output, manifest, args.out)
    report = output.report
    logger.info("simulation_finished", termination=report.termination, J=report.J,
                final_error=report.final_error, settle_time=report.settle_time)
    if output.log.termination == Termination.FAULT:
        logger.error("simulation_fault", kind=report.fault_kind, time=output.log.fault_time)
        return ExitCodes.SIMULATION
    return ExitCodes.SUCCESS


def _tuning_options(bundle: ScenarioBundle, cfg: Settings) -> RolloutOptions:
    return RolloutOptions(dt=max(cfg.TUNING_DT, bundle.scenario.control_timestep), leader=bundle.leader)


def _tune(bundle: ScenarioBundle, args, manifest: RunManifest, cfg: Settings) -> int:
    tuned = tune(bundle.scenario, bundle.model, bundle.smc, bundle.pid, bundle.swarm, bundle.apf,
                 _tuning_options(bundle, cfg), args.workers)
    validation = _validation_run(bundle, tuned.gains, None)
    write_outputs(TuningOutput(tuning=tuned, validation=validation), manifest, args.out)
    logger.info("tune_finished", variant=tuned.result.variant, gbest_f=tuned.result.gbest_f,
                validation_J=validation.report.J, termination=validation.report.termination)
    return ExitCodes.SUCCESS


def _compare(bundle: ScenarioBundle, args, manifest: RunManifest, cfg: Settings) -> int:
    results = compare(bundle.scenario, bundle.model, bundle.smc, bundle.pid, bundle.swarm, bundle.apf,
                      _tuning_options(bundle, cfg), args.workers)
    write_outputs(ComparisonOutput(results=results), manifest, args.out)
    for name, tuned in results.items():
        logger.info("variant_result", variant=name, gbest_f=tuned.result.gbest_f)
    return ExitCodes.SUCCESS


HANDLERS = {"simulate": _simulate, "tune": _tune, "compare": _compare}


def run(argv: Optional[List[str]] = None) -> int:
    cfg = Settings()
    setup_logging(cfg.LOG_LEVEL)
    RunTrace.new_run()
    try:
        args = build_parser(cfg).parse_args(argv)
        bundle = _apply_overrides(read_bundle(args.scenario), args)
        if args.command == "compare":
            variants = tuple(v.value for v in Variant)
        elif args.command == "tune":
            variants = (bundle.swarm.variant.value,)
        else:
            variants = ()
        manifest = RunManifest(command=args.command, scenario=str(args.scenario), variants=variants,
                               overrides=_overrides(args))
        return HANDLERS[args.command](bundle, args, manifest, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except OutputError as exc:
        logger.error("output_failed", path=exc.path, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except PlannerError as exc:
        logger.error("run_failed", error=str(exc), exit_code=exc.exit_code)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
