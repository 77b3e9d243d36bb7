"""
Output bundles written by the CLI.

File names are fixed per command. CSV floats are written with repr precision and
every file except manifest.json is free of timestamps, so reruns are byte-identical.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.core.config import settings
from src.core.constants import Columns
from src.core.errors import OutputError
from src.core.logging import get_logger
from src.core.models import ApfGains
from src.engines.pso import OptimizationResult

from .simulation import FitnessReport, RolloutLog
from .tuning import TuningResult, winner

logger = get_logger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"
GAINS_FILE = "gains.json"
CONVERGENCE_FILE = "convergence.csv"
WINNER_FILE = "winner.json"


@dataclass(frozen=True)
class RunManifest:
    command: str
    scenario: str
    variants: Tuple[str, ...] = ()
    overrides: Dict[str, Any] = field(default_factory=dict)
    version: str = settings.VERSION
    timestamp: Optional[str] = None

    def stamped(self) -> "RunManifest":
        now = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return RunManifest(self.command, self.scenario, self.variants, dict(self.overrides), self.version, now)

    def reproducible(self) -> Dict[str, Any]:
        """Everything needed to rerun, without the timestamp"""
        data = asdict(self)
        data.pop("timestamp")
        data["variants"] = list(self.variants)
        return data


@dataclass(frozen=True, eq=False)
class SimulationOutput:
    log: RolloutLog
    report: FitnessReport
    gains: ApfGains
    target: np.ndarray


@dataclass(frozen=True, eq=False)
class TuningOutput:
    tuning: TuningResult
    validation: Optional[SimulationOutput] = None


@dataclass(frozen=True, eq=False)
class ComparisonOutput:
    results: Dict[str, TuningResult]


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null"""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _gains_dict(gains: ApfGains) -> Dict[str, Any]:
    return gains.model_dump(mode="json")


def _write_text(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return path


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    return _write_text(path, json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, frame: pd.DataFrame) -> Path:
    return _write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def trajectory_frame(log: RolloutLog, target) -> pd.DataFrame:
    err = np.linalg.norm(log.load_error(target), axis=1)
    columns = np.column_stack([log.t, log.r_q, log.load, log.leader, err, log.S, log.f, log.min_clearance])
    return pd.DataFrame(columns, columns=Columns.TRAJECTORY)


def convergence_frame(result: OptimizationResult) -> pd.DataFrame:
    coefficients = np.asarray(result.coefficients, dtype=float).reshape(-1, 3)
    return pd.DataFrame({
        "iter": np.arange(len(result.history)),
        "gbest_f": result.history,
        "w": coefficients[:, 0],
        "c1": coefficients[:, 1],
        "c2": coefficients[:, 2],
    })


def comparison_frame(results: Dict[str, TuningResult]) -> pd.DataFrame:
    frame = {"iter": np.arange(max(len(r.result.history) for r in results.values()))}
    for name in Columns.VARIANTS:
        if name in results:
            frame[name] = results[name].result.history
    return pd.DataFrame(frame)


def _simulation_files(out: SimulationOutput, manifest: RunManifest, out_dir: Path) -> List[Path]:
    summary = {
        "fitness": out.report.to_dict(),
        "gains": _gains_dict(out.gains),
        "target": out.target,
        "steps": out.log.steps,
        "dt": out.log.dt,
        "fault_time": out.log.fault_time,
        "manifest": manifest.reproducible(),
    }
    return [
        _write_csv(out_dir / TRAJECTORY_FILE, trajectory_frame(out.log, out.target)),
        _write_json(out_dir / SUMMARY_FILE, summary),
    ]


def _tuning_files(out: TuningOutput, manifest: RunManifest, out_dir: Path) -> List[Path]:
    result = out.tuning.result
    gains = {
        "variant": result.variant,
        "gains": _gains_dict(out.tuning.gains),
        "gbest_f": result.gbest_f,
        "evaluations": result.evaluations,
        "manifest": manifest.reproducible(),
    }
    paths = [
        _write_json(out_dir / GAINS_FILE, gains),
        _write_csv(out_dir / CONVERGENCE_FILE, convergence_frame(result)),
    ]
    if out.validation is not None:
        paths += _simulation_files(out.validation, manifest, out_dir)
    return paths


def _comparison_files(out: ComparisonOutput, manifest: RunManifest, out_dir: Path) -> List[Path]:
    name, best = winner(out.results)
    summary = {
        "winner": name,
        "gbest_f": best,
        "variants": {
            key: {"gbest_f": r.result.gbest_f, "gains": _gains_dict(r.gains)}
            for key, r in out.results.items()
        },
        "manifest": manifest.reproducible(),
    }
    return [
        _write_csv(out_dir / CONVERGENCE_FILE, comparison_frame(out.results)),
        _write_json(out_dir / WINNER_FILE, summary),
    ]


Output = Union[SimulationOutput, TuningOutput, ComparisonOutput]


def write_outputs(output: Output, manifest: RunManifest, out_dir: Union[str, Path]) -> List[Path]:
    """Write the bundle for one command plus a timestamped manifest.json; returns the paths"""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(out_dir, exc.strerror or str(exc)) from exc

    if isinstance(output, SimulationOutput):
        paths = _simulation_files(output, manifest, out_dir)
    elif isinstance(output, TuningOutput):
        paths = _tuning_files(output, manifest, out_dir)
    elif isinstance(output, ComparisonOutput):
        paths = _comparison_files(output, manifest, out_dir)
    else:
        raise TypeError(f"unsupported output {type(output).__name__}")

    stamped = manifest if manifest.timestamp else manifest.stamped()
    paths.append(_write_json(out_dir / MANIFEST_FILE, asdict(stamped)))
    logger.info("outputs_written", directory=str(out_dir), files=[p.name for p in paths])
    return paths
