"""
Structured run tracing: a run id carried through one CLI invocation and the
audit events emitted by rollouts, gate checks and the swarm loop.
"""

import uuid
import threading
from enum import Enum
from typing import Any, Dict, Optional

import structlog


class GateStatus(Enum):
    PASS = "PASS"
    BLOCK = "BLOCK"


class RunTrace:
    """Thread-local run context for carrying a run id through the pipeline"""

    _local = threading.local()

    @classmethod
    def get_run_id(cls) -> str:
        run_id = getattr(cls._local, "run_id", None)
        if run_id is None:
            run_id = cls.new_run()
        return run_id

    @classmethod
    def set_run_id(cls, run_id: str):
        cls._local.run_id = run_id

    @classmethod
    def new_run(cls) -> str:
        run_id = uuid.uuid4().hex[:12]
        cls.set_run_id(run_id)
        return run_id


class SimLogger:
    """Audit events for gate checks, rollouts and optimization progress"""

    def __init__(self, name: str = "planner"):
        self.logger = structlog.get_logger(name)

    def _base_event(self, extra_fields: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        event = {"run_id": RunTrace.get_run_id()}
        if extra_fields:
            event.update(extra_fields)
        return event

    def log_gate_check(self, gate_name: str, status: GateStatus, reason: str,
                       value: Optional[float] = None, threshold: Optional[float] = None):
        event = self._base_event({
            "gate_name": gate_name,
            "status": status.value,
            "reason": reason,
            "value": value,
            "threshold": threshold,
        })
        if status == GateStatus.BLOCK:
            self.logger.warning("gate_block", **event)
        else:
            self.logger.debug("gate_pass", **event)

    def log_rollout(self, termination: str, duration: float, steps: int,
                    final_error: float, fault_kind: Optional[str] = None):
        event = self._base_event({
            "termination": termination,
            "sim_time": round(duration, 6),
            "steps": steps,
            "final_error": round(final_error, 6),
        })
        if fault_kind:
            event["fault_kind"] = fault_kind
            self.logger.warning("rollout_fault", **event)
        else:
            self.logger.debug("rollout_finished", **event)

    def log_pso_iteration(self, variant: str, iteration: int, gbest_f: float,
                          w: float, c1: float, c2: float):
        self.logger.debug("pso_iteration", **self._base_event({
            "variant": variant,
            "iteration": iteration,
            "gbest_f": gbest_f,
            "w": round(w, 6),
            "c1": round(c1, 6),
            "c2": round(c2, 6),
        }))

    def log_optimization(self, variant: str, gbest_f: float, evaluations: int):
        self.logger.info("pso_finished", **self._base_event({
            "variant": variant,
            "gbest_f": gbest_f,
            "evaluations": evaluations,
        }))


# Global logger instance
sim_logger = SimLogger()
