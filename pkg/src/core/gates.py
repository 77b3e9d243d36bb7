# Runtime gates: reaching margin, gimbal proximity, thrust floor, clearance
import warnings
from typing import Tuple

import numpy as np

from .constants import Numerics
from .errors import ReachingMarginWarning
from .models import SmcGains
from .trace_logger import GateStatus, sim_logger

AXES = ("x", "y", "z")


def check_reaching_margin(gains: SmcGains) -> Tuple[bool, np.ndarray]:
    """Sliding-mode stability condition mu > f_d + f_p on every axis.

    Returns (ok, eta) with eta = mu - f_d - f_p; warns once per violating axis.
    """
    eta = gains.margin()
    ok = True
    for axis, value in zip(AXES, eta):
        if value <= 0.0:
            ok = False
            sim_logger.log_gate_check("reaching_margin", GateStatus.BLOCK,
                                      f"mu_{axis} <= f_d + f_p", value=float(value), threshold=0.0)
            warnings.warn(
                f"reaching margin on {axis} is {value:.6g}; mu must exceed f_d + f_p",
                ReachingMarginWarning,
                stacklevel=2,
            )
        else:
            sim_logger.log_gate_check("reaching_margin", GateStatus.PASS,
                                      f"mu_{axis} > f_d + f_p", value=float(value), threshold=0.0)
    return ok, eta


def check_gimbal(theta: float, limit: float = Numerics.GIMBAL_LIMIT) -> bool:
    # True while pitch stays clear of the ZYX singularity
    return abs(theta) <= limit


def check_thrust(force_norm: float, floor: float = Numerics.THRUST_FLOOR) -> bool:
    return force_norm > floor


def check_clearance(distance: float) -> bool:
    # True if the point is outside every obstacle
    return distance >= 0.0
