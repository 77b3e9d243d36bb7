"""Numerical constants, exit codes and error messages"""

import math


# Process exit codes for the CLI
class ExitCodes:
    SUCCESS = 0
    USAGE = 1
    SCENARIO = 2
    SIMULATION = 3
    IO = 4


# Geometry and dynamics tolerances
class Numerics:
    RHO_FLOOR = 1e-6              # m, clearance clamp (repulsive force divides by rho^2)
    GOAL_DISTANCE_FLOOR = 1e-6    # m, goal-distance clamp inside the second repulsive term
    CONDITION_LIMIT = 1e12        # mass-matrix condition estimate ceiling
    GIMBAL_LIMIT = math.radians(80.0)
    TILT_LIMIT = math.radians(60.0)
    THRUST_FLOOR = 1e-6           # N
    GRAVITY = 9.81


# Simulation defaults
class Mission:
    SETTLE_TOLERANCE = 0.25       # m
    SETTLE_HOLD = 2.0             # s
    STAGNATION_SPEED = 1e-3       # m/s
    STAGNATION_WINDOW = 5.0       # s
    EARLY_STOP_PENALTY = 10.0
    LEADER_MAX_SPEED = 2.0        # m/s
    LEADER_DAMPING_RATIO = 1.0
    BOUNDARY_LAYER = 0.05


# PSO defaults
class Swarm:
    PARTICLES = 50
    ITERATIONS = 100
    CLASSIC_W = 0.6
    W_MIN = 0.5
    W_MAX = 0.9
    C1 = 2.0
    C2 = 2.0
    SAPSO_ALPHA = 4.0
    VMAX_FRACTION = 0.2
    GAIN_LOW = 0.001
    GAIN_HIGH = 1.0


# Output schemas
class Columns:
    TRAJECTORY = [
        "t",
        "rq_x", "rq_y", "rq_z",
        "load_x", "load_y", "load_z",
        "leader_x", "leader_y", "leader_z",
        "err_norm",
        "s_x", "s_y", "s_z",
        "f",
        "min_clearance",
    ]
    VARIANTS = ["classic", "tviw", "sapso"]


class ErrorMessages:
    UNKNOWN_SCENARIO = "Scenario file not found"
    EMPTY_LOG = "Rollout log is empty"
    DEGENERATE_THRUST = "Desired force vanishes; thrust direction undefined"
    ILL_CONDITIONED = "Mass matrix condition estimate exceeds limit"
    GIMBAL = "Pitch approaches gimbal lock"
    NON_FINITE = "State became non-finite"
    LOCAL_MINIMUM = "Leader stalled away from the target"
