# Benchmark objectives for swarm sanity checks
import numpy as np


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x**2))


def rastrigin(x, a: float = 10.0) -> float:
    x = np.asarray(x, dtype=float)
    return float(a * x.size + np.sum(x**2 - a * np.cos(2.0 * np.pi * x)))
