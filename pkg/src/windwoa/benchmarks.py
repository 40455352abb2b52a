"""Classic continuous test functions for exercising the optimizer."""

import numpy as np


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


# name -> (function, conventional half-width of the search cube)
BENCHMARKS = {
    "sphere": (sphere, 10.0),
    "rosenbrock": (rosenbrock, 5.0),
    "rastrigin": (rastrigin, 5.12),
}
