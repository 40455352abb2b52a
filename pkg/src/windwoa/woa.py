"""Whale-style swarm optimizer over a box-bounded continuous space.

A population of agents is moved each iteration by one of three rules:
shrinking encirclement of the incumbent best, a logarithmic spiral
around it, or a move toward a randomly chosen agent (exploration).
Fitness is minimized. Every random draw comes from a per-agent stream
derived from (seed, iteration, agent index), so results are
reproducible and independent of evaluation order; fitness evaluations
within an iteration may therefore run concurrently without changing
the outcome.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .seeding import make_rng

# Contract for objectives: pure in the argument vector, returns a finite
# float for any in-bounds vector or a non-finite value to mark the point
# infeasible (treated as +inf, never an exception).
ObjectiveFunction = Callable[[np.ndarray], float]


class InitializationError(RuntimeError):
    """Raised when no initial agent produced a finite objective value."""


@dataclass(frozen=True)
class Bounds:
    """Per-dimension box constraints with lower < upper everywhere."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.ndim != 1 or upper.ndim != 1 or lower.size != upper.size:
            raise ValueError("lower and upper must be vectors of equal length")
        if lower.size < 1:
            raise ValueError("bounds need at least one dimension")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("every dimension needs lower < upper")

    @property
    def dimension(self) -> int:
        return self.lower.size

    @classmethod
    def cube(cls, dimension: int, lower: float, upper: float) -> "Bounds":
        return cls(np.full(dimension, float(lower)), np.full(dimension, float(upper)))

    def clamp(self, position: np.ndarray) -> np.ndarray:
        return np.clip(position, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))


@dataclass(frozen=True)
class WoaConfig:
    """Run settings. frozen_l / frozen_p pin the spiral parameter and the
    branch probability to fixed values instead of per-step draws; both
    default to None (fresh draws), which is the behavior the update
    equations describe."""

    bounds: Bounds
    population_size: int = 30
    max_iterations: int = 50
    seed: int = 0
    spiral_constant_b: float = 1.0
    frozen_l: Optional[float] = None
    frozen_p: Optional[float] = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.spiral_constant_b > 0:
            raise ValueError("spiral_constant_b must be > 0")
        if self.frozen_l is not None and not -1.0 <= self.frozen_l <= 1.0:
            raise ValueError("frozen_l must lie in [-1, 1]")
        if self.frozen_p is not None and not 0.0 <= self.frozen_p <= 1.0:
            raise ValueError("frozen_p must lie in [0, 1]")


@dataclass
class SearchAgent:
    position: np.ndarray
    fitness: float


@dataclass
class WoaState:
    population: list[SearchAgent]
    best: SearchAgent
    iteration: int
    a: float
    history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class WoaResult:
    best_position: np.ndarray
    best_fitness: float
    history: list[float]


def decay_a(t: int, max_iterations: int) -> float:
    """Linear decay of the encirclement scale from 2 at t=0 to 0 at the end."""
    if not 0 <= t <= max_iterations:
        raise ValueError("t must lie in [0, max_iterations]")
    return 2.0 - t * 2.0 / max_iterations


def coefficient_vectors(a: float, dim: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw r ~ U[0,1] per dimension and return (A, C, r) with
    A = 2*a*r - a and C = 2*r."""
    r = rng.random(dim)
    return 2.0 * a * r - a, 2.0 * r, r


def encircle_step(position: np.ndarray, best: np.ndarray, A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Contract toward the incumbent best; caller clamps to bounds."""
    distance = np.abs(C * best - position)
    return best - A * distance


def explore_step(position: np.ndarray, partner: np.ndarray, A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Same algebra as encircle_step but aimed at a random agent."""
    distance = np.abs(C * partner - position)
    return partner - A * distance


def spiral_step(position: np.ndarray, best: np.ndarray, b: float, l: float) -> np.ndarray:
    """Logarithmic spiral around the incumbent best, l in [-1, 1]."""
    distance = np.abs(best - position)
    return distance * math.exp(b * l) * math.cos(2.0 * math.pi * l) + best


def _evaluate(objective: ObjectiveFunction, position: np.ndarray) -> float:
    value = float(objective(position))
    return value if math.isfinite(value) else math.inf


def initialize_population(config: WoaConfig, objective: ObjectiveFunction) -> WoaState:
    """Sample the population uniformly within bounds and evaluate it."""
    rng = make_rng(config.seed, 0)
    positions = config.bounds.sample(rng, config.population_size)
    agents = [SearchAgent(position, _evaluate(objective, position)) for position in positions]
    if all(math.isinf(agent.fitness) for agent in agents):
        raise InitializationError("objective returned a non-finite value for every initial agent")
    incumbent = min(agents, key=lambda agent: agent.fitness)
    best = SearchAgent(incumbent.position.copy(), incumbent.fitness)
    return WoaState(population=agents, best=best, iteration=0, a=2.0, history=[best.fitness])


def woa_step(state: WoaState, config: WoaConfig, objective: ObjectiveFunction) -> WoaState:
    """Advance the population by one iteration (in place).

    All candidate moves are computed from the population snapshot taken
    at the start of the iteration; the incumbent best is updated once
    after every agent has been evaluated. An agent whose new position
    evaluates non-finite keeps its previous position and fitness.
    """
    if state.iteration >= config.max_iterations:
        raise ValueError("state has already reached max_iterations")
    t = state.iteration
    a = decay_a(t, config.max_iterations)
    bounds = config.bounds
    dim = bounds.dimension
    snapshot = [agent.position for agent in state.population]
    best_position = state.best.position

    for index, agent in enumerate(state.population):
        rng = make_rng(config.seed, t + 1, index)
        A, C, _ = coefficient_vectors(a, dim, rng)
        p = rng.random() if config.frozen_p is None else config.frozen_p
        if p < 0.5:
            # Scalar branch test on the first coordinate of A, matching the
            # original algorithm's single |A| threshold.
            if abs(A[0]) < 1.0:
                candidate = encircle_step(agent.position, best_position, A, C)
            else:
                partner = snapshot[int(rng.integers(len(snapshot)))]
                candidate = explore_step(agent.position, partner, A, C)
        else:
            l = rng.uniform(-1.0, 1.0) if config.frozen_l is None else config.frozen_l
            candidate = spiral_step(agent.position, best_position, config.spiral_constant_b, l)
        candidate = bounds.clamp(candidate)
        fitness = _evaluate(objective, candidate)
        if math.isfinite(fitness):
            agent.position = candidate
            agent.fitness = fitness

    challenger = min(state.population, key=lambda ag: ag.fitness)
    if challenger.fitness < state.best.fitness:
        state.best = SearchAgent(challenger.position.copy(), challenger.fitness)
    state.iteration = t + 1
    state.a = decay_a(state.iteration, config.max_iterations)
    state.history.append(state.best.fitness)
    return state


def woa_optimize(config: WoaConfig, objective: ObjectiveFunction,
                 trace_path=None) -> WoaResult:
    """Full run: initialization plus max_iterations steps.

    history[0] is the best fitness after initialization, history[t] the
    best after iteration t. When trace_path is given the history is
    also written as a CSV with columns iteration,best_fitness.
    """
    state = initialize_population(config, objective)
    while state.iteration < config.max_iterations:
        woa_step(state, config, objective)
    result = WoaResult(state.best.position.copy(), state.best.fitness, list(state.history))
    if trace_path is not None:
        _write_trace(trace_path, result.history)
    return result


def _write_trace(path, history):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["iteration", "best_fitness"])
        for iteration, value in enumerate(history):
            writer.writerow([iteration, repr(value)])
