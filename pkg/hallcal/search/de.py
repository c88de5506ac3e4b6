import logging

from dataclasses import dataclass
from typing import Callable

import numpy as np

from scipy.stats import qmc

from .bounds import Bounds, CountedObjective, SearchError, SearchResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeConfig:
    population_size: int = 10
    crossover_rate: float = 0.6
    max_iterations: int = 100
    differential_weight: float = 0.8
    init_spread: float = 0.25  # half-width of the initial jitter, as a fraction of the box
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 4:
            raise SearchError('DE needs a population of at least 4, got {}.'.format(self.population_size))

        if not 0.0 <= self.crossover_rate <= 1.0:
            raise SearchError('The crossover rate must lie in [0, 1], got {}.'.format(self.crossover_rate))


def initial_population(bounds: Bounds, cfg: DeConfig, x0, rng: np.random.Generator) -> np.ndarray:
    """
    x0 first, then Latin-hypercube jitter around it for the remaining members.
    """
    x0 = bounds.clip(x0)
    dim = len(x0)
    sampler = qmc.LatinHypercube(d=dim, seed=rng)
    jitter = (2.0 * sampler.random(cfg.population_size - 1) - 1.0) * cfg.init_spread * bounds.width

    return np.vstack([x0, bounds.clip(x0 + jitter)])


def de_search(objective: Callable, bounds: Bounds, cfg: DeConfig, x0) -> SearchResult:
    """
    DE/rand/1/bin inside the box. Trials are clipped into the bounds before
    they are evaluated; a trial replaces its parent only when strictly better.
    `losses` holds the population best after seeding and after each generation.
    """
    rng = np.random.default_rng(cfg.seed)
    counted = CountedObjective(objective)

    population = initial_population(bounds, cfg, x0, rng)
    size, dim = population.shape
    fitness = counted.evaluate_many(population, cfg.workers)
    losses = [float(fitness.min())]

    for generation in range(cfg.max_iterations):
        trials = np.empty_like(population)

        for i in range(size):
            others = [j for j in range(size) if j != i]
            a, b, c = population[rng.choice(others, 3, replace=False)]
            mutant = a + cfg.differential_weight * (b - c)

            cross = rng.random(dim) < cfg.crossover_rate
            cross[rng.integers(dim)] = True

            trials[i] = bounds.clip(np.where(cross, mutant, population[i]))

        values = counted.evaluate_many(trials, cfg.workers)
        improved = values < fitness
        population[improved] = trials[improved]
        fitness[improved] = values[improved]
        losses.append(float(fitness.min()))

    best = int(np.argmin(fitness))
    logger.debug('DE finished: %d evaluations, best objective %.6g', counted.calls, fitness[best])

    return SearchResult(population[best].copy(), float(fitness[best]), counted.calls, counted.best_trace, losses)
