"""
(1+1) evolution strategy with the 1/5 success rule, the heuristic baseline
that spends one solver call per candidate.
"""
import logging

from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from .bounds import Bounds, CountedObjective, SearchError, SearchResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EsConfig:
    sigma0: float = 5.0
    window: int = 20
    factor: float = 1.5
    target_success: float = 0.2
    max_evals: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise SearchError('sigma0 must be positive, got {}.'.format(self.sigma0))


@dataclass
class EsResult(SearchResult):
    sigma_trace: List[float] = field(default_factory=list)
    success_rates: List[float] = field(default_factory=list)


def cmaes_1p1(objective: Callable, bounds: Bounds, cfg: EsConfig, x0) -> EsResult:
    """
    One Gaussian offspring per iteration, clipped to the box; it replaces the
    parent only when strictly better. Every `window` mutations sigma grows by
    `factor` if more than a fifth succeeded and shrinks by it if fewer did.
    """
    rng = np.random.default_rng(cfg.seed)
    counted = CountedObjective(objective)

    parent = bounds.clip(x0)
    parent_value = float(counted(parent))
    sigma = cfg.sigma0
    successes = 0
    mutations = 0
    sigma_trace, success_rates = [sigma], []

    while counted.calls < cfg.max_evals:
        child = bounds.clip(parent + sigma * rng.standard_normal(len(parent)))
        child_value = float(counted(child))
        mutations += 1

        if child_value < parent_value:
            parent, parent_value = child, child_value
            successes += 1

        if mutations == cfg.window:
            rate = successes / mutations
            success_rates.append(rate)

            if rate > cfg.target_success:
                sigma *= cfg.factor
            elif rate < cfg.target_success:
                sigma /= cfg.factor

            sigma_trace.append(sigma)
            successes = mutations = 0

    logger.debug('(1+1)-ES finished: %d evaluations, best %.6g, sigma %.3g', counted.calls, parent_value, sigma)

    return EsResult(parent, parent_value, counted.calls, counted.best_trace,
                    sigma_trace=sigma_trace, success_rates=success_rates)
