"""
Gradient refinement of a DE winner: the configuration search run on the
surrogate once its weights are frozen.
"""
import logging

from dataclasses import replace
from typing import Callable, NamedTuple

import numpy as np

from .adam import AdamConfig, AdamState, adam_step
from .bounds import Bounds, CountedObjective, SearchResult
from .de import DeConfig, de_search

logger = logging.getLogger(__name__)


class SmoothObjective(NamedTuple):
    value: Callable
    value_and_grad: Callable


def hybrid_evaluations(de_cfg: DeConfig, adam_cfg: AdamConfig) -> int:
    """Objective evaluations of one hybrid search: the DE generations plus Adam's steps and endpoint."""
    return de_cfg.population_size * (de_cfg.max_iterations + 1) + adam_cfg.steps + 1


def matched_adam(de_cfg: DeConfig, adam_cfg: AdamConfig) -> AdamConfig:
    """Adam settings whose search spends as many evaluations as the hybrid one."""
    return replace(adam_cfg, steps=hybrid_evaluations(de_cfg, adam_cfg) - 1)


def adam_search(objective: SmoothObjective, bounds: Bounds, cfg: AdamConfig, x0) -> SearchResult:
    """
    Projected Adam: clip into the box after every step. Returns the best
    iterate, the endpoint included.
    """
    counted = CountedObjective(objective.value_and_grad, with_grad=True)
    state = AdamState.from_config(len(x0), cfg)
    x = bounds.clip(x0)
    losses, gradient_norms = [], []

    for _ in range(cfg.steps):
        loss, grad = counted(x)
        losses.append(float(loss))
        gradient_norms.append(float(np.mean(np.abs(grad))))
        state, x = adam_step(state, x, grad)
        x = bounds.clip(x)

    loss, grad = counted(x)
    losses.append(float(loss))
    gradient_norms.append(float(np.mean(np.abs(grad))))

    return SearchResult(counted.best_x, counted.best_value, counted.calls,
                        counted.best_trace, losses, gradient_norms)


def hybrid_search(objective: SmoothObjective, bounds: Bounds, de_cfg: DeConfig,
                  adam_cfg: AdamConfig, x0) -> SearchResult:
    """
    DE, then Adam from the DE winner. The loss trace runs through both
    stages: the DE population best per generation, then Adam's iterates.
    """
    coarse = de_search(objective.value, bounds, de_cfg, x0)
    refined = adam_search(objective, bounds, adam_cfg, coarse.x)

    best = refined if refined.value < coarse.value else coarse
    logger.debug('Hybrid search: DE %.6g, Adam %.6g', coarse.value, refined.value)

    offset = coarse.best_trace[-1] if coarse.best_trace else np.inf
    best_trace = coarse.best_trace + [min(offset, v) for v in refined.best_trace]

    return SearchResult(best.x, best.value, coarse.evaluations + refined.evaluations,
                        best_trace, coarse.losses + refined.losses, refined.gradient_norms)
