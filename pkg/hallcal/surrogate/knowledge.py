"""
Knowledge-based surrogate.

The cooling block mixes CRAC setpoints through a softmax over the CRACs
adjacent to each sensor, the heating block sums per-watt server loads
through the server adjacency, and a per-sensor affine layer on each block
carries the only trainable weights (a, b, c, d). Hot-aisle sensors read
cooling plus heating, cold-aisle sensors cooling only:

    T_k = a_k X_cold_k + b_k + e_k (c_k X_hot_k + d_k)

Every function here is pure; the DE population evaluates them in parallel.
"""
import logging

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from hallcal.errors import check_length
from hallcal.hall.adjacency import DEFAULT_CUT_THRESHOLD, AdjacencyPriors, build_adjacency
from hallcal.hall.layout import HallLayout, SensorVector, SystemInput
from hallcal.hall.units import RISE_CONSTANT
from hallcal.search.adam import AdamState, adam_step

from .base import (Batch, EmptyDatasetError, Surrogate, TrainHyper,
                   TrainingSample, as_prediction, single_batch, stack_samples)
from .penalty import PenaltyParams, penalty_h, penalty_h_grad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurrogateWeights:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        for name in ('a', 'b', 'c', 'd'):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

        if not len(self.a) == len(self.b) == len(self.c) == len(self.d):
            raise ValueError('Weights a, b, c and d must have the same length.')

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def initial(cls, n: int, rise_constant: float = RISE_CONSTANT) -> 'SurrogateWeights':
        """Untrained blocks: setpoint mix for cooling, first-principle rise for heating."""
        return cls(np.ones(n), np.zeros(n), np.full(n, rise_constant), np.zeros(n))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b, self.c, self.d])

    @classmethod
    def from_vector(cls, vector) -> 'SurrogateWeights':
        return cls(*np.split(np.asarray(vector, dtype=float), 4))


class ForwardCache(NamedTuple):
    coefficients: np.ndarray  # B x l x n
    x_cold: np.ndarray  # B x n
    loads: np.ndarray  # B x m, (P / p0) / alpha
    x_hot: np.ndarray  # B x n
    predictions: np.ndarray  # B x n


class TrainOutcome(NamedTuple):
    weights: SurrogateWeights
    priors: AdjacencyPriors
    losses: List[float]


def cooling_coefficients(fan_speeds: np.ndarray, w_cs: np.ndarray, support: np.ndarray) -> np.ndarray:
    """
    Softmax of V_i W_cs[i, k] over the CRACs i adjacent to sensor k; a sensor
    with no adjacent CRAC gets all-zero coefficients.
    """
    z = fan_speeds[:, :, None] * w_cs[None, :, :]
    mask = np.broadcast_to(support[None, :, :], z.shape)

    z_max = np.max(np.where(mask, z, -np.inf), axis=1, keepdims=True)
    z_max = np.where(np.isfinite(z_max), z_max, 0.0)

    weights = np.exp(np.where(mask, z - z_max, -np.inf))
    total = weights.sum(axis=1, keepdims=True)

    return np.divide(weights, total, out=np.zeros_like(weights), where=total > 0)


def forward_batch(w: SurrogateWeights, priors: AdjacencyPriors, batch: Batch) -> ForwardCache:
    check_length('setpoints', batch.setpoints[0], priors.l)
    check_length('powers', batch.powers[0], priors.m)
    check_length('targets', batch.targets[0], priors.n)

    coefficients = cooling_coefficients(batch.fan_speeds, priors.w_cs, priors.support)
    x_cold = np.einsum('bi,bik->bk', batch.setpoints, coefficients)

    loads = (batch.powers / priors.power_scale) / batch.flow_rates
    x_hot = loads @ priors.w_ss

    predictions = (w.a * x_cold + w.b) + priors.e * (w.c * x_hot + w.d)

    return ForwardCache(coefficients, x_cold, loads, x_hot, predictions)


def forward(w: SurrogateWeights, priors: AdjacencyPriors, x: SystemInput) -> SensorVector:
    return as_prediction(forward_batch(w, priors, single_batch(x, n=priors.n)).predictions[0])


def _residual_grad(cache: ForwardCache, batch: Batch) -> np.ndarray:
    """dL1/dT for every sample and sensor."""
    residuals = cache.predictions - batch.targets
    return 2.0 * residuals / residuals.size


def loss_l1(w: SurrogateWeights, priors: AdjacencyPriors, samples: Sequence[TrainingSample]) -> float:
    batch = stack_samples(samples)
    return float(np.mean((forward_batch(w, priors, batch).predictions - batch.targets) ** 2))


def _weights_grad(w: SurrogateWeights, priors: AdjacencyPriors, cache: ForwardCache, g: np.ndarray):
    return SurrogateWeights(
        np.sum(g * cache.x_cold, axis=0),
        np.sum(g, axis=0),
        np.sum(g * priors.e * cache.x_hot, axis=0),
        np.sum(g * priors.e, axis=0),
    )


def grad_weights(w: SurrogateWeights, priors: AdjacencyPriors,
                 samples: Sequence[TrainingSample]) -> SurrogateWeights:
    batch = stack_samples(samples)
    cache = forward_batch(w, priors, batch)
    return _weights_grad(w, priors, cache, _residual_grad(cache, batch))


def _adjacency_grad(w: SurrogateWeights, priors: AdjacencyPriors, batch: Batch,
                    cache: ForwardCache, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    spread = batch.setpoints[:, :, None] - cache.x_cold[:, None, :]
    d_w_cs = np.einsum('bi,bik,bk->ik', batch.fan_speeds, cache.coefficients * spread, g * w.a)
    d_w_ss = cache.loads.T @ (g * priors.e * w.c)

    return np.where(priors.support, d_w_cs, 0.0), np.where(priors.w_ss != 0, d_w_ss, 0.0)


def grad_adjacency(w: SurrogateWeights, priors: AdjacencyPriors,
                   samples: Sequence[TrainingSample]) -> Tuple[np.ndarray, np.ndarray]:
    """dL1/dW_cs and dL1/dW_ss on the prior's sparsity pattern."""
    batch = stack_samples(samples)
    cache = forward_batch(w, priors, batch)
    return _adjacency_grad(w, priors, batch, cache, _residual_grad(cache, batch))


def l2_and_grad_alpha(w: SurrogateWeights, priors: AdjacencyPriors, x: SystemInput,
                      measured, params: PenaltyParams) -> Tuple[float, np.ndarray]:
    """
    L2 = mean squared sensor error + (lambda / n) h(alpha), and its gradient
    in alpha with the weights frozen.
    """
    measured = np.asarray(measured, dtype=float)
    batch = single_batch(x, measured)
    cache = forward_batch(w, priors, batch)

    residuals = cache.predictions[0] - measured
    n = len(residuals)
    scale = params.regularization / n

    value = float(np.mean(residuals ** 2)) + scale * penalty_h(x.flow_rates, x.powers, params)

    g = 2.0 * residuals / n
    load_slope = -(x.powers / priors.power_scale) / x.flow_rates ** 2
    grad = load_slope * (priors.w_ss @ (priors.e * w.c * g))
    grad = grad + scale * penalty_h_grad(x.flow_rates, x.powers, params)

    return value, grad


def loss_l2(w: SurrogateWeights, priors: AdjacencyPriors, x: SystemInput, measured,
            params: PenaltyParams) -> float:
    return l2_and_grad_alpha(w, priors, x, measured, params)[0]


def grad_alpha(w: SurrogateWeights, priors: AdjacencyPriors, x: SystemInput, measured,
               params: PenaltyParams) -> np.ndarray:
    return l2_and_grad_alpha(w, priors, x, measured, params)[1]


class _Packing:
    """Flat parameter vector of the weights and, optionally, the adjacency support entries."""

    def __init__(self, priors: AdjacencyPriors, trainable_adjacency: bool):
        self.priors = priors
        self.trainable_adjacency = trainable_adjacency
        self.cs_mask = priors.support
        self.ss_mask = priors.w_ss != 0

    @property
    def size(self) -> int:
        extra = self.cs_mask.sum() + self.ss_mask.sum() if self.trainable_adjacency else 0
        return 4 * self.priors.n + int(extra)

    def pack(self, w: SurrogateWeights, priors: AdjacencyPriors) -> np.ndarray:
        parts = [w.as_vector()]

        if self.trainable_adjacency:
            parts += [priors.w_cs[self.cs_mask], priors.w_ss[self.ss_mask]]

        return np.concatenate(parts)

    def unpack(self, theta: np.ndarray) -> Tuple[SurrogateWeights, AdjacencyPriors]:
        n4 = 4 * self.priors.n
        w = SurrogateWeights.from_vector(theta[:n4])

        if not self.trainable_adjacency:
            return w, self.priors

        n_cs = int(self.cs_mask.sum())
        w_cs = np.zeros(self.cs_mask.shape)
        w_ss = np.zeros(self.ss_mask.shape)
        w_cs[self.cs_mask] = theta[n4:n4 + n_cs]
        w_ss[self.ss_mask] = theta[n4 + n_cs:]

        return w, self.priors.with_matrices(w_cs, w_ss)


def train(w0: SurrogateWeights, priors: AdjacencyPriors, samples: Sequence[TrainingSample],
          hyper: TrainHyper = TrainHyper(), trainable_adjacency: bool = False) -> TrainOutcome:
    """
    Full-batch Adam on L1 for `hyper.epochs` steps. Returns the weights with
    the lowest L1 seen, the starting point included.
    """
    if not samples:
        raise EmptyDatasetError(EmptyDatasetError.ERRMSG)

    batch = stack_samples(samples)
    packing = _Packing(priors, trainable_adjacency)
    theta = packing.pack(w0, priors)
    state = AdamState.initial(len(theta), hyper.learning_rate)

    best_loss, best_theta = np.inf, theta
    losses = []

    for epoch in range(hyper.epochs + 1):
        w, current = packing.unpack(theta)
        cache = forward_batch(w, current, batch)
        loss = float(np.mean((cache.predictions - batch.targets) ** 2))
        losses.append(loss)

        if loss < best_loss:
            best_loss, best_theta = loss, theta

        if epoch == hyper.epochs:
            break

        g = _residual_grad(cache, batch)
        grads = [_weights_grad(w, current, cache, g).as_vector()]

        if trainable_adjacency:
            d_w_cs, d_w_ss = _adjacency_grad(w, current, batch, cache, g)
            grads += [d_w_cs[packing.cs_mask], d_w_ss[packing.ss_mask]]

        state, theta = adam_step(state.with_learning_rate(hyper.learning_rate_at(epoch)),
                                 theta, np.concatenate(grads))

    logger.debug('Trained on %d samples: L1 %.4g -> %.4g (best %.4g)',
                 batch.size, losses[0], losses[-1], best_loss)

    weights, trained = packing.unpack(best_theta)
    return TrainOutcome(weights, trained, losses)


class KnowledgeSurrogate(Surrogate):

    def __init__(self, priors: AdjacencyPriors, penalty: PenaltyParams = None, hyper: TrainHyper = None,
                 trainable_adjacency: bool = False, weights: SurrogateWeights = None):
        self.penalty = penalty or PenaltyParams()
        self.hyper = hyper or TrainHyper()
        self.trainable_adjacency = trainable_adjacency
        self.initial_priors = priors
        self.priors = priors
        self.weights = weights or SurrogateWeights.initial(priors.n, self.penalty.rise_constant)
        self._packing = _Packing(priors, trainable_adjacency)

    @property
    def parameter_count(self) -> int:
        return self._packing.size

    def fit(self, samples: Sequence[TrainingSample]) -> List[float]:
        outcome = train(self.weights, self.priors, samples, self.hyper, self.trainable_adjacency)
        self.weights, self.priors = outcome.weights, outcome.priors
        return outcome.losses

    def predict(self, x: SystemInput) -> SensorVector:
        return forward(self.weights, self.priors, x)

    def loss_l1(self, samples: Sequence[TrainingSample]) -> float:
        return loss_l1(self.weights, self.priors, samples)

    def l2_and_grad(self, x: SystemInput, measured) -> Tuple[float, np.ndarray]:
        return l2_and_grad_alpha(self.weights, self.priors, x, measured, self.penalty)

    def snapshot(self) -> np.ndarray:
        return self._packing.pack(self.weights, self.priors)

    def restore(self, snapshot: np.ndarray):
        if len(snapshot) != self._packing.size:
            raise ValueError('Expected {} weights, got {}.'.format(self._packing.size, len(snapshot)))

        self.weights, self.priors = self._packing.unpack(np.asarray(snapshot, dtype=float))


class KnowledgeSurrogateFactory:

    def build(self, layout: HallLayout, adjacency: dict = None, penalty: dict = None, training: dict = None,
              trainable_adjacency: bool = False) -> KnowledgeSurrogate:
        adjacency = adjacency or {}
        priors = build_adjacency(
            layout,
            cut_threshold=adjacency.get('cut_threshold', DEFAULT_CUT_THRESHOLD),
            metric=adjacency.get('metric', 'euclidean'),
            power_scale=adjacency.get('power_scale'),
        )

        return KnowledgeSurrogate(priors, PenaltyParams(**(penalty or {})), TrainHyper(**(training or {})),
                                  trainable_adjacency)
