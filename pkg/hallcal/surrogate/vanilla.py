"""
Black-box baseline: a fully connected ReLU network from the flattened input
(T_c, V, P, alpha) to the sensor temperatures. Inputs are standardized with
statistics of the first training set.
"""
import logging

from dataclasses import dataclass, replace
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from hallcal.errors import check_length
from hallcal.hall.layout import HallLayout, SensorVector, SystemInput
from hallcal.search.adam import AdamState, adam_step

from .base import (EmptyDatasetError, Surrogate, TrainHyper, TrainingSample,
                   as_prediction, check_flow_rates, stack_samples)
from .penalty import PenaltyParams, penalty_h, penalty_h_grad

logger = logging.getLogger(__name__)

HIDDEN_LAYERS = (518, 128, 32)

VANILLA_HYPER = TrainHyper(epochs=300, learning_rate=1e-3, decay=0.8, decay_every=50)


@dataclass(frozen=True)
class MlpWeights:
    weights: Tuple[np.ndarray, ...]  # fan_in x fan_out
    biases: Tuple[np.ndarray, ...]
    x_mean: np.ndarray
    x_scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'weights', tuple(np.array(w, dtype=float) for w in self.weights))
        object.__setattr__(self, 'biases', tuple(np.array(b, dtype=float) for b in self.biases))

        for previous, current in zip(self.weights, self.weights[1:]):
            if previous.shape[1] != current.shape[0]:
                raise ValueError('Layer shapes {} and {} do not chain.'.format(previous.shape, current.shape))

        for w, b in zip(self.weights, self.biases):
            check_length('bias', b, w.shape[1])

        check_length('x_mean', self.x_mean, self.input_size)
        check_length('x_scale', self.x_scale, self.input_size)

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    @classmethod
    def initial(cls, input_size: int, output_size: int, seed: int = 0,
                hidden: Sequence[int] = HIDDEN_LAYERS) -> 'MlpWeights':
        """Uniform in +-1/sqrt(fan_in), identity standardization."""
        rng = np.random.default_rng(seed)
        sizes = [input_size] + list(hidden) + [output_size]
        weights, biases = [], []

        for fan_in, fan_out in zip(sizes, sizes[1:]):
            limit = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
            biases.append(rng.uniform(-limit, limit, fan_out))

        return cls(weights, biases, np.zeros(input_size), np.ones(input_size))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([p.ravel() for pair in zip(self.weights, self.biases) for p in pair])

    def with_vector(self, vector) -> 'MlpWeights':
        vector = np.asarray(vector, dtype=float)
        check_length('weight vector', vector, self.parameter_count)
        weights, biases, offset = [], [], 0

        for w, b in zip(self.weights, self.biases):
            weights.append(vector[offset:offset + w.size].reshape(w.shape))
            offset += w.size
            biases.append(vector[offset:offset + b.size])
            offset += b.size

        return replace(self, weights=tuple(weights), biases=tuple(biases))


class MlpCache(NamedTuple):
    activations: List[np.ndarray]  # layer inputs, standardized input first
    preactivations: List[np.ndarray]
    outputs: np.ndarray


class MlpTrainOutcome(NamedTuple):
    weights: MlpWeights
    losses: List[float]


def standardization(inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scale = inputs.std(axis=0)
    return inputs.mean(axis=0), np.where(scale > 0, scale, 1.0)


def mlp_forward_batch(w: MlpWeights, inputs: np.ndarray) -> MlpCache:
    check_length('input vector', inputs[0], w.input_size)
    activation = (inputs - w.x_mean) / w.x_scale
    activations, preactivations = [activation], []

    for i, (weight, bias) in enumerate(zip(w.weights, w.biases)):
        preactivation = activation @ weight + bias
        preactivations.append(preactivation)

        if i < len(w.weights) - 1:
            activation = np.maximum(preactivation, 0.0)
            activations.append(activation)

    return MlpCache(activations, preactivations, preactivations[-1])


def mlp_backward(w: MlpWeights, cache: MlpCache, d_outputs: np.ndarray):
    """Returns (flat weight gradient, gradient in the raw inputs)."""
    grads = []
    delta = d_outputs

    for i in reversed(range(len(w.weights))):
        grads.append(delta.sum(axis=0))
        grads.append((cache.activations[i].T @ delta).ravel())
        delta = delta @ w.weights[i].T

        if i > 0:
            delta = delta * (cache.preactivations[i - 1] > 0)

    return np.concatenate(grads[::-1]), delta / w.x_scale


def mlp_forward(w: MlpWeights, x: SystemInput) -> SensorVector:
    check_flow_rates(x.flow_rates)
    return as_prediction(mlp_forward_batch(w, x.as_vector()[None, :]).outputs[0])


def mlp_loss_l1(w: MlpWeights, samples: Sequence[TrainingSample]) -> float:
    batch = stack_samples(samples)
    return float(np.mean((mlp_forward_batch(w, batch.inputs()).outputs - batch.targets) ** 2))


def mlp_grad_weights(w: MlpWeights, samples: Sequence[TrainingSample]) -> np.ndarray:
    batch = stack_samples(samples)
    cache = mlp_forward_batch(w, batch.inputs())
    residuals = cache.outputs - batch.targets
    return mlp_backward(w, cache, 2.0 * residuals / residuals.size)[0]


def mlp_l2_and_grad_alpha(w: MlpWeights, x: SystemInput, measured,
                          params: PenaltyParams) -> Tuple[float, np.ndarray]:
    measured = np.asarray(measured, dtype=float)
    check_flow_rates(x.flow_rates)
    check_length('measured', measured, w.output_size)
    cache = mlp_forward_batch(w, x.as_vector()[None, :])

    residuals = cache.outputs[0] - measured
    n = len(residuals)
    scale = params.regularization / n

    value = float(np.mean(residuals ** 2)) + scale * penalty_h(x.flow_rates, x.powers, params)
    d_inputs = mlp_backward(w, cache, (2.0 * residuals / n)[None, :])[1][0]
    grad = d_inputs[-x.m:] + scale * penalty_h_grad(x.flow_rates, x.powers, params)

    return value, grad


def mlp_train(w0: MlpWeights, samples: Sequence[TrainingSample], hyper: TrainHyper = VANILLA_HYPER) -> MlpTrainOutcome:
    if not samples:
        raise EmptyDatasetError(EmptyDatasetError.ERRMSG)

    batch = stack_samples(samples)
    inputs = batch.inputs()
    theta = w0.as_vector()
    state = AdamState.initial(len(theta), hyper.learning_rate)

    best_loss, best_theta = np.inf, theta
    losses = []

    for epoch in range(hyper.epochs + 1):
        w = w0.with_vector(theta)
        cache = mlp_forward_batch(w, inputs)
        residuals = cache.outputs - batch.targets
        loss = float(np.mean(residuals ** 2))
        losses.append(loss)

        if loss < best_loss:
            best_loss, best_theta = loss, theta

        if epoch == hyper.epochs:
            break

        grad = mlp_backward(w, cache, 2.0 * residuals / residuals.size)[0]
        state, theta = adam_step(state.with_learning_rate(hyper.learning_rate_at(epoch)), theta, grad)

    logger.debug('MLP trained on %d samples: L1 %.4g -> %.4g (best %.4g)',
                 batch.size, losses[0], losses[-1], best_loss)

    return MlpTrainOutcome(w0.with_vector(best_theta), losses)


class VanillaSurrogate(Surrogate):

    def __init__(self, input_size: int, output_size: int, penalty: PenaltyParams = None,
                 hyper: TrainHyper = None, seed: int = 0, weights: MlpWeights = None):
        self.penalty = penalty or PenaltyParams()
        self.hyper = hyper or VANILLA_HYPER
        self.weights = weights or MlpWeights.initial(input_size, output_size, seed)
        self.fitted = weights is not None

    @property
    def parameter_count(self) -> int:
        return self.weights.parameter_count

    def fit(self, samples: Sequence[TrainingSample]) -> List[float]:
        if not samples:
            raise EmptyDatasetError(EmptyDatasetError.ERRMSG)

        if not self.fitted:
            batch = stack_samples(samples)
            x_mean, x_scale = standardization(batch.inputs())
            biases = self.weights.biases[:-1] + (batch.targets.mean(axis=0),)
            self.weights = replace(self.weights, biases=biases, x_mean=x_mean, x_scale=x_scale)
            self.fitted = True

        outcome = mlp_train(self.weights, samples, self.hyper)
        self.weights = outcome.weights
        return outcome.losses

    def predict(self, x: SystemInput) -> SensorVector:
        return mlp_forward(self.weights, x)

    def loss_l1(self, samples: Sequence[TrainingSample]) -> float:
        return mlp_loss_l1(self.weights, samples)

    def l2_and_grad(self, x: SystemInput, measured) -> Tuple[float, np.ndarray]:
        return mlp_l2_and_grad_alpha(self.weights, x, measured, self.penalty)

    def snapshot(self) -> np.ndarray:
        return np.concatenate([self.weights.x_mean, self.weights.x_scale, self.weights.as_vector()])

    def restore(self, snapshot: np.ndarray):
        size = self.weights.input_size
        check_length('snapshot', snapshot, 2 * size + self.weights.parameter_count)
        self.weights = replace(self.weights.with_vector(snapshot[2 * size:]),
                               x_mean=snapshot[:size], x_scale=snapshot[size:2 * size])
        self.fitted = True


class VanillaSurrogateFactory:

    def build(self, layout: HallLayout, penalty: dict = None, training: dict = None,
              seed: int = 0) -> VanillaSurrogate:
        hyper = replace(VANILLA_HYPER, **(training or {}))
        return VanillaSurrogate(2 * layout.l + 2 * layout.m, layout.n, PenaltyParams(**(penalty or {})),
                                hyper, int(seed))
