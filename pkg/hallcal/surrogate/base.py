"""
What every surrogate offers the calibration loop, plus the batch and training
hyperparameter records they share.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from hallcal.errors import DataError, NonPositiveFlowRateError
from hallcal.hall.layout import SensorRole, SensorVector, SystemInput


class EmptyBatchError(DataError):

    ERRMSG = 'Cannot evaluate a loss over an empty batch.'


class EmptyDatasetError(DataError):

    ERRMSG = 'Cannot train a surrogate on an empty dataset.'


@dataclass(frozen=True)
class TrainingSample:
    input: SystemInput
    target: SensorVector


@dataclass(frozen=True)
class TrainHyper:
    epochs: int = 150
    learning_rate: float = 0.1
    decay: float = 0.8
    decay_every: int = 50

    def learning_rate_at(self, epoch: int) -> float:
        return self.learning_rate * self.decay ** (epoch // self.decay_every)


class Batch(NamedTuple):
    """Samples stacked along axis 0."""
    setpoints: np.ndarray  # B x l
    fan_speeds: np.ndarray  # B x l
    powers: np.ndarray  # B x m
    flow_rates: np.ndarray  # B x m
    targets: np.ndarray  # B x n

    @property
    def size(self) -> int:
        return self.setpoints.shape[0]

    def inputs(self) -> np.ndarray:
        return np.hstack([self.setpoints, self.fan_speeds, self.powers, self.flow_rates])


def check_flow_rates(flow_rates: np.ndarray):
    bad = np.flatnonzero(~(np.asarray(flow_rates) > 0))

    if len(bad):
        index = np.unravel_index(bad[0], np.shape(flow_rates))[-1]
        raise NonPositiveFlowRateError(int(index), float(np.ravel(flow_rates)[bad[0]]))


def stack_samples(samples: Sequence[TrainingSample]) -> Batch:
    if not samples:
        raise EmptyBatchError(EmptyBatchError.ERRMSG)

    batch = Batch(
        np.array([s.input.setpoints for s in samples]),
        np.array([s.input.fan_speeds for s in samples]),
        np.array([s.input.powers for s in samples]),
        np.array([s.input.flow_rates for s in samples]),
        np.array([s.target.values for s in samples]),
    )
    check_flow_rates(batch.flow_rates)

    return batch


def single_batch(x: SystemInput, target=None, n: int = 0) -> Batch:
    targets = np.zeros(n) if target is None else np.asarray(target, dtype=float)
    check_flow_rates(x.flow_rates)

    return Batch(x.setpoints[None, :], x.fan_speeds[None, :], x.powers[None, :],
                 x.flow_rates[None, :], targets[None, :])


def as_prediction(values: np.ndarray) -> SensorVector:
    return SensorVector(values, SensorRole.SURROGATE)


class Surrogate(ABC):
    """
    A differentiable stand-in for the solver. `fit` warm-starts from the
    current weights and keeps the lowest training loss it sees.
    """

    @property
    @abstractmethod
    def parameter_count(self) -> int:
        raise NotImplementedError()

    @abstractmethod
    def fit(self, samples: Sequence[TrainingSample]) -> List[float]:
        raise NotImplementedError()

    @abstractmethod
    def predict(self, x: SystemInput) -> SensorVector:
        raise NotImplementedError()

    @abstractmethod
    def loss_l1(self, samples: Sequence[TrainingSample]) -> float:
        raise NotImplementedError()

    @abstractmethod
    def l2_and_grad(self, x: SystemInput, measured) -> Tuple[float, np.ndarray]:
        raise NotImplementedError()

    @abstractmethod
    def snapshot(self) -> np.ndarray:
        raise NotImplementedError()

    @abstractmethod
    def restore(self, snapshot: np.ndarray):
        raise NotImplementedError()

    def l2(self, x: SystemInput, measured) -> float:
        return self.l2_and_grad(x, measured)[0]

    def predict_error(self, samples: Sequence[TrainingSample]) -> float:
        """Mean absolute error over every sensor of every sample."""
        if not samples:
            raise EmptyBatchError(EmptyBatchError.ERRMSG)

        return float(np.mean([np.abs(self.predict(s.input).values - s.target.values) for s in samples]))

    def save_weights(self, path: str):
        np.savetxt(path, self.snapshot(), fmt='%.17g')

    def load_weights(self, path: str):
        self.restore(np.atleast_1d(np.loadtxt(path, dtype=float)))
