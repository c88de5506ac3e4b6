from dataclasses import dataclass, replace

import numpy as np

from hallcal.errors import check_length


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.01
    steps: int = 200
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    learning_rate: float = 0.01

    @classmethod
    def initial(cls, size: int, learning_rate: float = 0.01, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> 'AdamState':
        return cls(np.zeros(size), np.zeros(size), 0, beta1, beta2, eps, learning_rate)

    @classmethod
    def from_config(cls, size: int, cfg: AdamConfig) -> 'AdamState':
        return cls.initial(size, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)

    def with_learning_rate(self, learning_rate: float) -> 'AdamState':
        return replace(self, learning_rate=learning_rate)


def adam_step(state: AdamState, params, grad):
    """
    One bias-corrected Adam update. Returns (new state, new params); the
    inputs are left untouched.
    """
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    check_length('params', params, len(state.first_moment))
    check_length('grad', grad, len(state.first_moment))

    step = state.step + 1
    first = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    second = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad * grad

    first_hat = first / (1.0 - state.beta1 ** step)
    second_hat = second / (1.0 - state.beta2 ** step)

    new_params = params - state.learning_rate * first_hat / (np.sqrt(second_hat) + state.eps)

    return replace(state, first_moment=first, second_moment=second, step=step), new_params
