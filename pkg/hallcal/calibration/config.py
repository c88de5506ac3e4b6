import zlib

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from hallcal.errors import DataError
from hallcal.search.adam import AdamConfig
from hallcal.search.bounds import Bounds
from hallcal.search.de import DeConfig
from hallcal.search.es import EsConfig

SEARCH_METHODS = ('hybrid', 'adam')


def component_seed(seed: int, name: str) -> int:
    """Independent, reproducible seed for the named component of a run."""
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(name.encode('utf-8'))])
    return int(sequence.generate_state(1)[0])


@dataclass(frozen=True)
class FeatureNoise:
    """
    Augmentation noise. Inputs move by `input_fraction` of their range
    (setpoints: setpoint_range, fan speeds: [0, 1], powers: rated power,
    flow rates: their own value); targets by `target_sd` degC.
    """
    input_fraction: float = 0.01
    target_sd: float = 0.1
    setpoint_range: Tuple[float, float] = (10.0, 30.0)


@dataclass(frozen=True)
class EarlyStop:
    patience: int = 3  # 0 disables
    min_delta: float = 0.01


@dataclass(frozen=True)
class CalibConfig:
    bounds: Bounds = field(default_factory=Bounds)
    max_iterations: int = 15
    augment_batch: int = 16
    noise: FeatureNoise = field(default_factory=FeatureNoise)
    search: str = 'hybrid'
    de: DeConfig = field(default_factory=DeConfig)
    adam: AdamConfig = field(default_factory=AdamConfig)
    early_stop: EarlyStop = field(default_factory=lambda: EarlyStop(patience=0))
    match_budget: bool = True  # adam-only search spends the hybrid's evaluation budget
    seed: int = 0
    initial_flow_rates: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DataError('max_iterations must be at least 1, got {}.'.format(self.max_iterations))

        if self.augment_batch < 0:
            raise DataError('augment_batch cannot be negative, got {}.'.format(self.augment_batch))

        if self.search not in SEARCH_METHODS:
            raise DataError('Unknown search "{}", expected one of {}.'.format(self.search, SEARCH_METHODS))

    def initial_guess(self, m: int) -> np.ndarray:
        if self.initial_flow_rates is None:
            return np.full(m, self.bounds.midpoint)

        return self.bounds.clip(self.initial_flow_rates)

    def de_for(self, iteration: int) -> DeConfig:
        return replace(self.de, seed=component_seed(self.seed, 'de-{}'.format(iteration)))

    @classmethod
    def from_conf(cls, conf: dict, seed: int = 0, max_iterations: int = None) -> 'CalibConfig':
        """Builds the engine configuration from a merged run configuration."""
        calibration = conf.get('calibration', {})
        bounds = calibration.get('bounds', {})
        early_stop = calibration.get('early_stop', {})

        return cls(
            bounds=Bounds(float(bounds.get('lower', 0.01)), float(bounds.get('upper', 3.0))),
            max_iterations=int(max_iterations or calibration.get('max_iterations', 15)),
            augment_batch=int(calibration.get('augment_batch', 16)),
            noise=FeatureNoise(
                float(calibration.get('input_noise', 0.01)),
                float(calibration.get('target_noise_sd', 0.1)),
                tuple(float(v) for v in calibration.get('setpoint_range', (10.0, 30.0))),
            ),
            search=calibration.get('search', 'hybrid'),
            match_budget=bool(calibration.get('match_budget', True)),
            de=DeConfig(**conf.get('de', {})),
            adam=AdamConfig(**conf.get('adam', {})),
            early_stop=EarlyStop(int(early_stop.get('patience', 0)), float(early_stop.get('min_delta', 0.01))),
            seed=int(seed),
        )


def heuristic_config(conf: dict, seed: int = 0, max_evals: int = None) -> EsConfig:
    heuristic = dict(conf.get('heuristic', {}))

    if max_evals is not None:
        heuristic['max_evals'] = max_evals

    return EsConfig(seed=component_seed(seed, 'heuristic'), **heuristic)
