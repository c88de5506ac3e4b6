import threading

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from hallcal.errors import DataError


class SearchError(DataError):

    pass


class ObjectiveNonFiniteError(SearchError):

    ERRMSG = 'The objective returned {} at {}.'


class InvalidBoundsError(SearchError):

    pass


@dataclass(frozen=True)
class Bounds:
    """Element-wise flow-rate bounds in cfm/W."""
    lower: float = 0.01
    upper: float = 3.0

    def __post_init__(self):
        if not 0 < self.lower < self.upper:
            raise InvalidBoundsError('Bounds need 0 < lower < upper, got [{}, {}].'.format(self.lower, self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return (self.lower + self.upper) / 2.0

    def clip(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= self.lower) & (x <= self.upper)))

    def full(self, value: float, dim: int) -> np.ndarray:
        return np.full(dim, float(value))


@dataclass
class SearchResult:
    x: np.ndarray
    value: float
    evaluations: int
    best_trace: List[float] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)
    gradient_norms: List[float] = field(default_factory=list)

    @property
    def mean_loss(self) -> float:
        return float(np.mean(self.losses)) if self.losses else float(self.value)

    @property
    def mean_gradient(self) -> float:
        return float(np.mean(self.gradient_norms)) if self.gradient_norms else 0.0


class CountedObjective:
    """
    Wraps an objective to count invocations, reject non finite values and
    keep the best-so-far trace in evaluation order.
    """

    def __init__(self, objective: Callable, with_grad: bool = False):
        self.objective = objective
        self.with_grad = with_grad
        self.calls = 0
        self.best_value = np.inf
        self.best_x = None
        self.best_trace = []
        self._lock = threading.Lock()

    def _check(self, x, value):
        if not np.isfinite(value):
            raise ObjectiveNonFiniteError(ObjectiveNonFiniteError.ERRMSG.format(value, x))

    def _record(self, x, value):
        with self._lock:
            self.calls += 1

            if value < self.best_value:
                self.best_value = float(value)
                self.best_x = np.array(x, dtype=float)

            self.best_trace.append(self.best_value)

    def __call__(self, x):
        result = self.objective(x)
        value = result[0] if self.with_grad else result
        self._check(x, value)
        self._record(x, value)
        return result

    def evaluate_many(self, xs, workers: int = 1) -> np.ndarray:
        """
        Evaluates candidates, concurrently if workers > 1; bookkeeping is done
        in candidate order so traces do not depend on scheduling.
        """
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(self.objective, xs))
        else:
            values = [self.objective(x) for x in xs]

        for x, value in zip(xs, values):
            self._check(x, value)
            self._record(x, value)

        return np.array(values, dtype=float)
