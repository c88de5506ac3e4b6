import threading

from abc import ABC, abstractmethod

import numpy as np

from hallcal.errors import SolverError
from hallcal.hall.layout import HallLayout, SensorRole, SensorVector, SystemInput


class InvalidInputError(SolverError):

    pass


class NoConvergenceError(SolverError):

    pass


class Solver(ABC):
    """
    The expensive thermal model, seen as an opaque oracle mapping a
    SystemInput to the n sensor temperatures. `calls` counts every
    invocation, failed ones included.
    """

    def __init__(self, layout: HallLayout):
        self.layout = layout
        self.calls = 0
        self._calls_lock = threading.Lock()

    def solve(self, x: SystemInput) -> SensorVector:
        with self._calls_lock:
            self.calls += 1

        x.check(self.layout)
        values = self._solve(x)

        return SensorVector(values, SensorRole.SOLVER, [s.id for s in self.layout.sensors])

    @abstractmethod
    def _solve(self, x: SystemInput) -> np.ndarray:
        raise NotImplementedError()
