

class HallCalError(Exception):

    pass


class DataError(HallCalError):
    """
    Bad input: layouts, vectors, files. The CLI exits with code 2.
    """

    pass


class SolverError(HallCalError):
    """
    The thermal solver failed. The CLI exits with code 3.
    """

    pass


class DimensionMismatchError(DataError):

    ERRMSG = 'Expected {} to have length {}, got {}.'

    def __init__(self, what: str, expected: int, actual: int):
        super().__init__(self.ERRMSG.format(what, expected, actual))


class NonPositiveFlowRateError(DataError):

    ERRMSG = 'Flow rates must be strictly positive, server index {} has {}.'

    def __init__(self, index: int, value: float):
        super().__init__(self.ERRMSG.format(index, value))


def check_length(what: str, values, expected: int):
    if len(values) != expected:
        raise DimensionMismatchError(what, expected, len(values))
