from channel_app.exceptions import InputError


class IndexOutOfRange(InputError):
    pass


class EnumerationCapExceeded(InputError):
    def __init__(self, count, cap):
        super().__init__(f"exact search needs {count} subsets, above the cap {cap}")
        self.count, self.cap = count, cap


class StochasticityViolation(InputError):
    pass


class EmptySet(InputError):
    pass


class KExceedsInputAlphabet(InputError):
    def __init__(self, k, x_size):
        super().__init__(f"k = {k} must lie in [1, |X| = {x_size}]")
        self.k, self.x_size = k, x_size


class InvalidSolution(InputError):
    pass


class InvalidBox(InputError):
    pass


class InvalidDistribution(InputError):
    pass


class DegenerateDistribution(InputError):
    pass
