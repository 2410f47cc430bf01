class OneshotError(Exception):
    """
    Base class for every error raised by the oneshot apps.
    `exit_code` is the process exit status the CLI reports for it.
    """
    exit_code = 1


class InputError(OneshotError):
    """
    Invalid input: malformed files, out-of-range parameters, exceeded size caps.
    """
    exit_code = 1


class NumericalError(OneshotError):
    """
    A computation could not certify its own result.
    """
    exit_code = 2


class MalformedMatrix(InputError):
    pass


class NegativeEntry(InputError):
    def __init__(self, x, y, value):
        super().__init__(f"W({y}|{x}) = {value} is negative")
        self.x, self.y, self.value = x, y, value


class RowSumViolation(InputError):
    def __init__(self, x, total):
        super().__init__(f"row {x} sums to {total!r}, not 1")
        self.x, self.total = x, total


class OutOfRange(InputError):
    pass


class SizeCapExceeded(InputError):
    def __init__(self, what, size, cap):
        super().__init__(f"{what} needs size {size}, above the cap {cap}")
        self.size, self.cap = size, cap


class InvalidSetSystem(InputError):
    pass
