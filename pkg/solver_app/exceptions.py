from channel_app.exceptions import InputError, NumericalError


class InvalidProgram(InputError):
    pass


class NumericalFailure(NumericalError):
    """
    The solver claimed an optimum it cannot certify, or ran out of pivots.
    """
    pass


class InfeasiblePoint(NumericalError):
    """
    A candidate point violates a constraint (kind 'constraint') or a
    variable bound (kind 'bound') by more than the tolerance.
    """
    def __init__(self, kind, index, violation):
        super().__init__(f"{kind} {index} violated by {violation:.3e}")
        self.kind, self.index, self.violation = kind, index, violation
