"""Exception types shared across the simulator."""


class DomainError(ValueError):
    """Argument outside the supported domain of a kernel."""


class CoincidentPointsError(ValueError):
    """Two points closer than the minimum separation guard.

    ``indices`` names the offending pair when it is known.
    """

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class SceneValidationError(ValueError):
    """A scene failed validation; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SingularSystemError(ArithmeticError):
    """A linear system or 2x2 tensor is numerically singular.

    ``condition`` carries the 1-norm condition estimate when available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
