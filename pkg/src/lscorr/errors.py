"""Exception hierarchy shared by all lscorr modules."""


class LscorrError(Exception):
    """Base class for package errors."""


class ConfigurationError(LscorrError, ValueError):
    pass


class DomainError(LscorrError, ValueError):
    pass


class SymmetryViolation(ConfigurationError):
    def __init__(self, map_label, deviation):
        self.map_label = map_label
        self.deviation = float(deviation)
        super().__init__(
            f"symmetry map {map_label} violated: max |U(F(x)) - U(x)| = {deviation:.3e}"
        )


class SizingError(ConfigurationError):
    pass


class IntegrityError(LscorrError):
    pass


class ConvergenceError(LscorrError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DecompositionFailure(LscorrError):
    def __init__(self, message, eigenvalue=None, report=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.report = report or {}
