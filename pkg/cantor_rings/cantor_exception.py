class CantorException(Exception):
    def __init__(self, message=None) -> None:
        self.message = message
        super().__init__(message)


class DomainError(CantorException):
    """Input outside the domain of an operation."""


class PoleError(CantorException):
    def __init__(self, message=None, pole=None) -> None:
        self.pole = pole
        super().__init__(message)


class ResolutionError(CantorException):
    """Sampling too coarse to decide; the caller should resample denser."""


class ConvergenceError(CantorException):
    def __init__(self, message=None, seed=None) -> None:
        self.seed = seed
        super().__init__(message)


class ScaleError(CantorException):
    """Polynomial coefficients left the double range."""


class NotBracketed(CantorException):
    pass


class EscapedError(CantorException):
    def __init__(self, message=None, step=0, symbols=()) -> None:
        self.step = step
        self.symbols = tuple(symbols)
        super().__init__(message)


class SpecError(CantorException):
    def __init__(self, message=None, field=None) -> None:
        self.field = field
        super().__init__(message)
