from typing import Any, List, Optional


class ICRegimeError(Exception):
    """Root of every error raised by the toolkit."""


class ModelValidationError(ICRegimeError, ValueError):
    def __init__(self, report: List[str]):
        self.report = list(report)
        super().__init__("; ".join(self.report))


class SchemaError(ICRegimeError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class RegimeError(ICRegimeError, ValueError):
    pass


class SizeCapError(ICRegimeError, ValueError):
    pass


class GridOverflowError(SizeCapError):
    def __init__(self, projected: int, cap: int):
        self.projected = projected
        self.cap = cap
        super().__init__(f"grid of {projected} points exceeds cap {cap}")


class ConvergenceError(ICRegimeError):
    def __init__(self, message: str, last_iterate: Optional[Any] = None, last_value: Optional[float] = None):
        self.last_iterate = last_iterate
        self.last_value = last_value
        super().__init__(message)


class NumericError(ICRegimeError):
    pass


class ArgumentError(ICRegimeError, ValueError):
    """A caller-supplied argument the operation does not accept."""
