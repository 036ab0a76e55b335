from typing import Any, Dict, Optional, Sequence


class DispersionError(Exception):
    """Base class for errors raised while computing dispersion relations."""

    def payload(self) -> Dict[str, Any]:
        """Machine-readable diagnostics, printed by the CLI on failure."""
        return {"error": type(self).__name__, "message": str(self)}


class InvalidArgumentError(DispersionError, ValueError):
    """Exception raised if an argument is outside its documented domain."""
    pass


class SchemaError(DispersionError, ValueError):
    """Exception raised if a file or configuration violates its schema."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def payload(self) -> Dict[str, Any]:
        return {**super().payload(), "field": self.field}


class CriticalLayerError(DispersionError):
    """Exception raised if the phase velocity falls inside the essential range."""

    def __init__(self, message: str, c: complex, z: float, index: int):
        super().__init__(message)
        self.c = c
        self.z = z
        self.index = index

    def payload(self) -> Dict[str, Any]:
        return {
            **super().payload(),
            "c": float(getattr(self.c, "real", self.c)),
            "z": float(self.z),
            "index": int(self.index),
        }


class NoPropagatingModeError(DispersionError):
    """Exception raised if no eigenvalue qualifies as the propagating branch."""
    pass


class SolverError(DispersionError):
    """Exception raised if the dense eigensolver backend fails."""
    pass


class ContinuationBreakdownError(DispersionError):
    """Exception raised if path-following cannot continue past parameter t."""

    def __init__(self, message: str, t: float, rcond: Optional[float] = None, partial: Any = None):
        super().__init__(message)
        self.t = t
        self.rcond = rcond
        self.partial = partial

    def payload(self) -> Dict[str, Any]:
        body = {**super().payload(), "t": float(self.t)}
        if self.rcond is not None:
            body["rcond"] = float(self.rcond)
        if self.partial is not None:
            body["accepted_points"] = int(len(self.partial.t))
        return body


class BudgetExceededError(DispersionError):
    """Exception raised if an integration exceeds its step budget."""

    def __init__(self, message: str, max_steps: int, partial: Any = None):
        super().__init__(message)
        self.max_steps = max_steps
        self.partial = partial

    def payload(self) -> Dict[str, Any]:
        return {**super().payload(), "max_steps": int(self.max_steps)}


class OutOfRangeError(DispersionError, ValueError):
    """Exception raised if a query lies outside the span of a stored solution."""
    pass


class InvalidSeedError(DispersionError):
    """Exception raised if a seed record does not match the target operator or profile."""
    pass


class StaleSeedError(DispersionError):
    """Exception raised if a seed record fails the pencil residual check."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual

    def payload(self) -> Dict[str, Any]:
        return {**super().payload(), "residual": float(self.residual)}


class DegenerateEigenvalueError(DispersionError):
    """Exception raised if a condition number is undefined for the eigenpair."""
    pass


class PartialFieldError(DispersionError):
    """Exception raised if some radial slices of a polar field failed."""

    def __init__(self, message: str, failed_angles: Sequence[float]):
        super().__init__(message)
        self.failed_angles = list(failed_angles)

    def payload(self) -> Dict[str, Any]:
        return {**super().payload(), "failed_angles": [float(a) for a in self.failed_angles]}
