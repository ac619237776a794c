"""Exception types shared across the package."""


class GridError(ValueError):
    """Invalid grid, mismatched grids, or an unresolvable frequency band."""


class DomainError(ValueError):
    """A state left the range where a change of variables is a diffeomorphism."""


class RangeError(ValueError):
    """An exponent or parameter is outside its admissible range."""


class FitError(RuntimeError):
    """A regression could not be performed on the requested window."""


class AlignmentError(ValueError):
    """Two trajectories do not share grids or time stamps."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending key path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ContractError(ValueError):
    """A callable argument violates its stated contract (e.g. f(0) != 0)."""


class EmptyFieldError(ValueError):
    """An operation that needs a nonzero field received the zero field."""


class BlowupDetected(RuntimeError):
    """NaN/Inf appeared during time stepping; carries the failure time."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        self.trajectory = None  # filled by the driver with the partial run
        super().__init__(message or f"non-finite state at t={time:.6g}")
