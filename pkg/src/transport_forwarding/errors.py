"""Exception types shared across the package."""

__all__ = ["ConfigError", "NumericalError", "CFLError", "HistoryGapError"]


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


class NumericalError(Exception):
    """A run failed numerically; carries the offending time when known."""

    def __init__(self, message: str, t: float | None = None):
        if t is not None:
            message = f"{message} (at t = {t:.6g})"
        super().__init__(message)
        self.t = t


class CFLError(NumericalError):
    """Explicit-scheme stability constraint violated."""


class HistoryGapError(NumericalError):
    """A boundary-trace query fell outside the recorded history window."""
