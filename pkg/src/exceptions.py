from typing import Any, Dict, Optional


class ConfigError(ValueError):
    """Invalid or incomplete system configuration. ``field`` names the offending key."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DomainError(ValueError):
    """Arguments outside the validity domain of a closed-form model."""


class ScheduleInfeasibleError(ValueError):
    """The requested coupling ladder exceeds what the qubit can drive."""


class ConvergenceError(RuntimeError):
    """A numerical solver failed. ``diagnostics`` holds the last iterate and solver state."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MissingStageError(KeyError):
    """Report assembly was asked for results that were never produced."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing upstream stages: {', '.join(self.missing)}")

    def __str__(self) -> str:
        return self.args[0]
