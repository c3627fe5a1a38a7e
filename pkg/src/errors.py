"""
Exception hierarchy shared by the simulation library and the CLI.
The CLI maps ArgumentError to a usage exit status; report-only
operations never raise on violations.
"""


class SimulationError(Exception):
    """Base class for all library errors."""


class ArgumentError(SimulationError, ValueError):
    """A precondition of an operation was violated."""


class CatalogError(ArgumentError, KeyError):
    """Unknown preset or base name."""

    def __init__(self, name: str, valid: list):
        self.name = name
        self.valid = sorted(valid)
        super().__init__(
            f"Unknown name '{name}'. Valid names: {', '.join(self.valid)}"
        )

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the readable message
        return self.args[0]


class UnsupportedDimensionError(ArgumentError):
    """Quadrature-based routine called with more dimensions than it supports."""


class ResourceError(SimulationError):
    """Requested work exceeds a configured or hard limit."""


class ConfigError(ArgumentError):
    """Invalid configuration document."""
