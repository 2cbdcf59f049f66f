"""Exception types shared across the package."""


class IrsNavError(Exception):
    """Base class for all package errors."""


class ConfigError(IrsNavError):
    """Scenario configuration violates the schema.

    ``field`` names the offending key using dotted notation.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutOfRegionError(IrsNavError, ValueError):
    """A point or index falls outside the grid."""


class InfeasibleLocationError(IrsNavError, ValueError):
    """A location lies inside an obstacle footprint."""


class DomainError(IrsNavError, ValueError):
    pass


class ShapeError(IrsNavError, ValueError):
    pass


class ParseError(IrsNavError):
    """Malformed map or path file; carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class InfeasibleEndpointError(IrsNavError):
    """Start or goal cell is not a vertex of the planning graph."""

    reason = "endpoint_infeasible"

    def __init__(self, which: str, cell: tuple[int, int]):
        self.which = which
        self.cell = cell
        super().__init__(f"{which} cell {cell} is not feasible")


class NoPathError(IrsNavError):
    """Start and goal are feasible but disconnected."""

    reason = "no_path"


class StaleMapWarning(UserWarning):
    """Imported map fingerprint does not match the scenario in use."""
