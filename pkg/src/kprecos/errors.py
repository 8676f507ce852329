"""Exception types shared across the package."""


class KPrecosError(Exception):
    """Base class for every error raised by kprecos."""


class DegenerateInputError(KPrecosError, ZeroDivisionError):
    """Division by an expression that is identically zero."""


class ChartMismatchError(KPrecosError, ValueError):
    """A coordinate or object does not belong to the chart in use."""


class CyclicBindingError(KPrecosError, ValueError):
    pass


class StructureError(KPrecosError, ValueError):
    """Input forms violate a structural requirement (closedness, independence, Reeb conditions)."""


class LegendreError(KPrecosError, ValueError):
    pass


class ModelError(KPrecosError, ValueError):
    """Malformed model file."""


class ParseError(KPrecosError, ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column
