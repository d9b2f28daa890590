"""Exception hierarchy shared across the package."""


class NullGeoError(Exception):
    """Base class for all package errors."""


class ExprError(NullGeoError):
    """Base class for expression parsing/evaluation errors."""


class ExprSyntaxError(ExprError):
    """Malformed expression text.  ``position`` is a 1-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class UnknownSymbolError(ExprError):
    """Identifier that is neither a declared coordinate nor parameter."""

    def __init__(self, symbol: str, position: int):
        super().__init__(f"unknown symbol '{symbol}' (offset {position})")
        self.symbol = symbol
        self.position = position


class EvalDomainError(ExprError):
    """Evaluation left the expression's domain (sqrt of non-positive value,
    division by zero, ...).  ``detail`` names the offending subexpression."""

    def __init__(self, message: str, detail: str = ""):
        text = f"{message} in '{detail}'" if detail else message
        super().__init__(text)
        self.detail = detail


class UnboundParameterError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"parameter '{name}' is not bound")
        self.name = name


class SingularMetricError(NullGeoError):
    """Metric not invertible at the evaluation point."""

    def __init__(self, condition: float):
        super().__init__(f"metric is numerically singular (condition estimate {condition:.3e})")
        self.condition = condition


class FrameError(NullGeoError):
    """A declared frame violates a hard precondition (not a tolerance check)."""


class RankAmbiguityError(NullGeoError):
    """Singular-value gap too small to decide the radical rank."""

    def __init__(self, svals, threshold):
        super().__init__(
            "radical rank is ambiguous: singular values "
            f"{[f'{s:.3e}' for s in svals]} have no 10x gap at threshold {threshold:.3e}"
        )
        self.svals = list(svals)
        self.threshold = threshold


class SchemaError(NullGeoError):
    """Scenario document failed validation.  ``path`` is a JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownBuiltinError(SchemaError):
    def __init__(self, name: str):
        super().__init__("$", f"unknown builtin scenario '{name}'")
