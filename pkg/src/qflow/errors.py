"""Exception types shared across the package."""


class QflowError(Exception):
    """Base class for all qflow errors."""


class AlphaOutOfRange(QflowError):
    """Smoothness parameter outside the admissible interval."""


class ZeroModeSingular(QflowError):
    """A multiplier singular at frequency zero was applied to a field with nonzero mean."""


class EmptyWindowFamily(QflowError):
    """A window-based functional received no windows."""


class NoWindowBelowT(QflowError):
    """Every window radius exceeds the requested horizon."""


class UnknownKind(QflowError):
    """Unrecognized functional or multiplier kind."""


class EmptyTrajectory(QflowError):
    """A space-time operation received a trajectory with no slices."""


class NonPositiveArgument(QflowError):
    """Argument outside the domain of the gamma function."""


class ZeroDenominator(QflowError):
    """A ratio was requested against a vanishing norm."""


class ZeroField(QflowError):
    """An identity check received the zero field."""


class GridMismatch(QflowError):
    """Operands live on different grids."""


class TimeGridMismatch(QflowError):
    """Operands carry incompatible time nodes."""


class NumericalBlowup(QflowError):
    """A solver iterate contains non-finite values."""


class FieldFormatError(QflowError):
    """Malformed field file."""


class ConfigError(QflowError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
