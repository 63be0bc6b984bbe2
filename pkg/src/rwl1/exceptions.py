"""Exception and warning types raised by rwl1."""


class DimensionMismatch(ValueError):
    pass


class CombinatorialBudgetExceeded(ValueError):
    pass


class DeltaOutOfRange(ValueError):
    pass


class MuConditionViolated(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


class NoAdmissibleDelta(ValueError):
    pass


class InfeasibleReference(ValueError):
    pass


class ConfigError(ValueError):
    pass


class NotConvergedWarning(UserWarning):
    """The splitting solver hit its iteration cap before meeting tolerances."""
