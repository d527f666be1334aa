"""Exception hierarchy shared by all modules."""


class DecisiveError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceeded(DecisiveError):
    """A computation needed a value or an amount of work beyond the configured budget."""


class Incomparable(DecisiveError):
    """Two symbolic magnitudes could not be ordered with a certified argument."""


class InvalidCreature(DecisiveError):
    """A creature or creature table violates one of its invariants."""


class KindMismatch(DecisiveError):
    pass


class NormTooSmall(DecisiveError):
    """An operation scoped to creatures with large norm was applied to a small one."""


class PreconditionViolated(DecisiveError):
    pass


class NoWitness(DecisiveError):
    """A search that is guaranteed to succeed came back empty."""


class WitnessUnavailable(DecisiveError):
    """A creature has no decisive witness."""


class HomogenizationFailed(DecisiveError):
    pass


class SearchSpaceExceeded(DecisiveError):
    def __init__(self, count, cap):
        super().__init__(f"search space of size {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


class HorizonExhausted(DecisiveError):
    """The name cannot be decided within the truncation depth."""


class SchemaError(DecisiveError):
    """An input file does not describe a valid object."""
