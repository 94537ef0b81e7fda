"""Exception hierarchy shared by all mobilicast modules."""


class MobilicastError(Exception):
    """Base class for every error raised by this package."""


class ParseFailure(MobilicastError):
    pass


class MissingVariable(MobilicastError):
    pass


class InvalidDistribution(MobilicastError):
    pass


class EmptyCorpus(MobilicastError):
    pass


class IoFailure(MobilicastError):
    pass


class UnreadableInput(ParseFailure, IoFailure):
    """An input file could not be opened or decoded."""


class InvalidRange(MobilicastError):
    pass


class InvalidDiary(MobilicastError):
    """A TravelDiary or DiaryEntry violates its invariants."""


class ShapeMismatch(MobilicastError):
    pass


class SchemeMismatch(MobilicastError):
    pass


class NoTrips(MobilicastError):
    pass


class InvalidK(MobilicastError):
    pass


class InsufficientData(MobilicastError):
    pass


class ConfigError(MobilicastError):
    pass


class BackendError(MobilicastError):
    """Generation failure; ``attempts`` records how many calls were made."""

    def __init__(self, message: str = "", attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class BackendUnavailable(BackendError):
    pass


class RateLimited(BackendError):
    pass


class MalformedResponse(BackendError):
    pass
