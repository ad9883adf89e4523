"""Exception hierarchy shared by every iamatch module."""


class IAError(Exception):
    """Base class for all iamatch errors."""


class DomainError(IAError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsoundMatchingError(DomainError):
    """A matching oversubscribes at least one activity."""


class StructuralError(IAError, ValueError):
    """A matching does not fit the problem (unknown or missing ids)."""


class ParseError(IAError, ValueError):
    """Malformed problem or matching text.

    ``location`` is a JSON-pointer-like path to the offending value.
    """

    def __init__(self, message: str, location: str = "") -> None:
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class CapacityExceededError(IAError):
    """An exponential computation was requested above its size guard."""


class ProtocolError(IAError):
    """An agent received a message that is illegal in its current state."""
