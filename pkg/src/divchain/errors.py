"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DivChainError(Exception):
    """Base class for all errors raised by :mod:`divchain`."""


class DomainError(DivChainError, ValueError):
    """An argument lies outside the domain of the operation."""


class NatOverflowError(DivChainError, OverflowError):
    """A value left the unsigned 64-bit range."""


class ChainError(DivChainError, ValueError):
    """A sequence failed chain validation.

    The first offending position is available as ``violation``.
    """

    def __init__(self, violation, message: str | None = None):
        self.violation = violation
        super().__init__(message or f"{violation.kind} at index {violation.index}")


class GammaBuildError(DivChainError):
    """No certified chain could be produced for a prime."""

    def __init__(self, p: int, message: str):
        self.p = p
        super().__init__(f"p={p}: {message}")


class GammaContractError(GammaBuildError):
    """A chain failed one or more of the four contract properties."""

    def __init__(self, p: int, failed: list[str]):
        self.failed = list(failed)
        super().__init__(p, "contract violated: " + ",".join(self.failed))


class ScheduleError(DivChainError):
    """The insertion schedule is not resolved far enough for a request."""


class GuardError(DivChainError):
    """An oracle was asked for an input beyond its enumeration guard."""
