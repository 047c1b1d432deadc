"""Diagnostics and exception types shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A single user-facing message, printed as ``file:line:col: severity: message``."""

    severity: str  # "error" or "warning"
    message: str
    line: int = 0
    col: int = 0
    path: str = "<source>"

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}: {self.severity}: {self.message}"


class JiuchanError(Exception):
    """Base class for all analyzer errors."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def to_diagnostic(self, path: str = "<source>") -> Diagnostic:
        return Diagnostic("error", self.message, self.line, self.col, path)


class ParseError(JiuchanError):
    """Source text does not conform to the supported grammar."""


class UnsupportedStatementError(ParseError):
    """Statement kind the analysis cannot treat soundly (measurement)."""

    def __init__(self, message: str, line: int = 0, col: int = 0, kind: str = "measurement"):
        super().__init__(message, line, col)
        self.kind = kind


class ResolutionError(JiuchanError):
    """Name binding failed after a successful parse."""


class UnknownQubitError(ResolutionError):
    pass


class UnknownOperationError(ResolutionError):
    pass


class MissingEntryPointError(ResolutionError):
    pass


class DuplicateEntryPointError(ResolutionError):
    pass


class LoweringError(JiuchanError):
    """Statement could not be lowered to operation lines."""


class UnrollBoundExceededError(LoweringError):
    pass


class NonStaticIterableError(LoweringError):
    pass


class RecursionDetectedError(JiuchanError):
    """The call graph contains a cycle; summaries require acyclic calls."""


class UnknownGateError(JiuchanError):
    """Gate name missing from the fundamental-operation library."""


class ArityMismatchError(JiuchanError):
    pass


class AliasConflictError(JiuchanError):
    """The same qubit was bound to two formals of one call."""


class UnsupportedGateError(JiuchanError):
    """The simulator has no concrete semantics for this gate."""


class TooManyQubitsError(JiuchanError):
    pass


class EmptyPartitionError(JiuchanError):
    pass
