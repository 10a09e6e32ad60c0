"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`KPMatchError`.
Errors that describe a failed stage of a pipeline carry a ``stage`` string and a
``diagnostics`` mapping so callers (and the CLI) can report what broke.
"""

from __future__ import annotations

from typing import Any


class KPMatchError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str = "", **diagnostics: Any):
        super().__init__(message)
        self.diagnostics = diagnostics


class MalformedSet(KPMatchError, ValueError):
    pass


class MalformedInput(KPMatchError, ValueError):
    pass


class TouchesResidue(KPMatchError, ValueError):
    pass


class DimensionMismatch(KPMatchError, ValueError):
    pass


class UnequalParts(KPMatchError, ValueError):
    pass


class EmptyPart(KPMatchError, ValueError):
    pass


class BudgetExceeded(KPMatchError, ValueError):
    pass


class PreconditionViolated(KPMatchError, ValueError):
    pass


class SamePartViolation(KPMatchError, ValueError):
    pass


class InvalidCertificate(KPMatchError, ValueError):
    pass


class BudgetExhausted(KPMatchError):
    """The exact search ran out of nodes; ``best`` holds the best matching found."""

    def __init__(self, message: str, best, nodes: int):
        super().__init__(message, nodes=nodes, best_size=len(best))
        self.best = best
        self.nodes = nodes


class ConditionNotMet(KPMatchError):
    pass


class NoPerfectMatching(KPMatchError):
    pass


class DegreeTooLow(KPMatchError):
    pass


class NotClosed(KPMatchError):
    pass


class TooManyClasses(KPMatchError):
    pass


class FamilyConstructionFailed(KPMatchError):
    pass


class SelectionFailed(KPMatchError):
    """Raised after every retry of a seeded family selection missed its bounds.

    ``report`` is the :class:`~kpmatch.absorbing.FamilyReport` of the last attempt.
    """

    def __init__(self, message: str, report=None, **diagnostics: Any):
        super().__init__(message, **diagnostics)
        self.report = report


class StageFailed(KPMatchError):
    """A pipeline stage could not complete at this instance size."""

    def __init__(self, stage: str, message: str = "", **diagnostics: Any):
        super().__init__(f"[{stage}] {message}" if message else f"[{stage}]", **diagnostics)
        self.stage = stage


class PipelineFailed(StageFailed):
    pass


class ParseError(KPMatchError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}", line=line)
        self.line = line


class DuplicateEdge(ParseError):
    pass


class OutOfRange(ParseError):
    pass
