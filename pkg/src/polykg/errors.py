"""Exception hierarchy shared by every stage of the query pipeline."""

from __future__ import annotations


class PolyKGError(Exception):
    """Base class for all package errors."""


class MalformedTerm(PolyKGError):
    pass


class MalformedLine(PolyKGError):
    def __init__(self, line_no: int, line: str, reason: str):
        super().__init__(f"line {line_no}: {reason}: {line!r}")
        self.line_no = line_no
        self.line = line
        self.reason = reason


class QuerySyntaxError(PolyKGError):
    """A lexing or parsing failure carrying a (line, column) position."""

    def __init__(self, message: str, position: tuple[int, int]):
        line, col = position
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.position = position


class LexError(QuerySyntaxError):
    pass


class ParseError(QuerySyntaxError):
    def __init__(self, expected: str, found: str, position: tuple[int, int]):
        super().__init__(f"expected {expected}, found {found}", position)
        self.expected = expected
        self.found = found


class UnsupportedFeature(QuerySyntaxError):
    def __init__(self, feature: str, position: tuple[int, int]):
        super().__init__(f"unsupported feature: {feature}", position)
        self.feature = feature


class NoSource(PolyKGError):
    pass


class UnlabelableQuery(PolyKGError):
    pass


class UntranslatableQuery(PolyKGError):
    pass


class UnsupportedExpression(PolyKGError):
    pass


class EvalError(PolyKGError):
    pass


class UnknownStage(PolyKGError):
    pass


class UnknownCollection(PolyKGError):
    pass


class MissingProjection(PolyKGError):
    pass


class PolicyError(PolyKGError):
    pass


class UnknownSlot(PolyKGError):
    pass


class AllBackendsFailed(PolyKGError):
    def __init__(self, failures: dict[str, BaseException]):
        detail = "; ".join(f"{slot}: {exc!r}" for slot, exc in failures.items())
        super().__init__(f"all backends failed ({detail})")
        self.failures = failures


class InsufficientBackends(PolyKGError):
    pass


class VerificationMismatch(PolyKGError):
    def __init__(self, report, results):
        bad = [slot for slot, ok in report.agreement.items() if not ok]
        super().__init__(f"results disagree for {', '.join(bad)} (reference {report.reference})")
        self.report = report
        self.results = results
