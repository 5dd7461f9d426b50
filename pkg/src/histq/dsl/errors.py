from __future__ import annotations

from ..errors import HistqError


class ScenarioError(HistqError):
    """Error tied to a position in scenario source text (1-based line and column)."""

    kind = "error"

    def __init__(self, message: str, line: int, col: int, origin: str = "<inline>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin

    def __str__(self) -> str:
        return f"{self.origin}:{self.line}:{self.col}: {self.kind}: {self.message}"


class ParseError(ScenarioError):
    kind = "parse error"

    def __init__(self, message: str, line: int, col: int, expected=(), origin: str = "<inline>"):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message = f"{message}; expected one of: {', '.join(self.expected)}"
        super().__init__(message, line, col, origin)


class ResolutionError(ScenarioError):
    kind = "resolution error"

    def __init__(self, symbol: str, line: int, col: int, what: str = "symbol", origin: str = "<inline>"):
        self.symbol = symbol
        super().__init__(f"undefined {what} {symbol!r}", line, col, origin)


class ValidationError(ScenarioError):
    kind = "validation error"
