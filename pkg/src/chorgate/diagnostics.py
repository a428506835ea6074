"""Structured diagnostics for the two document parsers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    code: str
    location: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = self.location + (f" (line {self.line})" if self.line else "")
        return f"{self.severity}[{self.code}] {where}: {self.message}"


class ParseError(Exception):
    """A document could not be turned into a model. Carries the complete
    diagnostic list (errors plus any warnings gathered before failing)."""

    def __init__(self, diagnostics: Iterable[ParseDiagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))

    @property
    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == ERROR)
