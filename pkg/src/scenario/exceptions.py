"""
Scenario Errors
"""

from core.exceptions import PulseWaveError


class ParseError(PulseWaveError):
    """Malformed YAML, unknown key or type mismatch in a scenario document."""

    def __init__(self, line: int | None, key: str, reason: str):
        self.line = line
        self.key = key
        self.reason = reason
        where = f"line {line}" if line is not None else "document"
        super().__init__(f"{where}, key '{key}': {reason}")


class ValidationError(PulseWaveError):
    """Scenario is well-formed but violates semantic invariants."""

    def __init__(self, report):
        self.report = report
        errors = report.errors
        summary = '; '.join(f"{finding.path}: {finding.message}" for finding in errors[:5])
        if len(errors) > 5:
            summary += f"; ... ({len(errors) - 5} more)"
        super().__init__(f"{len(errors)} validation error(s): {summary}")
