"""
Simulator Errors

Base class for every domain error raised by the simulator apps.
"""


class PulseWaveError(Exception):
    """Base class for simulator errors."""


class ReportedWarning:
    """
    Non-fatal finding attached to a report object.

    Warnings are data, not failures: the analysis keeps going and the CLI
    decides how to surface them.
    """

    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message

    def __repr__(self):
        return f"ReportedWarning({self.code!r}, {self.message!r})"

    def __str__(self):
        return f"{self.code}: {self.message}"
