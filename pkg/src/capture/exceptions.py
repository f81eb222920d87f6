"""
Capture Errors
"""

from core.exceptions import PulseWaveError


class InvalidToken(PulseWaveError):
    """Name part that would break the capture file naming pattern."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(f"'{token}' is not a valid file name token (letters, digits, single dashes)")


class CaptureWriteError(PulseWaveError):
    """Writing a capture file or the run log failed."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"cannot write {path}: {reason}")
