"""
Analysis Errors
"""

from core.exceptions import PulseWaveError, ReportedWarning


class MalformedPcap(PulseWaveError):
    """Capture file that is not a readable classic pcap."""

    def __init__(self, path, offset: int, reason: str):
        self.path = path
        self.offset = offset
        self.reason = reason
        super().__init__(f"{path}: malformed pcap at byte {offset}: {reason}")

    def __reduce__(self):
        return self.__class__, (self.path, self.offset, self.reason)


def unattributed_traffic(unmatched: int, candidates: int) -> ReportedWarning:
    share = unmatched / candidates if candidates else 0.0
    return ReportedWarning(
        'UnattributedTraffic',
        f"{unmatched} of {candidates} attack-like packets ({share:.2%}) match no vector signature",
    )
