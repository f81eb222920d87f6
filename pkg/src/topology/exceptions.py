"""
Topology Errors
"""

from core.exceptions import PulseWaveError


class AddressSpaceExhausted(PulseWaveError):
    """More point-to-point links than the 10.x.y.0/30 address plan can number."""

    def __init__(self, link_count: int, limit: int):
        self.link_count = link_count
        super().__init__(f"{link_count} links exceed the {limit} available /30 subnets")


class UnreachableDestination(PulseWaveError):
    """A host cannot be reached; the graph is disconnected."""

    def __init__(self, source: str, destination: str):
        self.source = source
        self.destination = destination
        super().__init__(f"{destination} is unreachable from {source}")
