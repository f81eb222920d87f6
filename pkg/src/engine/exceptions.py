"""
Engine Errors
"""

from ipaddress import IPv4Address

from core.exceptions import PulseWaveError


class NoRoute(PulseWaveError):
    """A node has no next hop toward a packet's destination (routing table bug)."""

    def __init__(self, node: str, destination: IPv4Address):
        self.node = node
        self.destination = destination
        super().__init__(f"no route from {node} toward {destination}")
