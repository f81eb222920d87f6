"""
Link Directions

Every point-to-point link is two independent directions. A direction owns
the egress interface of its source node: a drop-tail FIFO whose occupancy
counts the packet being serialized, one transmitter, and tx/rx/drop
counters.
"""

from collections import deque
from dataclasses import dataclass

from capture.writer import CapturePoint
from core.units import seconds_to_ns, serialization_ns
from topology.models import Link
from traffic.packets import Packet


@dataclass
class LinkCounters:
    tx: int = 0
    rx: int = 0
    drop: int = 0
    tx_bytes: int = 0

    @property
    def conserved(self) -> bool:
        return self.tx == self.rx + self.drop


class InterfaceQueue:
    """Drop-tail FIFO of at most ``capacity`` packets, head in service."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._fifo: deque[Packet] = deque()

    @property
    def occupancy(self) -> int:
        return len(self._fifo)

    def offer(self, packet: Packet) -> bool:
        if len(self._fifo) >= self.capacity:
            return False
        self._fifo.append(packet)
        return True

    def head(self) -> Packet:
        return self._fifo[0]

    def pop(self) -> Packet:
        return self._fifo.popleft()


class Direction:
    def __init__(self, link: Link, src: int, dst: int, name: str):
        self.link = link
        self.src = src
        self.dst = dst
        self.name = name
        self.rate = link.rate
        self.delay = seconds_to_ns(link.delay)
        self.queue = InterfaceQueue(link.queue_len)
        self.counters = LinkCounters()
        self.capture: CapturePoint | None = None
        self.busy = False
        self._serialization: dict[int, int] = {}

    def serialization(self, size: int) -> int:
        """Serialization time of ``size`` bytes in ns, memoized per size."""
        ns = self._serialization.get(size)
        if ns is None:
            ns = self._serialization[size] = serialization_ns(size, self.rate)
        return ns

    def __repr__(self):
        return f"Direction({self.name})"
