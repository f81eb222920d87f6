"""
Event Queue

Single global priority queue ordered by (time, seq). ``seq`` grows with
every push, so events scheduled for the same instant run in the order
they were scheduled and payloads are never compared.
"""

import heapq
from enum import IntEnum
from typing import Any, NamedTuple


class EventKind(IntEnum):
    APP_SEND = 0
    RETARGET = 1
    LINK_DELIVER = 2
    QUEUE_DEQUEUE = 3
    FLOW_START = 4
    SIM_END = 5


class Event(NamedTuple):
    time: int
    seq: int
    kind: EventKind
    payload: Any


class EventQueue:
    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0
        self.now = 0

    def push(self, time: int, kind: EventKind, payload: Any = None):
        if time < self.now:
            raise ValueError(f"event at {time} ns scheduled in the past (now {self.now} ns)")
        heapq.heappush(self._heap, Event(time, self._seq, kind, payload))
        self._seq += 1

    def pop(self) -> Event:
        event = heapq.heappop(self._heap)
        self.now = event.time
        return event

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)
