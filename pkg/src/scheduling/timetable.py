"""
Attack Timetable

One global periodic schedule shared by every attacker application. Each
vector owns a phase of the cycle: |T| ON windows of ``burst`` separated
by ``switch`` gaps, one window per target in configured order. Vectors
are laid out back to back unless a vector pins its own offset.

All instants are integer nanoseconds; windows are half-open [start, end).
"""

import heapq
import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

from core.units import ns_to_seconds, seconds_to_ns
from scenario.models import AttackVector

logger = logging.getLogger('scheduling')


@dataclass(frozen=True)
class Window:
    vector_id: str
    target_index: int
    target: str
    start: int
    end: int
    cycle: int = 0


@dataclass(frozen=True)
class VectorSchedule:
    vector_id: str
    offset: int
    burst: int
    switch: int
    target_count: int

    @property
    def span(self) -> int:
        """Length of this vector's phase within one cycle."""
        return self.target_count * self.burst + (self.target_count - 1) * self.switch

    def window_start(self, k: int) -> int:
        """Start of the window toward target index ``k`` (0-based) in cycle 0."""
        return self.offset + k * (self.burst + self.switch)


def _phase_ns(vector: AttackVector, n_targets: int) -> int:
    return n_targets * seconds_to_ns(vector.burst) + (n_targets - 1) * seconds_to_ns(vector.switch)


def compute_cycle_length(vectors: Sequence[AttackVector], n_targets: int) -> float:
    """C = sum over vectors of |T|*b + (|T|-1)*s, in seconds."""
    return ns_to_seconds(sum(_phase_ns(vector, n_targets) for vector in vectors))


@dataclass(frozen=True)
class Timetable:
    cycle_length: int
    vectors: tuple[VectorSchedule, ...]
    targets: tuple[str, ...]
    duration: int

    @property
    def cycle_seconds(self) -> float:
        return ns_to_seconds(self.cycle_length)

    def schedule_of(self, vector_id: str) -> VectorSchedule:
        for schedule in self.vectors:
            if schedule.vector_id == vector_id:
                return schedule
        raise KeyError(vector_id)

    def active_target(self, vector_id: str, t: int) -> str | None:
        """Target vector ``vector_id`` attacks at ``t`` (ns), or None."""
        index = self.active_index(vector_id, t)
        return None if index is None else self.targets[index]

    def active_index(self, vector_id: str, t: int) -> int | None:
        if t < 0 or t >= self.duration or self.cycle_length <= 0:
            return None
        schedule = self.schedule_of(vector_id)
        for k in range(schedule.target_count):
            start = schedule.window_start(k)
            if t >= start and (t - start) % self.cycle_length < schedule.burst:
                return k
        return None

    def window_at(self, vector_id: str, t: int) -> Window | None:
        """The (truncated) window of ``vector_id`` containing ``t``."""
        k = self.active_index(vector_id, t)
        if k is None:
            return None
        schedule = self.schedule_of(vector_id)
        first = schedule.window_start(k)
        cycle = (t - first) // self.cycle_length
        start = first + cycle * self.cycle_length
        return Window(vector_id, k, self.targets[k], start, min(start + schedule.burst, self.duration), cycle)

    def iter_windows(self, vector_id: str) -> Iterator[Window]:
        """Windows of one vector in time order, truncated at the run duration."""
        schedule = self.schedule_of(vector_id)
        if self.cycle_length <= 0:
            return
        cycle = 0
        while True:
            base = cycle * self.cycle_length
            for k in range(schedule.target_count):
                start = base + schedule.window_start(k)
                if start >= self.duration:
                    return
                yield Window(vector_id, k, self.targets[k], start,
                             min(start + schedule.burst, self.duration), cycle)
            cycle += 1

    def windows(self) -> list[Window]:
        """Every window of the run across all vectors, ordered by start."""
        streams = [self.iter_windows(schedule.vector_id) for schedule in self.vectors]
        return list(heapq.merge(*streams, key=lambda w: (w.start, w.vector_id)))

    def first_cycle(self) -> list[Window]:
        """Nominal (untruncated) windows of cycle 0, ordered by start."""
        rows = []
        for schedule in self.vectors:
            for k in range(schedule.target_count):
                start = schedule.window_start(k)
                rows.append(Window(schedule.vector_id, k, self.targets[k], start, start + schedule.burst))
        return sorted(rows, key=lambda w: (w.start, w.vector_id))

    def retarget_events(self, vector_id: str) -> Iterator[tuple[int, str]]:
        """(time, new target) at every window start; lazily generated."""
        for window in self.iter_windows(vector_id):
            yield window.start, window.target

    def on_time(self, vector_id: str, target: str | None = None) -> int:
        """Total ON time of a vector (optionally toward one target) within the run."""
        return sum(
            window.end - window.start for window in self.iter_windows(vector_id)
            if target is None or window.target == target
        )

    def has_overlap(self) -> bool:
        """True if ON windows of two distinct vectors ever intersect."""
        if len(self.vectors) < 2 or self.cycle_length <= 0:
            return False
        latest = max(schedule.offset for schedule in self.vectors)
        horizon = min(self.duration, latest + 2 * self.cycle_length)
        windows = [w for w in self.windows() if w.start < horizon]
        open_until: dict[str, int] = {}
        for window in windows:
            for vector_id, end in open_until.items():
                if vector_id != window.vector_id and end > window.start:
                    return True
            open_until[window.vector_id] = max(open_until.get(window.vector_id, 0), window.end)
        return False


def build_timetable(vectors: Sequence[AttackVector], targets: Sequence[str], duration: float) -> Timetable:
    """
    Lay out the global schedule.

    Offsets default to back-to-back phases: o_1 = 0 and each next vector
    starts where the previous phase ends. A vector with an explicit
    ``offset`` keeps it; the others keep their back-to-back slot.

    Args:
        vectors: Attack vectors in configured order
        targets: Target node names in configured order
        duration: Run length in seconds

    Returns:
        Timetable
    """
    n_targets = len(targets)
    schedules = []
    auto_offset = 0
    for vector in vectors:
        offset = auto_offset if vector.offset is None else seconds_to_ns(vector.offset)
        schedules.append(VectorSchedule(
            vector_id=vector.id,
            offset=offset,
            burst=seconds_to_ns(vector.burst),
            switch=seconds_to_ns(vector.switch),
            target_count=n_targets,
        ))
        auto_offset += _phase_ns(vector, n_targets)

    timetable = Timetable(
        cycle_length=auto_offset if n_targets else 0,
        vectors=tuple(schedules),
        targets=tuple(targets),
        duration=seconds_to_ns(duration),
    )
    logger.debug(f"Timetable: {len(schedules)} vectors, {n_targets} targets, C={timetable.cycle_seconds}s")
    return timetable
