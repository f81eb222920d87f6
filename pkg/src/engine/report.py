"""
Run Report

Counters of one simulation run. Two runs of the same scenario and seed
produce equal reports: host-dependent fields are excluded from equality.
"""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .links import LinkCounters


@dataclass
class RunReport:
    scenario: str
    seed: int
    links: dict[str, LinkCounters] = field(default_factory=dict)
    events: int = 0
    attack_packets: int = 0
    benign_packets: int = 0
    delivered: int = 0
    vector_sent: dict[str, int] = field(default_factory=dict)
    vector_bytes: dict[str, int] = field(default_factory=dict)
    capture_counters: dict[str, tuple[int, int]] = field(default_factory=dict)
    partial_files: list[str] = field(default_factory=list)
    aborted: bool = False
    started_at: datetime | None = field(default=None, compare=False)
    wall_clock: float = field(default=0.0, compare=False)
    run_log: Path | None = field(default=None, compare=False)

    @property
    def dropped(self) -> int:
        return sum(counters.drop for counters in self.links.values())

    @property
    def captured_packets(self) -> int:
        return sum(packets for packets, _ in self.capture_counters.values())

    def summary(self) -> str:
        return (
            f"{self.scenario}: {self.events} events, {self.attack_packets} attack and "
            f"{self.benign_packets} benign packets sent, {self.delivered} delivered, "
            f"{self.dropped} dropped, {self.captured_packets} captured in {self.wall_clock:.1f}s"
        )
