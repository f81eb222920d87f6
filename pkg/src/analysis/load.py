"""
Analytic Link Load

Nominal attack load on a directed link: the sum of r(i, v) over every
attacker i and vector v whose vector is ON toward target k at t and whose
routed path from i to k crosses the link. Jitter is taken at its
expectation of 1, benign traffic is not modeled.
"""

from dataclasses import dataclass

import numpy as np

from scenario.models import ScenarioConfig
from scheduling.timetable import Timetable
from topology.models import Topology
from topology.routing import path


@dataclass(frozen=True)
class Contribution:
    attacker: str
    vector_id: str
    rate: float


class LoadModel:
    def __init__(self, cfg: ScenarioConfig, topo: Topology, timetable: Timetable):
        self.topo = topo
        self.timetable = timetable
        self.contributions: dict[str, list[Contribution]] = {
            vector.id: [
                Contribution(attacker, vector.id, vector.params_for(attacker).rate)
                for attacker in cfg.attackers_for(vector)
            ]
            for vector in cfg.vectors
        }
        self._paths: dict[tuple[str, str], frozenset[tuple[int, int]]] = {}
        for contributions in self.contributions.values():
            for c in contributions:
                for target in cfg.targets:
                    self._hops(c.attacker, target)

    def _hops(self, attacker: str, target: str) -> frozenset[tuple[int, int]]:
        key = (attacker, target)
        hops = self._paths.get(key)
        if hops is None:
            address = self.topo.host_address(self.topo.node_id(target))
            hops = frozenset((h.src, h.dst) for h in path(self.topo, self.topo.node_id(attacker), address))
            self._paths[key] = hops
        return hops

    def crosses(self, attacker: str, target: str, hop: tuple[int, int]) -> bool:
        return hop in self._hops(attacker, target)

    def load(self, hop: tuple[int, int], t: int) -> float:
        """Nominal attack bits/s on directed ``hop`` (from id, to id) at ``t`` ns."""
        total = 0.0
        for vector_id, contributions in self.contributions.items():
            target = self.timetable.active_target(vector_id, t)
            if target is None:
                continue
            total += sum(c.rate for c in contributions if self.crosses(c.attacker, target, hop))
        return total

    def binned(self, hop: tuple[int, int], bin_ns: int, bin_count: int) -> np.ndarray:
        """Mean nominal bits/s per bin, weighting each window by its overlap with the bin."""
        load = np.zeros(bin_count)
        horizon = bin_count * bin_ns
        for vector_id, contributions in self.contributions.items():
            for window in self.timetable.iter_windows(vector_id):
                if window.start >= horizon:
                    break
                rate = sum(c.rate for c in contributions if self.crosses(c.attacker, window.target, hop))
                if not rate:
                    continue
                end = min(window.end, horizon)
                first, last = window.start // bin_ns, (end - 1) // bin_ns
                for k in range(first, last + 1):
                    overlap = min(end, (k + 1) * bin_ns) - max(window.start, k * bin_ns)
                    load[k] += rate * overlap / bin_ns
        return load


def expected_link_load(cfg: ScenarioConfig, topo: Topology, timetable: Timetable,
                       hop: tuple[int, int], t: int) -> float:
    """Nominal attack bits/s on ``hop`` at ``t``; build a LoadModel to evaluate many instants."""
    return LoadModel(cfg, topo, timetable).load(hop, t)


def hop_for_direction(topo: Topology, direction: str) -> tuple[int, int]:
    """
    Resolve ``From-to-To`` (as in capture file names) to node ids.

    Raises:
        KeyError: No split of ``direction`` names two known nodes
    """
    parts = direction.split('-to-')
    for k in range(1, len(parts)):
        src, dst = '-to-'.join(parts[:k]), '-to-'.join(parts[k:])
        try:
            return topo.node_id(src), topo.node_id(dst)
        except KeyError:
            continue
    raise KeyError(direction)


def direction_of_capture(filename: str) -> str:
    """``DIST__CN3-to-CN5__cap.pcap`` -> ``CN3-to-CN5``."""
    parts = filename.split('__')
    if len(parts) != 3:
        raise KeyError(filename)
    return parts[1]
