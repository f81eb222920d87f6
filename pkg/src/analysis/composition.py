"""
Attack Vector Composition

Attributes captured packets to attack vectors by signature (protocol,
destination port, packet size) rather than by simulator provenance, so
the same code reads foreign captures. Benign request/response segments
(TCP without SYN) never count as attack traffic.

Rates are averaged over each vector's active time: the timetable's ON
windows when the scenario is known, otherwise bins whose byte count
exceeds ten times the median bin.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import Iterable

import dpkt
import numpy as np

from core.exceptions import ReportedWarning
from scenario.models import RANDOM_PORT, Protocol, ScenarioConfig
from scheduling.timetable import Timetable
from traffic.packets import PROTOCOL_NAMES

from .exceptions import unattributed_traffic
from .pcap import PacketRecord

logger = logging.getLogger('analysis')

UNATTRIBUTED_LIMIT = 0.01
ON_THRESHOLD = 10
# Capture points sit a few link delays downstream of the attackers
DEFAULT_SLACK_NS = 50_000_000
DEFAULT_BIN_NS = 100_000_000

LABEL_BENIGN = 'benign'
LABEL_UNATTRIBUTED = 'unattributed'

PROTOCOLS = {
    Protocol.TCP_SYN: frozenset({dpkt.ip.IP_PROTO_TCP}),
    Protocol.UDP: frozenset({dpkt.ip.IP_PROTO_UDP}),
    Protocol.ICMP: frozenset({dpkt.ip.IP_PROTO_ICMP}),
    Protocol.MIXED: frozenset({dpkt.ip.IP_PROTO_TCP, dpkt.ip.IP_PROTO_UDP, dpkt.ip.IP_PROTO_ICMP}),
}


@dataclass(frozen=True)
class VectorSignature:
    """What packets of one vector look like on the wire; ``dst_ports`` None matches any port."""
    vector_id: str
    protocols: frozenset[int]
    sizes: frozenset[int]
    dst_ports: frozenset[int] | None = None

    def matches(self, record: PacketRecord) -> bool:
        if record.protocol not in self.protocols or record.ip_len not in self.sizes:
            return False
        if record.protocol == dpkt.ip.IP_PROTO_ICMP or self.dst_ports is None:
            return True
        return record.dst_port in self.dst_ports


def vector_signatures(cfg: ScenarioConfig) -> list[VectorSignature]:
    """Signatures of every vector, covering per-attacker overrides."""
    signatures = []
    for vector in cfg.vectors:
        params = [vector.params_for(attacker) for attacker in cfg.attackers_for(vector)]
        if not params:
            params = [vector.params_for('')]
        sizes = frozenset(size for p in params for size in p.size_dist.sizes)
        ports = {p.dst_port for p in params}
        signatures.append(VectorSignature(
            vector_id=vector.id,
            protocols=PROTOCOLS[vector.protocol],
            sizes=sizes,
            dst_ports=None if RANDOM_PORT in ports else frozenset(ports),
        ))
    return signatures


def is_attack_candidate(record: PacketRecord) -> bool:
    """Everything except TCP segments without SYN (benign requests and responses)."""
    return record.protocol != dpkt.ip.IP_PROTO_TCP or bool(record.flags & dpkt.tcp.TH_SYN)


class Attributor:
    """
    Maps a record to the vector that most plausibly sent it.

    With a timetable, ambiguous matches (e.g. 128 B ICMP of an ICMP and a
    MIXED vector) go to the vector that was ON shortly before capture.
    """

    def __init__(self, signatures: list[VectorSignature], timetable: Timetable | None = None,
                 slack_ns: int = DEFAULT_SLACK_NS):
        self.signatures = signatures
        self.timetable = timetable
        self.slack_ns = slack_ns
        self._cache: dict[tuple, list[str]] = {}

    def _matches(self, record: PacketRecord) -> list[str]:
        key = (record.protocol, record.ip_len, record.dst_port)
        found = self._cache.get(key)
        if found is None:
            found = self._cache[key] = [s.vector_id for s in self.signatures if s.matches(record)]
        return found

    def _is_on(self, vector_id: str, t: int) -> bool:
        return (self.timetable.active_target(vector_id, t) is not None
                or self.timetable.active_target(vector_id, max(t - self.slack_ns, 0)) is not None)

    def __call__(self, record: PacketRecord) -> str | None:
        if not is_attack_candidate(record):
            return None
        matches = self._matches(record)
        if len(matches) <= 1 or self.timetable is None:
            return matches[0] if matches else None
        for vector_id in matches:
            if self._is_on(vector_id, record.ts_ns):
                return vector_id
        return matches[0]

    def label(self, record: PacketRecord) -> str:
        """Group label for time series: vector id, benign or unattributed."""
        if not is_attack_candidate(record):
            return LABEL_BENIGN
        return self(record) or LABEL_UNATTRIBUTED


@dataclass
class VectorComposition:
    vector_id: str
    packets: int = 0
    bytes: int = 0
    active_ns: int = 0
    sizes: Counter = field(default_factory=Counter)
    protocols: Counter = field(default_factory=Counter)
    targets: set = field(default_factory=set)

    @property
    def active_seconds(self) -> float:
        return self.active_ns / 1e9

    @property
    def avg_rate_bps(self) -> float:
        return self.bytes * 8 / self.active_seconds if self.active_ns else 0.0

    @property
    def avg_pps(self) -> float:
        return self.packets / self.active_seconds if self.active_ns else 0.0

    def size_shares(self) -> dict[int, float]:
        return {size: count / self.packets for size, count in sorted(self.sizes.items())} if self.packets else {}


@dataclass
class AttackerComposition:
    """Traffic of one source address with one protocol."""
    source: str
    protocol: str
    packets: int = 0
    bytes: int = 0
    packet_share: float = 0.0
    byte_share: float = 0.0


@dataclass
class CompositionReport:
    vectors: dict[str, VectorComposition]
    attackers: list[AttackerComposition]
    total_packets: int = 0
    total_bytes: int = 0
    candidate_packets: int = 0
    unattributed_packets: int = 0
    warnings: list[ReportedWarning] = field(default_factory=list)

    @property
    def attributed_packets(self) -> int:
        return sum(v.packets for v in self.vectors.values())

    def attacker_shares(self) -> dict[str, tuple[float, float]]:
        """(packet share, byte share) per source address over all protocols."""
        shares: dict[str, list[float]] = {}
        for row in self.attackers:
            entry = shares.setdefault(row.source, [0.0, 0.0])
            entry[0] += row.packet_share
            entry[1] += row.byte_share
        return {source: (p, b) for source, (p, b) in shares.items()}


def _detected_active_ns(stamps: list[int], bin_ns: int, sizes: list[int], last_ns: int) -> int:
    """
    ON time from bins holding more than ON_THRESHOLD times the median bin's bytes.

    Bins span the whole capture up to ``last_ns`` so OFF periods count toward the median.
    """
    if not stamps:
        return 0
    bins = np.asarray(stamps, dtype=np.int64) // bin_ns
    per_bin = np.bincount(bins, weights=np.asarray(sizes, dtype=float), minlength=last_ns // bin_ns + 1)
    median = float(np.median(per_bin))
    on = per_bin > ON_THRESHOLD * median if median > 0 else per_bin > 0
    return int(on.sum()) * bin_ns


def composition_report(records: Iterable[PacketRecord], signatures: list[VectorSignature],
                       timetable: Timetable | None = None, targets: dict[str, IPv4Address] | None = None,
                       bin_ns: int = DEFAULT_BIN_NS) -> CompositionReport:
    """
    Break a capture down by vector and by attacker.

    Args:
        records: Packet records of one capture (or several)
        signatures: Vector signatures, usually from ``vector_signatures``
        timetable: Scenario timetable; enables ON-window attribution and denominators
        targets: Target name -> address, restricts ON time to targets seen in the capture
        bin_ns: Bin width for threshold ON detection without a timetable

    Returns:
        CompositionReport
    """
    attribute = Attributor(signatures, timetable)
    vectors = {s.vector_id: VectorComposition(s.vector_id) for s in signatures}
    stamps: dict[str, list[int]] = {s.vector_id: [] for s in signatures}
    sizes: dict[str, list[int]] = {s.vector_id: [] for s in signatures}
    by_attacker: dict[tuple[str, str], AttackerComposition] = {}
    report = CompositionReport(vectors=vectors, attackers=[])

    last_ns = 0
    for record in records:
        report.total_packets += 1
        last_ns = max(last_ns, record.ts_ns)
        report.total_bytes += record.ip_len
        if not is_attack_candidate(record):
            continue
        report.candidate_packets += 1
        vector_id = attribute(record)
        if vector_id is None:
            report.unattributed_packets += 1
            continue
        vector = vectors[vector_id]
        vector.packets += 1
        vector.bytes += record.ip_len
        vector.sizes[record.ip_len] += 1
        protocol = PROTOCOL_NAMES.get(record.protocol, str(record.protocol))
        vector.protocols[protocol] += 1
        vector.targets.add(record.dst)
        stamps[vector_id].append(record.ts_ns)
        sizes[vector_id].append(record.ip_len)

        row = by_attacker.setdefault((str(record.src), protocol), AttackerComposition(str(record.src), protocol))
        row.packets += 1
        row.bytes += record.ip_len

    names = {address: name for name, address in (targets or {}).items()}
    for vector in vectors.values():
        if timetable is not None:
            seen = [names[address] for address in vector.targets if address in names]
            if targets is not None:
                vector.active_ns = sum(timetable.on_time(vector.vector_id, name) for name in seen)
            else:
                vector.active_ns = timetable.on_time(vector.vector_id)
        else:
            vector.active_ns = _detected_active_ns(
                stamps[vector.vector_id], bin_ns, sizes[vector.vector_id], last_ns,
            )

    attributed = report.attributed_packets
    attributed_bytes = sum(v.bytes for v in vectors.values())
    for row in sorted(by_attacker.values(), key=lambda r: (IPv4Address(r.source), r.protocol)):
        row.packet_share = row.packets / attributed if attributed else 0.0
        row.byte_share = row.bytes / attributed_bytes if attributed_bytes else 0.0
        report.attackers.append(row)

    if report.candidate_packets and report.unattributed_packets / report.candidate_packets > UNATTRIBUTED_LIMIT:
        warning = unattributed_traffic(report.unattributed_packets, report.candidate_packets)
        report.warnings.append(warning)
        logger.warning(str(warning))
    return report
