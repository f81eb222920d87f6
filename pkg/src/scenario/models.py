"""
Pulse-Wave Simulator - Scenario Models

Entities:
- ScenarioConfig: One fully resolved simulation run
- CnSpec: Central Network shape and link parameters
- AsSpec: Autonomous System hosts, roles and link parameters
- AttackVector: One attack behavior (protocol, sizes, rate, timing)
- BenignSpec: Benign request/response model parameters
- CaptureSpec: Capture file naming and coverage
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from django.db import models

RANDOM_PORT = 'RANDOM'

# IPv4 header plus the smallest transport header we model (UDP / ICMP echo)
MIN_PACKET_SIZE = 28


class Role(models.TextChoices):
    """Host role enumeration."""
    ATTACKER = 'attacker', 'Attacker'
    BENIGN = 'benign', 'Benign client'
    TARGET = 'target', 'Target server'
    NON_TARGET = 'non-target', 'Non-target server'


CLIENT_ROLES = (Role.ATTACKER, Role.BENIGN)
SERVER_ROLES = (Role.TARGET, Role.NON_TARGET)


class Protocol(models.TextChoices):
    """Attack vector protocol enumeration."""
    TCP_SYN = 'TCP_SYN', 'TCP SYN flood'
    UDP = 'UDP', 'UDP flood'
    ICMP = 'ICMP', 'ICMP echo flood'
    MIXED = 'MIXED', 'Mixed protocols'


# Smallest IP datagram each protocol can be crafted into
PROTOCOL_MIN_SIZE = {
    Protocol.TCP_SYN: 40,
    Protocol.UDP: 28,
    Protocol.ICMP: 28,
}


@dataclass(frozen=True)
class SizeDistribution:
    """Packet sizes in bytes (IP datagram length) with their probabilities."""
    entries: tuple[tuple[int, float], ...]

    @classmethod
    def fixed(cls, size: int) -> SizeDistribution:
        return cls(entries=((size, 1.0),))

    @property
    def sizes(self) -> list[int]:
        return [size for size, _ in self.entries]

    @property
    def weights(self) -> list[float]:
        return [weight for _, weight in self.entries]

    @property
    def mean_size(self) -> float:
        total = sum(self.weights)
        return sum(size * weight for size, weight in self.entries) / total


@dataclass(frozen=True)
class CnSpec:
    node_count: int
    redundancy: float = 0.0
    link_rate: float = 1e9
    link_delay: float = 0.001
    queue_len: int = 100


@dataclass(frozen=True)
class AsSpec:
    """
    One Autonomous System.

    Role indices count clients first, then servers: with 3 clients and
    2 servers, index 3 is the first server.
    """
    id: str
    client_count: int = 0
    server_count: int = 0
    roles: Mapping[int, Role] = field(default_factory=dict)
    link_rate: float = 1e8
    link_delay: float = 0.0002
    queue_len: int = 100

    def role_of(self, index: int) -> Role:
        if index in self.roles:
            return self.roles[index]
        return Role.BENIGN if index < self.client_count else Role.NON_TARGET

    def host_names(self) -> list[str]:
        clients = [f"{self.id}-C{j}" for j in range(self.client_count)]
        servers = [f"{self.id}-S{j}" for j in range(self.server_count)]
        return clients + servers

    @property
    def gateway_name(self) -> str:
        return f"{self.id}-GW"


@dataclass(frozen=True)
class AttackerOverride:
    """Per-attacker replacements for a vector's parameters (None = inherit)."""
    rate: float | None = None
    size_dist: SizeDistribution | None = None
    jitter: float | None = None
    src_port: int | str | None = None
    dst_port: int | str | None = None


@dataclass(frozen=True)
class VectorParams:
    """Effective parameters of one vector for one attacker."""
    rate: float
    size_dist: SizeDistribution
    jitter: float
    src_port: int | str
    dst_port: int | str


@dataclass(frozen=True)
class AttackVector:
    id: str
    protocol: Protocol
    size_dist: SizeDistribution
    rate: float
    burst: float
    jitter: float = 0.1
    switch: float = 0.0
    src_port: int | str = RANDOM_PORT
    dst_port: int | str = 80
    offset: float | None = None
    attackers: tuple[str, ...] = ()
    overrides: Mapping[str, AttackerOverride] = field(default_factory=dict)

    def params_for(self, attacker: str) -> VectorParams:
        override = self.overrides.get(attacker, AttackerOverride())
        return VectorParams(
            rate=override.rate if override.rate is not None else self.rate,
            size_dist=override.size_dist if override.size_dist is not None else self.size_dist,
            jitter=override.jitter if override.jitter is not None else self.jitter,
            src_port=override.src_port if override.src_port is not None else self.src_port,
            dst_port=override.dst_port if override.dst_port is not None else self.dst_port,
        )


@dataclass(frozen=True)
class BenignSpec:
    request_size: int = 400
    response_packets_mean: float = 10.0
    response_packet_size: int = 1500
    think_time_mean: float = 1.0
    include_targets: bool = True
    server_port: int = 80


@dataclass(frozen=True)
class CaptureSpec:
    prefix: str
    suffix: str = 'cap'
    bidirectional: bool = True
    include_as_links: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete validated description of one simulation run."""
    name: str
    duration: float
    central_network: CnSpec
    autonomous_systems: tuple[AsSpec, ...]
    capture: CaptureSpec
    seed: int = 0
    vectors: tuple[AttackVector, ...] = ()
    targets: tuple[str, ...] = ()
    benign: BenignSpec = field(default_factory=BenignSpec)

    def hosts_with_role(self, role: Role) -> list[str]:
        names = []
        for spec in self.autonomous_systems:
            for index, name in enumerate(spec.host_names()):
                if spec.role_of(index) == role:
                    names.append(name)
        return names

    @property
    def attackers(self) -> list[str]:
        return self.hosts_with_role(Role.ATTACKER)

    def attackers_for(self, vector: AttackVector) -> list[str]:
        """Attackers executing ``vector`` (all attackers unless restricted)."""
        if vector.attackers:
            return list(vector.attackers)
        return self.attackers

    def server_pool(self) -> list[str]:
        """Servers benign clients may contact."""
        pool = self.hosts_with_role(Role.NON_TARGET)
        if self.benign.include_targets:
            pool = self.hosts_with_role(Role.TARGET) + pool
        return sorted(pool, key=self.host_order().index)

    def host_order(self) -> list[str]:
        names = []
        for spec in self.autonomous_systems:
            names.extend(spec.host_names())
        return names
