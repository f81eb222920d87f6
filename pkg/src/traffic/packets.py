"""
Packet Crafting

Packets travel through the engine as light objects; their wire bytes are
built with dpkt only when a capture point needs them. IPv4 total length
always equals the modeled size; the payload is zero padding.
"""

from dataclasses import dataclass, field
from ipaddress import IPv4Address

import dpkt

from core.exceptions import PulseWaveError

IP_HEADER = 20
TRANSPORT_HEADER = {
    dpkt.ip.IP_PROTO_TCP: 20,
    dpkt.ip.IP_PROTO_UDP: 8,
    dpkt.ip.IP_PROTO_ICMP: 8,
}
PROTOCOL_NAMES = {
    dpkt.ip.IP_PROTO_TCP: 'TCP',
    dpkt.ip.IP_PROTO_UDP: 'UDP',
    dpkt.ip.IP_PROTO_ICMP: 'ICMP',
}

TTL = 64
TCP_WINDOW = 65535

KIND_ATTACK = 'attack'
KIND_REQUEST = 'request'
KIND_RESPONSE = 'response'


class SizeTooSmall(PulseWaveError):
    def __init__(self, protocol: int, size: int):
        minimum = IP_HEADER + TRANSPORT_HEADER[protocol]
        super().__init__(f"{PROTOCOL_NAMES[protocol]} packet of {size} B is below the {minimum} B header size")


def min_size(protocol: int) -> int:
    return IP_HEADER + TRANSPORT_HEADER[protocol]


@dataclass(slots=True)
class Packet:
    """
    One simulated IPv4 datagram.

    ``kind``, ``attacker`` and ``vector`` are provenance tags and
    ``reply_count`` tells a server how many response packets a request
    asks for. None of them reach the wire.
    """
    src: IPv4Address
    dst: IPv4Address
    protocol: int
    size: int
    src_port: int = 0
    dst_port: int = 0
    flags: int = 0
    seq: int = 0
    kind: str = KIND_ATTACK
    attacker: str | None = None
    vector: str | None = None
    reply_count: int = 0
    _raw: bytes | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.size < min_size(self.protocol):
            raise SizeTooSmall(self.protocol, self.size)

    def to_bytes(self) -> bytes:
        if self._raw is None:
            self._raw = craft_bytes(self)
        return self._raw


def craft_bytes(packet: Packet) -> bytes:
    """
    Serialize a packet: IPv4 header, transport header, zero padding.

    dpkt fills the IPv4 header checksum and the TCP/UDP/ICMP checksums
    when they are left at zero.
    """
    padding = b'\x00' * (packet.size - min_size(packet.protocol))

    if packet.protocol == dpkt.ip.IP_PROTO_TCP:
        transport = dpkt.tcp.TCP(
            sport=packet.src_port, dport=packet.dst_port, seq=packet.seq,
            flags=packet.flags, win=TCP_WINDOW, data=padding,
        )
    elif packet.protocol == dpkt.ip.IP_PROTO_UDP:
        transport = dpkt.udp.UDP(
            sport=packet.src_port, dport=packet.dst_port,
            ulen=TRANSPORT_HEADER[dpkt.ip.IP_PROTO_UDP] + len(padding), data=padding,
        )
    else:
        # Echo id/seq take the port slots of the other protocols
        echo = dpkt.icmp.ICMP.Echo(id=packet.src_port & 0xFFFF, seq=packet.seq & 0xFFFF, data=padding)
        transport = dpkt.icmp.ICMP(type=dpkt.icmp.ICMP_ECHO, code=0, data=echo)

    ip = dpkt.ip.IP(
        src=packet.src.packed, dst=packet.dst.packed, p=packet.protocol,
        ttl=TTL, len=packet.size, data=transport,
    )
    return bytes(ip)


def checksums_ok(raw: bytes) -> bool:
    """True if the IPv4 header and transport checksums of ``raw`` verify."""
    if len(raw) < IP_HEADER or dpkt.in_cksum(raw[:(raw[0] & 0x0F) * 4]) != 0:
        return False
    header_len = (raw[0] & 0x0F) * 4
    protocol = raw[9]
    segment = raw[header_len:]
    if protocol == dpkt.ip.IP_PROTO_ICMP:
        return dpkt.in_cksum(segment) == 0
    if protocol in (dpkt.ip.IP_PROTO_TCP, dpkt.ip.IP_PROTO_UDP):
        if protocol == dpkt.ip.IP_PROTO_UDP and segment[6:8] == b'\x00\x00':
            return True
        pseudo = raw[12:20] + bytes([0, protocol]) + len(segment).to_bytes(2, 'big')
        return dpkt.in_cksum(pseudo + segment) == 0
    return True
