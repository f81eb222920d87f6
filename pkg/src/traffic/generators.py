"""
Traffic Applications

AttackerApp runs one vector on one attacker: it follows the global
timetable, sends to whatever target it was last retargeted to, and spaces
packets by S*8 / (r*(1+eps)) with eps drawn fresh per packet.

BenignApp is a request/response client: exponential think time, one
request to a random server, a geometric number of full-size responses.

Apps never touch the event queue; the engine calls them and schedules
whatever they return.
"""

import logging
from ipaddress import IPv4Address

import dpkt

from core.rng import BufferedChoice, BufferedIntegers, BufferedUniform, derive_rng
from core.units import NS_PER_SECOND, round_half_up
from scenario.models import RANDOM_PORT, AttackVector, BenignSpec, Protocol, VectorParams

from .packets import KIND_ATTACK, KIND_REQUEST, KIND_RESPONSE, Packet, SizeTooSmall, min_size

logger = logging.getLogger('traffic')

RANDOM_PORT_RANGE = (1024, 65535)
EPHEMERAL_PORTS = (49152, 65535)

PROTOCOL_NUMBERS = {
    Protocol.TCP_SYN: dpkt.ip.IP_PROTO_TCP,
    Protocol.UDP: dpkt.ip.IP_PROTO_UDP,
    Protocol.ICMP: dpkt.ip.IP_PROTO_ICMP,
}
MIXED_CHOICES = (dpkt.ip.IP_PROTO_TCP, dpkt.ip.IP_PROTO_UDP, dpkt.ip.IP_PROTO_ICMP)


class AttackerApp:
    """
    On/off retargeting generator for one (attacker, vector) pair.

    At most one send is pending at any time: ``on_retarget`` only asks for
    a send when the app is idle, and ``on_send`` either re-arms itself or
    goes idle.
    """

    def __init__(self, attacker: str, src: IPv4Address, vector: AttackVector, params: VectorParams,
                 targets: dict[str, IPv4Address], seed: int):
        self.attacker = attacker
        self.vector_id = vector.id
        self.protocol = vector.protocol
        self.src = src
        self.rate = params.rate
        self.jitter = params.jitter
        self.src_port = params.src_port
        self.dst_port = params.dst_port
        self.targets = targets

        rng = derive_rng(seed, 'attacker', attacker, vector.id)
        self._eps = BufferedUniform(rng, -params.jitter, params.jitter) if params.jitter > 0 else None
        self._sizes = BufferedChoice(rng, params.size_dist.sizes, params.size_dist.weights)
        self._ports = BufferedIntegers(rng, *RANDOM_PORT_RANGE)
        self._words = BufferedIntegers(rng, 0, 0xFFFFFFFF)
        self._picks = BufferedUniform(rng, 0.0, 1.0)

        self.remote: IPv4Address | None = None
        self.remote_name: str | None = None
        self.window_end = 0
        self.pending = False
        self.sent = 0
        self.sent_bytes = 0

    def next_send_delay(self) -> tuple[int, int]:
        """
        Draw the next packet size and its inter-packet delay.

        Returns:
            (delay in ns, size in bytes)
        """
        eps = self._eps.next() if self._eps is not None else 0.0
        size = self._sizes.next()
        delay = round_half_up(size * 8 * NS_PER_SECOND / (self.rate * (1.0 + eps)))
        return max(delay, 1), size

    def _protocol_for(self, size: int) -> int:
        if self.protocol != Protocol.MIXED:
            return PROTOCOL_NUMBERS[self.protocol]
        fitting = [p for p in MIXED_CHOICES if min_size(p) <= size]
        if not fitting:
            raise SizeTooSmall(dpkt.ip.IP_PROTO_UDP, size)
        return fitting[min(int(self._picks.next() * len(fitting)), len(fitting) - 1)]

    def _port(self, configured: int | str) -> int:
        return self._ports.next() if configured == RANDOM_PORT else configured

    def craft_packet(self, target: IPv4Address, size: int) -> Packet:
        """Build the next attack packet of ``size`` bytes toward ``target``."""
        protocol = self._protocol_for(size)
        packet = Packet(
            src=self.src, dst=target, protocol=protocol, size=size,
            kind=KIND_ATTACK, attacker=self.attacker, vector=self.vector_id,
        )
        if protocol == dpkt.ip.IP_PROTO_TCP:
            packet.src_port = self._port(self.src_port)
            packet.dst_port = self._port(self.dst_port)
            packet.flags = dpkt.tcp.TH_SYN
            packet.seq = self._words.next()
        elif protocol == dpkt.ip.IP_PROTO_UDP:
            packet.src_port = self._port(self.src_port)
            packet.dst_port = self._port(self.dst_port)
        else:
            packet.src_port = self._port(self.src_port)
            packet.seq = self.sent & 0xFFFF
        return packet

    def on_retarget(self, t: int, target: str, window_end: int) -> bool:
        """
        Point the app at ``target`` for the window ending at ``window_end``.

        Returns:
            True if the engine must schedule a send at ``t``
        """
        self.remote_name = target
        self.remote = self.targets[target]
        self.window_end = window_end
        if self.pending:
            return False
        self.pending = True
        return True

    def on_send(self, t: int) -> tuple[Packet | None, int | None]:
        """
        Handle a due send.

        Returns:
            (packet to inject or None, time of the next send or None when idle)
        """
        if self.remote is None or t >= self.window_end:
            self.pending = False
            return None, None
        delay, size = self.next_send_delay()
        packet = self.craft_packet(self.remote, size)
        self.sent += 1
        self.sent_bytes += size
        return packet, t + delay


class BenignApp:
    """HTTP-like client: think, request, receive a burst of responses, repeat."""

    def __init__(self, client: str, src: IPv4Address, servers: list[tuple[str, IPv4Address]],
                 spec: BenignSpec, seed: int):
        self.client = client
        self.src = src
        self.servers = servers
        self.spec = spec
        self._rng = derive_rng(seed, 'benign', client)
        self._next_port = 0
        self.requests = 0

    def next_think(self) -> int:
        """Exponential think time in ns (at least 1 ns)."""
        return max(round_half_up(self._rng.exponential(self.spec.think_time_mean) * NS_PER_SECOND), 1)

    def make_request(self) -> Packet:
        _, server = self.servers[int(self._rng.integers(len(self.servers)))]
        low, high = EPHEMERAL_PORTS
        port = low + self._next_port % (high - low + 1)
        self._next_port += 1
        self.requests += 1
        return Packet(
            src=self.src, dst=server, protocol=dpkt.ip.IP_PROTO_TCP, size=self.spec.request_size,
            src_port=port, dst_port=self.spec.server_port,
            flags=dpkt.tcp.TH_PUSH | dpkt.tcp.TH_ACK, seq=self.requests,
            kind=KIND_REQUEST,
            reply_count=int(self._rng.geometric(1.0 / self.spec.response_packets_mean)),
        )

    def on_flow_start(self, t: int) -> tuple[Packet, int]:
        """Send one request; returns it and the time of the next flow start."""
        return self.make_request(), t + self.next_think()


def make_responses(request: Packet, spec: BenignSpec) -> list[Packet]:
    """Server side of a benign flow: ``request.reply_count`` ACK segments back to the client."""
    return [
        Packet(
            src=request.dst, dst=request.src, protocol=dpkt.ip.IP_PROTO_TCP,
            size=spec.response_packet_size, src_port=request.dst_port, dst_port=request.src_port,
            flags=dpkt.tcp.TH_ACK, seq=index + 1, kind=KIND_RESPONSE,
        )
        for index in range(request.reply_count)
    ]
