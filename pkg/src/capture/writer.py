"""
Capture Points

One classic pcap file per captured link direction. Records are written in
the egress direction of ``from`` toward ``to`` at the instant the first
bit leaves the interface. Frames carry a synthetic Ethernet header built
from the endpoint node ids.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

import dpkt
from django.conf import settings

from core.units import ns_to_pcap_time
from scenario.models import CaptureSpec
from topology.models import Node, Topology

from .exceptions import CaptureWriteError
from .naming import capture_filename

logger = logging.getLogger('capture')

SNAPLEN = 65535
DEFAULT_BUFFER = 1024 * 1024


def node_mac(node_id: int) -> bytes:
    """Locally administered MAC 02:00:00:00:hi:lo for a node id."""
    return bytes((0x02, 0, 0, 0, (node_id >> 8) & 0xFF, node_id & 0xFF))


def ethernet_header(src_id: int, dst_id: int) -> bytes:
    frame = dpkt.ethernet.Ethernet(src=node_mac(src_id), dst=node_mac(dst_id), type=dpkt.ethernet.ETH_TYPE_IP)
    return bytes(frame)


def global_header() -> bytes:
    """24-byte little-endian pcap header: v2.4, snaplen 65535, Ethernet."""
    return bytes(dpkt.pcap.LEFileHdr(snaplen=SNAPLEN, linktype=dpkt.pcap.DLT_EN10MB))


def record_header(t_ns: int, length: int) -> bytes:
    sec, usec = ns_to_pcap_time(t_ns)
    return bytes(dpkt.pcap.LEPktHdr(tv_sec=sec, tv_usec=usec, caplen=length, len=length))


@dataclass
class CapturePoint:
    from_name: str
    to_name: str
    from_id: int
    to_id: int
    path: Path
    packets: int = 0
    bytes: int = 0
    _file: BinaryIO | None = field(default=None, repr=False)
    _ether: bytes = field(default=b'', repr=False)

    @property
    def filename(self) -> str:
        return self.path.name

    def open(self, buffering: int = DEFAULT_BUFFER):
        try:
            self._file = open(self.path, 'wb', buffering=buffering)
            self._file.write(global_header())
        except OSError as e:
            raise CaptureWriteError(self.path, e.strerror or str(e)) from e
        self._ether = ethernet_header(self.from_id, self.to_id)

    def close(self):
        if self._file is None:
            return
        try:
            self._file.close()
        except OSError as e:
            raise CaptureWriteError(self.path, e.strerror or str(e)) from e
        finally:
            self._file = None


def append_packet(point: CapturePoint, t_ns: int, raw: bytes):
    """
    Write one record: pcap record header, Ethernet header, IPv4 bytes.

    Args:
        point: Open capture point
        t_ns: Simulated time of the first bit on the wire
        raw: IPv4 datagram

    Raises:
        CaptureWriteError: The underlying write failed
    """
    frame_len = len(point._ether) + len(raw)
    try:
        point._file.write(record_header(t_ns, frame_len))
        point._file.write(point._ether)
        point._file.write(raw)
    except OSError as e:
        raise CaptureWriteError(point.path, e.strerror or str(e)) from e
    point.packets += 1
    point.bytes += frame_len


def _is_captured(topo: Topology, index: int, spec: CaptureSpec) -> bool:
    return spec.include_as_links or topo.is_cn_link(index)


def select_capture_links(topo: Topology, spec: CaptureSpec) -> list[tuple[Node, Node]]:
    """
    Directed links that get a capture file, in link order.

    CN-CN and CN-gateway links are always captured; gateway-host links
    only with ``include_as_links``. Without ``bidirectional`` only the
    lower-to-higher id direction of each link is kept.
    """
    directions = []
    for link in topo.links:
        if not _is_captured(topo, link.index, spec):
            continue
        low, high = sorted((link.a, link.b))
        directions.append((topo.nodes[low], topo.nodes[high]))
        if spec.bidirectional:
            directions.append((topo.nodes[high], topo.nodes[low]))
    return directions


class CaptureSet:
    """All capture points of one run, keyed by directed (from id, to id)."""

    def __init__(self, points: list[CapturePoint]):
        self.points = points
        self.by_direction = {(p.from_id, p.to_id): p for p in points}

    @classmethod
    def plan(cls, topo: Topology, spec: CaptureSpec, out_dir: Path) -> 'CaptureSet':
        points = [
            CapturePoint(
                from_name=src.name, to_name=dst.name, from_id=src.id, to_id=dst.id,
                path=Path(out_dir) / capture_filename(spec.prefix, src.name, dst.name, spec.suffix),
            )
            for src, dst in select_capture_links(topo, spec)
        ]
        return cls(points)

    def get(self, from_id: int, to_id: int) -> CapturePoint | None:
        return self.by_direction.get((from_id, to_id))

    def open_all(self):
        buffering = getattr(settings, 'PULSEWAVE_CAPTURE_BUFFER_BYTES', DEFAULT_BUFFER)
        for point in self.points:
            point.open(buffering)
        logger.info(f"Opened {len(self.points)} capture files")

    def close_all(self) -> list[CapturePoint]:
        """Close every file; returns the points whose close failed."""
        failed = []
        for point in self.points:
            try:
                point.close()
            except CaptureWriteError as e:
                logger.error(str(e))
                failed.append(point)
        return failed

    def counters(self) -> dict[str, tuple[int, int]]:
        return {p.filename: (p.packets, p.bytes) for p in self.points}

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)
