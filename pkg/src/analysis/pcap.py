"""
Pcap Reader

Streams classic pcap files (either byte order, microsecond resolution)
into PacketRecords. Only IPv4 frames become records; anything else is
skipped. Offsets in errors are byte positions within the file.
"""

import logging
from dataclasses import dataclass
from ipaddress import IPv4Address
from pathlib import Path
from typing import Iterator

import dpkt

from .exceptions import MalformedPcap

logger = logging.getLogger('analysis')

MAGIC_LE = b'\xd4\xc3\xb2\xa1'
MAGIC_BE = b'\xa1\xb2\xc3\xd4'
FILE_HEADER_LEN = 24
RECORD_HEADER_LEN = 16
DLT_RAW = (12, 101)
ETHERNET_HEADER_LEN = 14


@dataclass(frozen=True, slots=True)
class PacketRecord:
    """One captured IPv4 packet; ``ts_us`` is the pcap timestamp in microseconds."""
    ts_us: int
    capture: str
    frame_len: int
    ip_len: int
    protocol: int
    src: IPv4Address
    dst: IPv4Address
    src_port: int = 0
    dst_port: int = 0
    flags: int = 0
    raw: bytes | None = None

    @property
    def ts_ns(self) -> int:
        return self.ts_us * 1000


def _decode(buf: bytes, linktype: int):
    if linktype == dpkt.pcap.DLT_EN10MB:
        frame = dpkt.ethernet.Ethernet(buf)
        ip = frame.data
    elif linktype in DLT_RAW:
        ip = dpkt.ip.IP(buf)
    else:
        return None
    return ip if isinstance(ip, dpkt.ip.IP) else None


def _record(ts_us: int, capture: str, buf: bytes, linktype: int, keep_raw: bool) -> PacketRecord | None:
    try:
        ip = _decode(buf, linktype)
    except (dpkt.UnpackError, IndexError):
        return None
    if ip is None:
        return None
    transport = ip.data
    src_port = dst_port = flags = 0
    if isinstance(transport, (dpkt.tcp.TCP, dpkt.udp.UDP)):
        src_port, dst_port = transport.sport, transport.dport
        if isinstance(transport, dpkt.tcp.TCP):
            flags = transport.flags
    raw = None
    if keep_raw:
        start = ETHERNET_HEADER_LEN if linktype == dpkt.pcap.DLT_EN10MB else 0
        raw = bytes(buf[start:start + ip.len])
    return PacketRecord(
        ts_us=ts_us, capture=capture, frame_len=len(buf), ip_len=ip.len, protocol=ip.p,
        src=IPv4Address(ip.src), dst=IPv4Address(ip.dst),
        src_port=src_port, dst_port=dst_port, flags=flags, raw=raw,
    )


def iter_pcap(path: str | Path, keep_raw: bool = False) -> Iterator[PacketRecord]:
    """
    Stream the IPv4 packets of one capture file in file order.

    Args:
        path: Classic pcap file
        keep_raw: Keep the IPv4 bytes on each record (for checksum checks)

    Raises:
        MalformedPcap: Bad global header or a truncated record
    """
    path = Path(path)
    capture = path.name
    with open(path, 'rb') as f:
        head = f.read(FILE_HEADER_LEN)
        if len(head) < FILE_HEADER_LEN:
            raise MalformedPcap(path, 0, f"file header is {len(head)} bytes, expected {FILE_HEADER_LEN}")
        if head[:4] == MAGIC_LE:
            file_header, record_header = dpkt.pcap.LEFileHdr(head), dpkt.pcap.LEPktHdr
        elif head[:4] == MAGIC_BE:
            file_header, record_header = dpkt.pcap.FileHdr(head), dpkt.pcap.PktHdr
        else:
            raise MalformedPcap(path, 0, f"unsupported magic {head[:4].hex()}")
        linktype = file_header.linktype

        offset = FILE_HEADER_LEN
        while True:
            head = f.read(RECORD_HEADER_LEN)
            if not head:
                return
            if len(head) < RECORD_HEADER_LEN:
                raise MalformedPcap(path, offset, "truncated record header")
            header = record_header(head)
            if header.tv_usec >= 1_000_000:
                raise MalformedPcap(path, offset, f"microsecond field {header.tv_usec} out of range")
            buf = f.read(header.caplen)
            if len(buf) < header.caplen:
                raise MalformedPcap(path, offset, f"record data is {len(buf)} of {header.caplen} bytes")
            record = _record(header.tv_sec * 1_000_000 + header.tv_usec, capture, buf, linktype, keep_raw)
            if record is not None:
                yield record
            offset += RECORD_HEADER_LEN + header.caplen


def read_pcap(path: str | Path, keep_raw: bool = False) -> list[PacketRecord]:
    records = list(iter_pcap(path, keep_raw))
    logger.debug(f"Read {len(records)} packets from {path}")
    return records
