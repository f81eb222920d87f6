"""
Flow Records

Per 5-tuple summaries of a capture (packets, bytes, first and last seen).
"""

from typing import Iterable

import pandas as pd

from traffic.packets import PROTOCOL_NAMES, checksums_ok

from .pcap import PacketRecord

FLOW_KEY = ['src', 'dst', 'protocol', 'src_port', 'dst_port']
FLOW_COLUMNS = FLOW_KEY + ['packets', 'bytes', 'first_seen_s', 'last_seen_s']


def flow_records(records: Iterable[PacketRecord]) -> pd.DataFrame:
    rows = [
        (str(r.src), str(r.dst), PROTOCOL_NAMES.get(r.protocol, str(r.protocol)),
         r.src_port, r.dst_port, r.ip_len, r.ts_us)
        for r in records
    ]
    if not rows:
        return pd.DataFrame(columns=FLOW_COLUMNS)
    df = pd.DataFrame(rows, columns=FLOW_KEY + ['bytes', 'ts_us'])
    flows = df.groupby(FLOW_KEY, sort=True).agg(
        packets=('bytes', 'size'),
        bytes=('bytes', 'sum'),
        first_us=('ts_us', 'min'),
        last_us=('ts_us', 'max'),
    ).reset_index()
    flows['first_seen_s'] = flows['first_us'] / 1e6
    flows['last_seen_s'] = flows['last_us'] / 1e6
    return flows[FLOW_COLUMNS]


def verify_checksums(records: Iterable[PacketRecord]) -> int:
    """
    Count records whose IPv4 or transport checksum fails.

    Raises:
        ValueError: A record was read without its raw bytes
    """
    failures = 0
    for record in records:
        if record.raw is None:
            raise ValueError("records must be read with keep_raw=True to verify checksums")
        if not checksums_ok(record.raw):
            failures += 1
    return failures
