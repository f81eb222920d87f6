"""
Binned Time Series

Half-open bins [k*w, (k+1)*w) aligned to t=0 and contiguous from bin 0 to
the last non-empty bin. Grouped series carry every group in every bin
(zero-filled), so summing the groups gives the ungrouped series.
"""

from dataclasses import dataclass
from typing import Callable, Iterable

import pandas as pd

from traffic.packets import PROTOCOL_NAMES

from .pcap import PacketRecord

COLUMNS = ['bin', 'group', 'bytes', 'packets']
GROUP_ALL = 'all'

GROUP_KEYS: dict[str, Callable[[PacketRecord], str]] = {
    'protocol': lambda r: PROTOCOL_NAMES.get(r.protocol, str(r.protocol)),
    'src': lambda r: str(r.src),
    'dst': lambda r: str(r.dst),
    'dst_port': lambda r: str(r.dst_port),
    'capture': lambda r: r.capture,
}


def _empty_frame() -> pd.DataFrame:
    return pd.DataFrame({
        'bin': pd.Series(dtype='int64'),
        'group': pd.Series(dtype=object),
        'bytes': pd.Series(dtype='int64'),
        'packets': pd.Series(dtype='int64'),
    })


def normalize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Column order, dtypes, (bin, group) sort order and a fresh index."""
    if frame.empty:
        return _empty_frame()
    frame = frame[COLUMNS].astype({'bin': 'int64', 'group': object, 'bytes': 'int64', 'packets': 'int64'})
    return frame.sort_values(['bin', 'group'], kind='stable').reset_index(drop=True)


@dataclass(eq=False)
class TimeSeries:
    bin_ns: int
    frame: pd.DataFrame

    @property
    def bin_seconds(self) -> float:
        return self.bin_ns / 1e9

    @property
    def groups(self) -> list[str]:
        return sorted(self.frame['group'].unique()) if not self.frame.empty else []

    @property
    def bin_count(self) -> int:
        return int(self.frame['bin'].max()) + 1 if not self.frame.empty else 0

    def is_empty(self) -> bool:
        return self.frame.empty

    def totals(self) -> pd.DataFrame:
        """Ungrouped bytes and packets per bin, indexed by bin."""
        return self.frame.groupby('bin')[['bytes', 'packets']].sum()

    def rate_bps(self, group: str | None = None) -> pd.Series:
        """Bits per second per bin, for one group or all of them."""
        if group is None:
            data = self.totals()['bytes']
        else:
            data = self.frame[self.frame['group'] == group].set_index('bin')['bytes']
        return data * 8 / self.bin_seconds

    def rows(self) -> list[tuple[int, str, int, int]]:
        return [(int(b), str(g), int(by), int(p)) for b, g, by, p in self.frame[COLUMNS].itertuples(index=False)]

    def __eq__(self, other):
        return isinstance(other, TimeSeries) and self.bin_ns == other.bin_ns and self.rows() == other.rows()

    def __len__(self):
        return len(self.frame)


def bin_timeseries(records: Iterable[PacketRecord], bin_ns: int,
                   group_by: str | Callable[[PacketRecord], str] | None = None) -> TimeSeries:
    """
    Bin packet records by capture timestamp.

    Args:
        records: Packet records (any order)
        bin_ns: Bin width in nanoseconds
        group_by: None, a key of GROUP_KEYS, or a record -> label callable

    Returns:
        TimeSeries with one row per (bin, group)
    """
    if bin_ns <= 0:
        raise ValueError(f"bin width must be positive, got {bin_ns} ns")
    if group_by is None:
        key = None
    elif callable(group_by):
        key = group_by
    else:
        key = GROUP_KEYS[group_by]

    bins, groups, sizes = [], [], []
    for record in records:
        bins.append(record.ts_ns // bin_ns)
        groups.append(key(record) if key else GROUP_ALL)
        sizes.append(record.ip_len)
    if not bins:
        return TimeSeries(bin_ns, _empty_frame())

    df = pd.DataFrame({'bin': bins, 'group': groups, 'bytes': sizes})
    grouped = df.groupby(['bin', 'group']).agg(bytes=('bytes', 'sum'), packets=('bytes', 'size'))
    full = pd.MultiIndex.from_product([range(max(bins) + 1), sorted(set(groups))], names=['bin', 'group'])
    grouped = grouped.reindex(full, fill_value=0).reset_index()
    return TimeSeries(bin_ns, normalize_frame(grouped))
