"""
Time and rate units.

Simulated time is carried as integer nanoseconds; configuration and reports
speak seconds and bits per second.
"""

import math
from decimal import ROUND_HALF_UP, Decimal

NS_PER_SECOND = 1_000_000_000
NS_PER_USEC = 1_000


def seconds_to_ns(seconds: float) -> int:
    """Convert seconds to integer nanoseconds (round half up)."""
    return int(Decimal(repr(float(seconds))).scaleb(9).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def ns_to_seconds(ns: int) -> float:
    return ns / NS_PER_SECOND


def round_half_up(value: float) -> int:
    """Round a non-negative value to the nearest integer, halves up."""
    return math.floor(value + 0.5)


def ns_to_pcap_time(ns: int) -> tuple[int, int]:
    """
    Split a nanosecond timestamp into pcap (seconds, microseconds).

    Microseconds are rounded half up; a carry into the next second is
    folded back into the seconds field.
    """
    sec, rem = divmod(ns, NS_PER_SECOND)
    usec = (rem + NS_PER_USEC // 2) // NS_PER_USEC
    if usec >= 1_000_000:
        sec += 1
        usec -= 1_000_000
    return sec, usec


def serialization_ns(size_bytes: int, rate_bps: float) -> int:
    """Time to clock ``size_bytes`` onto a link of ``rate_bps``."""
    bits_ns = size_bytes * 8 * NS_PER_SECOND
    rate = int(rate_bps)
    if rate == rate_bps:
        # exact integer rounding for whole-number link rates
        return (2 * bits_ns + rate) // (2 * rate)
    return round_half_up(bits_ns / rate_bps)
