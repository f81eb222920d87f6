"""
Timetable Formatting

Plain-text rendering shared by the ``schedule`` command and the run log.
"""

from core.units import NS_PER_SECOND

from .timetable import Timetable

COLUMNS = ('vector', 'target', 'on_start_s', 'on_end_s', 'retarget_s')


def format_seconds(ns: int) -> str:
    """Fixed 6-decimal seconds, exact for whole-microsecond instants."""
    sec, rem = divmod(ns, NS_PER_SECOND)
    return f"{sec}.{rem // 1000:06d}"


def timetable_rows(timetable: Timetable) -> list[tuple[str, ...]]:
    rows = []
    for window in timetable.first_cycle():
        rows.append((
            window.vector_id,
            window.target,
            format_seconds(window.start),
            format_seconds(window.end),
            format_seconds(window.start),
        ))
    return rows


def format_table(timetable: Timetable) -> str:
    """
    First-cycle timetable, one row per ON window, followed by C.

    Example output:
    vector  target  on_start_s  on_end_s   retarget_s
    V1      AS2-S0  0.000000    5.000000   0.000000
    cycle_length_s 20.000000
    """
    rows = [COLUMNS] + timetable_rows(timetable)
    widths = [max(len(row[i]) for row in rows) for i in range(len(COLUMNS))]
    lines = ['  '.join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    lines.append(f"cycle_length_s {format_seconds(timetable.cycle_length)}")
    return '\n'.join(lines) + '\n'
