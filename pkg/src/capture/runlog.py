"""
Run Log

Plain-text reproduction trail of one run, written next to the capture
files. Sections open with ``[name]`` lines. Every value that depends on
the host rather than on (scenario, seed) sits on a line starting with
``wall_clock`` so two logs of the same run compare equal once those lines
are dropped.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING

from scenario.models import ScenarioConfig
from scenario.parser import serialize
from scheduling.formatting import format_table
from scheduling.timetable import Timetable
from topology.builder import dump_edge_list
from topology.models import Topology

from .exceptions import CaptureWriteError
from .naming import check_token

if TYPE_CHECKING:
    from engine.report import RunReport

logger = logging.getLogger('capture')

HEADER = '# pulse-wave run log'
WALL_CLOCK = 'wall_clock'


def run_log_filename(prefix: str, suffix: str) -> str:
    return f"{check_token(prefix)}__run__{check_token(suffix)}.log"


def render_run_log(cfg: ScenarioConfig, topo: Topology, timetable: Timetable, report: 'RunReport') -> str:
    partial = set(report.partial_files)
    lines = [HEADER, '[scenario]', serialize(cfg).rstrip('\n'), '[seed]', str(cfg.seed)]

    lines.append('[topology]')
    lines.append(dump_edge_list(topo).rstrip('\n'))

    lines.append('[timetable]')
    lines.append(format_table(timetable))

    lines.append('[captures]')
    for filename, (packets, size) in report.capture_counters.items():
        flag = ' partial' if filename in partial else ''
        lines.append(f"{filename} packets={packets} bytes={size}{flag}")

    lines.append('[links]')
    for direction, counters in report.links.items():
        lines.append(f"{direction} tx={counters.tx} rx={counters.rx} drop={counters.drop} tx_bytes={counters.tx_bytes}")

    lines.append('[run]')
    lines.append(f"events {report.events}")
    lines.append(f"attack_packets {report.attack_packets}")
    lines.append(f"benign_packets {report.benign_packets}")
    for vector_id, sent in report.vector_sent.items():
        lines.append(f"sent {vector_id} {sent} bytes={report.vector_bytes.get(vector_id, 0)}")
    lines.append(f"aborted {'true' if report.aborted else 'false'}")
    if report.started_at is not None:
        lines.append(f"{WALL_CLOCK}_started {report.started_at.isoformat()}")
    lines.append(f"{WALL_CLOCK}_runtime_s {report.wall_clock:.3f}")
    return '\n'.join(lines) + '\n'


def write_run_log(cfg: ScenarioConfig, topo: Topology, timetable: Timetable, report: 'RunReport',
                  out_dir: Path) -> Path:
    """
    Write the run log into ``out_dir``.

    Returns:
        Path of the log file

    Raises:
        CaptureWriteError: The log could not be written
    """
    path = Path(out_dir) / run_log_filename(cfg.capture.prefix, cfg.capture.suffix)
    try:
        path.write_text(render_run_log(cfg, topo, timetable, report), encoding='utf-8')
    except OSError as e:
        raise CaptureWriteError(path, e.strerror or str(e)) from e
    logger.info(f"Run log written to {path}")
    return path


def read_run_log(path: Path) -> dict[str, list[str]]:
    """Split a run log into its sections (lines without the ``[name]`` header)."""
    sections: dict[str, list[str]] = {}
    current = None
    for line in Path(path).read_text(encoding='utf-8').splitlines():
        if line.startswith('[') and line.endswith(']') and ' ' not in line:
            current = line[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    return sections


def capture_counters(sections: dict[str, list[str]]) -> dict[str, int]:
    """Packet counter per capture file from a parsed run log."""
    counters = {}
    for line in sections.get('captures', []):
        filename, packets, *_ = line.split()
        counters[filename] = int(packets.removeprefix('packets='))
    return counters


def strip_wall_clock(text: str) -> str:
    return '\n'.join(line for line in text.splitlines() if not line.startswith(WALL_CLOCK))
