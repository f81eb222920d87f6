"""
Analysis Services

Per-file analysis (read, bin, compose, summarize flows, verify checksums)
and the fan-out over many capture files. Files are independent, so a
process pool can take them in parallel.
"""

import logging
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from multiprocessing import Pool
from pathlib import Path
from typing import Callable

import pandas as pd

from scheduling.timetable import Timetable

from .composition import Attributor, CompositionReport, VectorSignature, composition_report
from .flows import flow_records, verify_checksums
from .pcap import read_pcap
from .timeseries import TimeSeries, bin_timeseries

logger = logging.getLogger('analysis')

GROUP_VECTOR = 'vector'


@dataclass(frozen=True)
class AnalysisOptions:
    bin_ns: int
    group_by: str | None = None
    signatures: tuple[VectorSignature, ...] = ()
    timetable: Timetable | None = None
    targets: dict[str, IPv4Address] | None = None
    flows: bool = False
    verify: bool = False


@dataclass
class FileAnalysis:
    path: Path
    packets: int
    series: TimeSeries
    composition: CompositionReport | None = None
    flows: pd.DataFrame | None = None
    checksum_failures: int | None = None
    warnings: list = field(default_factory=list)


def _group_key(options: AnalysisOptions) -> str | Callable | None:
    if options.group_by != GROUP_VECTOR:
        return options.group_by
    return Attributor(list(options.signatures), options.timetable).label


def analyze_file(path: Path, options: AnalysisOptions) -> FileAnalysis:
    """
    Analyze one capture file.

    Raises:
        MalformedPcap: The file is not a readable classic pcap
    """
    records = read_pcap(path, keep_raw=options.verify)
    result = FileAnalysis(
        path=Path(path),
        packets=len(records),
        series=bin_timeseries(records, options.bin_ns, _group_key(options)),
    )
    if options.signatures:
        result.composition = composition_report(
            records, list(options.signatures), options.timetable, options.targets, options.bin_ns,
        )
        result.warnings.extend(result.composition.warnings)
    if options.flows:
        result.flows = flow_records(records)
    if options.verify:
        result.checksum_failures = verify_checksums(records)
    logger.info(f"{Path(path).name}: {result.packets} packets, {result.series.bin_count} bins")
    return result


def _analyze(job: tuple[Path, AnalysisOptions]) -> FileAnalysis:
    return analyze_file(*job)


def analyze_files(paths: list[Path], options: AnalysisOptions, jobs: int = 1) -> list[FileAnalysis]:
    """Analyze capture files in input order, with ``jobs`` worker processes when > 1."""
    work = [(Path(path), options) for path in paths]
    if jobs <= 1 or len(work) <= 1:
        return [_analyze(job) for job in work]
    with Pool(processes=min(jobs, len(work))) as pool:
        return pool.map(_analyze, work)
