"""
Analyze Command

Bin capture files into rate time series (CSV and/or SVG), optionally with
flow records and, given the scenario, a per-vector composition.
"""

import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from analysis.composition import vector_signatures
from analysis.exceptions import MalformedPcap
from analysis.export import write_flows_csv, write_timeseries_csv, write_timeseries_svg
from analysis.load import LoadModel, direction_of_capture, hop_for_direction
from analysis.services import GROUP_VECTOR, AnalysisOptions, FileAnalysis, analyze_files
from analysis.timeseries import GROUP_KEYS
from capture.exceptions import CaptureWriteError
from core.cli import EXIT_FINDINGS, EXIT_IO, EXIT_USAGE, io_error, load_scenario
from scheduling.timetable import build_timetable
from topology.builder import build_topology

logger = logging.getLogger('commands')

FORMATS = ('csv', 'svg', 'both')
COMPOSITION_COLUMNS = 'capture,vector,packets,bytes,active_s,avg_rate_bps,avg_pps'


class Command(BaseCommand):
    help = 'Analyze pcap files: binned rate series, flows and attack composition'

    def add_arguments(self, parser):
        parser.add_argument(
            'pcaps',
            nargs='+',
            type=Path,
            help='Capture files to analyze',
        )
        parser.add_argument(
            '-o', '--out',
            type=Path,
            help='Output directory (default: next to each pcap)',
        )
        parser.add_argument(
            '--bin-ms',
            type=int,
            default=None,
            help='Bin width in milliseconds (default: PULSEWAVE_DEFAULT_BIN_MS)',
        )
        parser.add_argument(
            '--format',
            choices=FORMATS,
            default='csv',
            help='Series export format',
        )
        parser.add_argument(
            '--group-by',
            choices=sorted(GROUP_KEYS) + [GROUP_VECTOR],
            help='Split each series by a packet attribute, or by attack vector (needs --config)',
        )
        parser.add_argument(
            '--config',
            help='Scenario the captures came from; enables composition and expected load',
        )
        parser.add_argument(
            '--flows',
            action='store_true',
            help='Also write per 5-tuple flow records',
        )
        parser.add_argument(
            '--verify',
            action='store_true',
            help='Check IPv4 and transport checksums of every packet',
        )
        parser.add_argument(
            '--jobs',
            type=int,
            default=1,
            help='Worker processes for reading captures',
        )

    def handle(self, *args, **options):
        bin_ms = settings.PULSEWAVE_DEFAULT_BIN_MS if options['bin_ms'] is None else options['bin_ms']
        if bin_ms <= 0:
            raise CommandError(f"--bin-ms must be positive, got {bin_ms}", returncode=EXIT_USAGE)
        if options['group_by'] == GROUP_VECTOR and not options['config']:
            raise CommandError("--group-by vector needs --config", returncode=EXIT_USAGE)
        if options['jobs'] < 1:
            raise CommandError(f"--jobs must be at least 1, got {options['jobs']}", returncode=EXIT_USAGE)
        for path in options['pcaps']:
            if not path.is_file():
                raise CommandError(f"no such capture file: {path}", returncode=EXIT_IO)

        load = None
        scenario = {}
        if options['config']:
            _, cfg = load_scenario(options['config'])
            timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
            topo = build_topology(cfg)
            scenario = {
                'signatures': tuple(vector_signatures(cfg)),
                'timetable': timetable,
                'targets': {name: topo.host_address(topo.node_id(name)) for name in cfg.targets},
            }
            load = LoadModel(cfg, topo, timetable)
        analysis_options = AnalysisOptions(
            bin_ns=bin_ms * 1_000_000,
            group_by=options['group_by'],
            flows=options['flows'],
            verify=options['verify'],
            **scenario,
        )

        try:
            results = analyze_files(options['pcaps'], analysis_options, options['jobs'])
        except MalformedPcap as e:
            raise CommandError(str(e), returncode=EXIT_FINDINGS) from e
        except OSError as e:
            raise io_error(e.filename, e) from e

        findings = 0
        if load is not None:
            self.stdout.write(COMPOSITION_COLUMNS)
        for result in results:
            try:
                self._export(result, options, load)
            except CaptureWriteError as e:
                raise CommandError(str(e), returncode=EXIT_IO) from e
            except OSError as e:
                raise io_error(e.filename, e) from e
            if result.composition is not None:
                self._print_composition(result)
            for warning in result.warnings:
                self.stderr.write(f"{result.path.name}: {warning}")
                findings += 1
            if result.checksum_failures:
                self.stderr.write(f"{result.path.name}: {result.checksum_failures} packet(s) with bad checksums")
                findings += 1

        if findings:
            raise CommandError(f"{findings} analysis finding(s)", returncode=EXIT_FINDINGS)

    def _export(self, result: FileAnalysis, options: dict, load: LoadModel | None):
        out_dir = options['out'] or result.path.parent
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = result.path.stem
        written = []
        if options['format'] in ('csv', 'both'):
            written.append(write_timeseries_csv(result.series, out_dir / f"{stem}.csv"))
        if options['format'] in ('svg', 'both'):
            expected = self._expected(result, load)
            written.append(write_timeseries_svg(result.series, out_dir / f"{stem}.svg", stem, expected))
        if result.flows is not None:
            written.append(write_flows_csv(result.flows, out_dir / f"{stem}__flows.csv"))
        for path in written:
            logger.info(f"Wrote {path}")

    @staticmethod
    def _expected(result: FileAnalysis, load: LoadModel | None):
        if load is None:
            return None
        try:
            hop = hop_for_direction(load.topo, direction_of_capture(result.path.name))
        except KeyError:
            logger.warning(f"{result.path.name}: no link matches the file name, skipping expected load")
            return None
        bins = max(result.series.bin_count, -(-load.timetable.duration // result.series.bin_ns))
        return load.binned(hop, result.series.bin_ns, bins)

    def _print_composition(self, result: FileAnalysis):
        for vector in result.composition.vectors.values():
            self.stdout.write(','.join([
                result.path.name, vector.vector_id, str(vector.packets), str(vector.bytes),
                f"{vector.active_seconds:.6f}", f"{vector.avg_rate_bps:.1f}", f"{vector.avg_pps:.1f}",
            ]))
