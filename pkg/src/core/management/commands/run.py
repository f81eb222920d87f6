"""
Run Command

Simulate a scenario and write its capture files and run log.
"""

import logging
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from capture.exceptions import CaptureWriteError
from core.cli import EXIT_IO, EXIT_USAGE, io_error, load_scenario
from engine.simulator import run

logger = logging.getLogger('commands')


class Command(BaseCommand):
    help = 'Run a scenario and write one pcap per capture point plus the run log'

    def add_arguments(self, parser):
        parser.add_argument(
            'config',
            help='Scenario YAML file or preset name',
        )
        parser.add_argument(
            '-o', '--out',
            type=Path,
            help='Output directory (default: PULSEWAVE_OUTPUT_DIR/<scenario name>)',
        )
        parser.add_argument(
            '--seed',
            type=int,
            help='Override the scenario seed',
        )
        parser.add_argument(
            '--force',
            action='store_true',
            help='Write into a non-empty output directory',
        )

    def handle(self, *args, **options):
        _, cfg = load_scenario(options['config'])
        if options['seed'] is not None:
            cfg = replace(cfg, seed=options['seed'])

        out_dir = options['out'] or Path(settings.PULSEWAVE_OUTPUT_DIR) / cfg.name
        try:
            if out_dir.exists() and any(out_dir.iterdir()) and not options['force']:
                raise CommandError(f"{out_dir} is not empty; pass --force to write into it", returncode=EXIT_USAGE)
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise io_error(out_dir, e) from e

        try:
            report = run(cfg, out_dir)
        except CaptureWriteError as e:
            raise CommandError(str(e), returncode=EXIT_IO) from e

        for filename in report.capture_counters:
            self.stdout.write(str(out_dir / filename))
        self.stdout.write(str(report.run_log))
