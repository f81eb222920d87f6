"""
Validate Command

Check scenario files and list every finding on stderr.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from core.cli import EXIT_FINDINGS, io_error
from scenario.exceptions import ParseError
from scenario.parser import load_config, resolve_preset
from scenario.validation import validate

logger = logging.getLogger('commands')


class Command(BaseCommand):
    help = 'Validate scenario files (paths or preset names); exit 1 on any error finding'

    def add_arguments(self, parser):
        parser.add_argument(
            'configs',
            nargs='+',
            help='Scenario YAML files or preset names',
        )

    def handle(self, *args, **options):
        failed = 0
        for name in options['configs']:
            path = resolve_preset(name)
            try:
                cfg = load_config(path, check=False)
            except OSError as e:
                raise io_error(path, e) from e
            except ParseError as e:
                self.stderr.write(f"{path}: [error] {e}")
                failed += 1
                continue

            report = validate(cfg)
            for finding in report.findings:
                self.stderr.write(f"{path}: {finding}")
            if not report.ok:
                failed += 1
                continue
            self.stdout.write(f"{path}: ok ({len(report.warnings)} warnings)")

        logger.info(f"Validated {len(options['configs'])} scenario(s), {failed} invalid")
        if failed:
            raise CommandError(f"{failed} of {len(options['configs'])} scenario(s) invalid", returncode=EXIT_FINDINGS)
