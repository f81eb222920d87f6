"""
Schedule Command

Print the first cycle of a scenario's attack timetable and its cycle length.
"""

from django.core.management.base import BaseCommand

from core.cli import load_scenario
from scheduling.formatting import format_table
from scheduling.timetable import build_timetable


class Command(BaseCommand):
    help = 'Print the first-cycle attack timetable and the cycle length C'

    def add_arguments(self, parser):
        parser.add_argument(
            'config',
            help='Scenario YAML file or preset name',
        )

    def handle(self, *args, **options):
        _, cfg = load_scenario(options['config'])
        timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
        self.stdout.write(format_table(timetable), ending='')
