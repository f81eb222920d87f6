import hashlib
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from capture.runlog import read_run_log
from engine.tests import ATTACK_SCENARIO
from scenario.parser import load_config, resolve_preset
from scheduling.formatting import format_seconds
from scheduling.timetable import compute_cycle_length

from .cli import EXIT_FINDINGS, EXIT_IO, EXIT_USAGE


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def call(self, *args):
        stdout, stderr = StringIO(), StringIO()
        call_command(*args, stdout=stdout, stderr=stderr)
        return stdout.getvalue(), stderr.getvalue()

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception

    def write(self, name, text):
        path = self.root / name
        path.write_text(text)
        return str(path)


class ValidateCommandTests(CommandTestCase):
    def test_valid_preset(self):
        with self.assertLogs('commands', 'INFO') as logs:
            stdout, _ = self.call('validate', 'dist')

        self.assertIn('ok', stdout)
        self.assertIn('Validated 1 scenario(s), 0 invalid', logs.output[-1])

    def test_every_preset_is_valid(self):
        presets = sorted(p.stem for p in resolve_preset('dist').parent.glob('*.yaml'))
        stdout, _ = self.call('validate', *presets)

        self.assertEqual(len(stdout.splitlines()), len(presets))

    def test_error_findings_exit_one(self):
        path = self.write('bad.yaml', ATTACK_SCENARIO.replace('targets: [AS2-S0, AS2-S1]', 'targets: [AS2-S9]'))
        stderr = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('validate', path, stdout=StringIO(), stderr=stderr)

        self.assertEqual(ctx.exception.returncode, EXIT_FINDINGS)
        self.assertIn('[error]', stderr.getvalue())

    def test_parse_error_exit_one(self):
        self.assertExitCode(EXIT_FINDINGS, 'validate', self.write('typo.yaml', 'name: X\nduraton: 1s\n'))

    def test_missing_file_exit_three(self):
        self.assertExitCode(EXIT_IO, 'validate', str(self.root / 'nope.yaml'))


class ScheduleCommandTests(CommandTestCase):
    def test_cycle_length_matches_formula(self):
        cfg = load_config(resolve_preset('var1'))
        stdout, _ = self.call('schedule', 'var1')
        expected = round(compute_cycle_length(cfg.vectors, len(cfg.targets)) * 1e9)

        self.assertEqual(stdout.splitlines()[-1], f"cycle_length_s {format_seconds(expected)}")
        self.assertEqual(stdout.splitlines()[-1], 'cycle_length_s 20.000000')
        self.assertEqual(len(stdout.splitlines()), 1 + 4 + 1)


class RunCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.config = self.write('eng.yaml', ATTACK_SCENARIO)

    def test_rerun_gives_identical_captures(self):
        first, second = self.root / 'a', self.root / 'b'
        self.call('run', self.config, '-o', str(first), '--seed', '7')
        self.call('run', self.config, '-o', str(second), '--seed', '7')
        pcaps = sorted(p.name for p in first.glob('*.pcap'))

        self.assertTrue(pcaps)
        self.assertEqual(pcaps, sorted(p.name for p in second.glob('*.pcap')))
        for name in pcaps:
            self.assertEqual(digest(first / name), digest(second / name), name)

    def test_seed_override_and_timetable_in_run_log(self):
        out = self.root / 'out'
        stdout, _ = self.call('run', self.config, '-o', str(out), '--seed', '7')
        schedule, _ = self.call('schedule', self.config)
        log = Path(stdout.splitlines()[-1])
        sections = read_run_log(log)

        self.assertEqual(sections['seed'], ['7'])
        self.assertEqual([line for line in sections['timetable'] if line], schedule.splitlines())
        self.assertTrue(all(Path(line).exists() for line in stdout.splitlines()))

    def test_refuses_non_empty_output_without_force(self):
        out = self.root / 'out'
        out.mkdir()
        (out / 'keep.txt').write_text('x')

        self.assertExitCode(EXIT_USAGE, 'run', self.config, '-o', str(out))
        self.call('run', self.config, '-o', str(out), '--force')
        self.assertTrue((out / 'keep.txt').exists())
        self.assertTrue(list(out.glob('ENG__*.pcap')))

    def test_invalid_scenario(self):
        self.assertExitCode(EXIT_FINDINGS, 'run', self.write('typo.yaml', 'name: X\nduraton: 1s\n'))


class AnalyzeCommandTests(CommandTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.run_dir = tempfile.TemporaryDirectory()
        root = Path(cls.run_dir.name)
        cls.config = root / 'eng.yaml'
        cls.config.write_text(ATTACK_SCENARIO)
        call_command('run', str(cls.config), '-o', str(root / 'caps'), stdout=StringIO(), stderr=StringIO())
        cls.pcaps = sorted(str(p) for p in (root / 'caps').glob('*.pcap'))

    @classmethod
    def tearDownClass(cls):
        cls.run_dir.cleanup()
        super().tearDownClass()

    def test_series_exports(self):
        out = self.root / 'series'
        self.call('analyze', *self.pcaps[:2], '-o', str(out), '--format', 'both', '--flows')

        for pcap in self.pcaps[:2]:
            stem = Path(pcap).stem
            self.assertTrue((out / f"{stem}.csv").exists())
            self.assertTrue((out / f"{stem}.svg").exists())
            self.assertTrue((out / f"{stem}__flows.csv").exists())

    def test_bin_width_sets_row_count(self):
        out = self.root / 'series'
        self.call('analyze', self.pcaps[0], '-o', str(out), '--bin-ms', '1000')
        lines = (out / f"{Path(self.pcaps[0]).stem}.csv").read_text().splitlines()

        self.assertEqual(lines[0], 'bin_start_s,group,bytes,packets')
        self.assertLessEqual(len(lines) - 1, 5)
        self.assertEqual(lines[1].split(',')[0], '0.000000000')

    def test_composition_with_scenario(self):
        out = self.root / 'series'
        stdout, _ = self.call('analyze', *self.pcaps, '-o', str(out), '--config', str(self.config),
                              '--group-by', 'vector', '--verify', '--format', 'svg', '--jobs', '2')
        rows = stdout.splitlines()

        self.assertEqual(rows[0], 'capture,vector,packets,bytes,active_s,avg_rate_bps,avg_pps')
        self.assertEqual(len(rows), 1 + 2 * len(self.pcaps))
        self.assertEqual(len(list(out.glob('*.svg'))), len(self.pcaps))

    def test_usage_errors(self):
        self.assertExitCode(EXIT_USAGE, 'analyze', self.pcaps[0], '--group-by', 'vector')
        self.assertExitCode(EXIT_USAGE, 'analyze', self.pcaps[0], '--bin-ms', '0')

    def test_missing_capture(self):
        self.assertExitCode(EXIT_IO, 'analyze', str(self.root / 'gone.pcap'))

    def test_malformed_capture(self):
        bogus = self.write('bogus.pcap', 'not a pcap at all, clearly')

        self.assertExitCode(EXIT_FINDINGS, 'analyze', bogus, '-o', str(self.root))
