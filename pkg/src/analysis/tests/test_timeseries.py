import tempfile
from pathlib import Path

import dpkt
import numpy as np
from django.test import SimpleTestCase, override_settings

from capture.exceptions import CaptureWriteError

from ..export import format_bin_start, read_timeseries_csv, timeseries_to_csv, write_timeseries_csv, \
    write_timeseries_svg
from ..timeseries import GROUP_ALL, bin_timeseries
from .helpers import benign_record, make_record

BIN_100MS = 100_000_000


class BinTimeSeriesTests(SimpleTestCase):
    def test_empty_input(self):
        series = bin_timeseries([], BIN_100MS)

        self.assertTrue(series.is_empty())
        self.assertEqual(series.bin_count, 0)
        self.assertEqual(timeseries_to_csv(series), 'bin_start_s,group,bytes,packets\n')

    def test_bins_are_half_open(self):
        records = [make_record(0), make_record(99_999), make_record(100_000)]
        series = bin_timeseries(records, BIN_100MS)

        self.assertEqual(series.rows(), [(0, GROUP_ALL, 192, 2), (1, GROUP_ALL, 96, 1)])

    def test_gaps_are_zero_filled(self):
        series = bin_timeseries([make_record(0), make_record(350_000)], BIN_100MS)

        self.assertEqual([row[3] for row in series.rows()], [1, 0, 0, 1])

    def test_groups_sum_to_ungrouped(self):
        records = [make_record(t * 7_000) for t in range(50)]
        records += [benign_record(t * 11_000) for t in range(30)]
        records += [make_record(5_000, dpkt.ip.IP_PROTO_ICMP, 128)]
        plain = bin_timeseries(records, BIN_100MS)
        grouped = bin_timeseries(records, BIN_100MS, 'protocol')

        self.assertEqual(grouped.groups, ['ICMP', 'TCP', 'UDP'])
        self.assertEqual(len(grouped), 3 * grouped.bin_count)
        self.assertTrue(grouped.totals().equals(plain.totals()))

    def test_rate_in_bits_per_second(self):
        series = bin_timeseries([make_record(t) for t in range(10)], BIN_100MS)

        self.assertEqual(series.rate_bps().tolist(), [960 * 8 / 0.1])

    def test_callable_group_key(self):
        def parity(record):
            return 'odd' if record.dst_port % 2 else 'even'

        series = bin_timeseries([make_record(0), benign_record(0)], BIN_100MS, parity)

        self.assertEqual(series.groups, ['even', 'odd'])

    def test_rejects_non_positive_bin(self):
        with self.assertRaises(ValueError):
            bin_timeseries([make_record(0)], 0)


class CsvExportTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_bin_start_is_exact(self):
        self.assertEqual(format_bin_start(0), '0.000000000')
        self.assertEqual(format_bin_start(2_300_000_001), '2.300000001')

    def test_three_bins_give_header_plus_three_lines(self):
        series = bin_timeseries([make_record(0), make_record(250_000)], BIN_100MS)
        lines = timeseries_to_csv(series).splitlines()

        self.assertEqual(lines, [
            'bin_start_s,group,bytes,packets',
            '0.000000000,all,96,1',
            '0.100000000,all,0,0',
            '0.200000000,all,96,1',
        ])

    def test_grouped_rows_per_bin_and_group(self):
        series = bin_timeseries([make_record(0), benign_record(150_000)], BIN_100MS, 'protocol')
        lines = timeseries_to_csv(series).splitlines()[1:]

        self.assertEqual(lines, [
            '0.000000000,TCP,0,0',
            '0.000000000,UDP,96,1',
            '0.100000000,TCP,1500,1',
            '0.100000000,UDP,0,0',
        ])

    def test_reimport_reproduces_series(self):
        records = [make_record(t * 3_001) for t in range(400)] + [benign_record(t * 9_000) for t in range(100)]
        series = bin_timeseries(records, 10_000_000, 'protocol')
        path = write_timeseries_csv(series, Path(self.tmp.name) / 'series.csv')

        self.assertEqual(read_timeseries_csv(path), series)

    def test_single_bin_uses_configured_width(self):
        series = bin_timeseries([make_record(10)], BIN_100MS)
        path = write_timeseries_csv(series, Path(self.tmp.name) / 'one.csv')

        self.assertEqual(read_timeseries_csv(path), series)

    @override_settings(PULSEWAVE_DEFAULT_BIN_MS=10)
    def test_single_bin_follows_default_setting(self):
        series = bin_timeseries([make_record(10)], 10_000_000)
        path = write_timeseries_csv(series, Path(self.tmp.name) / 'one.csv')

        self.assertEqual(read_timeseries_csv(path), series)
        self.assertEqual(read_timeseries_csv(path, BIN_100MS).bin_ns, BIN_100MS)

    def test_empty_capture_round_trip(self):
        series = bin_timeseries([], BIN_100MS)
        path = write_timeseries_csv(series, Path(self.tmp.name) / 'empty.csv')
        loaded = read_timeseries_csv(path)

        self.assertTrue(loaded.is_empty())
        self.assertEqual(loaded, series)

    def test_unwritable_path(self):
        series = bin_timeseries([make_record(0)], BIN_100MS)

        with self.assertRaises(CaptureWriteError):
            write_timeseries_csv(series, Path(self.tmp.name) / 'missing' / 'series.csv')


class SvgExportTests(SimpleTestCase):
    def test_plot_with_expected_overlay(self):
        series = bin_timeseries([make_record(t * 1_000) for t in range(500)], BIN_100MS, 'protocol')
        with tempfile.TemporaryDirectory() as tmp:
            path = write_timeseries_svg(series, Path(tmp) / 'plot.svg', 'CN0-to-CN1', np.full(5, 7680.0))
            text = path.read_text()

        self.assertTrue(text.startswith('<svg'))
        self.assertIn('CN0-to-CN1', text)
        self.assertIn('expected', text)
        self.assertIn('stroke-dasharray="8 6"', text)
