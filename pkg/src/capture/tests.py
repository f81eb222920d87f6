import struct
import tempfile
from dataclasses import replace
from pathlib import Path

import dpkt
from django.test import SimpleTestCase

from scenario.parser import load_config, resolve_preset
from topology.builder import build_topology

from .exceptions import InvalidToken
from .naming import capture_filename
from .runlog import capture_counters, read_run_log, run_log_filename, strip_wall_clock
from .writer import CapturePoint, CaptureSet, append_packet, node_mac, select_capture_links


class CaptureFilenameTests(SimpleTestCase):
    def test_cn_link(self):
        self.assertEqual(capture_filename('DIST', 'CN3', 'CN5', 'cap'), 'DIST__CN3-to-CN5__cap.pcap')

    def test_gateway_link(self):
        self.assertEqual(capture_filename('VAR1', 'AS2-GW', 'CN0', 'cap'), 'VAR1__AS2-GW-to-CN0__cap.pcap')

    def test_separator_in_token(self):
        for bad in ('CN__3', '', 'CN 3', 'a/b', 'x_y'):
            with self.subTest(bad=bad), self.assertRaises(InvalidToken):
                capture_filename('DIST', bad, 'CN5', 'cap')

    def test_run_log_name(self):
        self.assertEqual(run_log_filename('VAR1', 'cap'), 'VAR1__run__cap.log')


class AppendPacketTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.point = CapturePoint('CN0', 'CN1', 0, 258, Path(self.tmp.name) / 'T__CN0-to-CN1__cap.pcap')

    def test_empty_capture_is_global_header_only(self):
        self.point.open()
        self.point.close()
        data = self.point.path.read_bytes()

        self.assertEqual(len(data), 24)
        magic, major, minor, zone, sigfigs, snaplen, linktype = struct.unpack('<IHHiIII', data)
        self.assertEqual((magic, major, minor, zone, sigfigs), (0xA1B2C3D4, 2, 4, 0, 0))
        self.assertEqual((snaplen, linktype), (65535, 1))

    def test_record_layout_and_timestamp_rounding(self):
        raw = bytes(42)
        self.point.open()
        append_packet(self.point, 1_500_000_500, raw)
        self.point.close()
        data = self.point.path.read_bytes()[24:]

        sec, usec, caplen, length = struct.unpack('<IIII', data[:16])
        self.assertEqual((sec, usec), (1, 500001))
        self.assertEqual((caplen, length), (56, 56))
        frame = dpkt.ethernet.Ethernet(data[16:])
        self.assertEqual(frame.src, bytes.fromhex('020000000000'))
        self.assertEqual(frame.dst, bytes.fromhex('020000000102'))
        self.assertEqual(frame.type, dpkt.ethernet.ETH_TYPE_IP)
        self.assertEqual((self.point.packets, self.point.bytes), (1, 56))

    def test_microsecond_carry(self):
        self.point.open()
        append_packet(self.point, 2_999_999_600, bytes(28))
        self.point.close()

        sec, usec = struct.unpack('<II', self.point.path.read_bytes()[24:32])
        self.assertEqual((sec, usec), (3, 0))

    def test_readable_by_pcap_reader(self):
        self.point.open()
        for k in range(5):
            append_packet(self.point, k * 1_000_000, bytes(100 + k))
        self.point.close()

        with open(self.point.path, 'rb') as f:
            reader = dpkt.pcap.Reader(f)
            records = list(reader)
            self.assertEqual(reader.datalink(), dpkt.pcap.DLT_EN10MB)
        self.assertEqual([len(buf) for _, buf in records], [114, 115, 116, 117, 118])

    def test_node_mac(self):
        self.assertEqual(node_mac(0x0102), bytes.fromhex('020000000102'))


class CaptureSelectionTests(SimpleTestCase):
    def setUp(self):
        self.cfg = load_config(resolve_preset('dist'))
        self.topo = build_topology(self.cfg)

    def test_cn_surface_both_directions(self):
        directions = select_capture_links(self.topo, self.cfg.capture)

        self.assertEqual(len(directions), 2 * len(self.topo.cn_links))
        self.assertFalse(any(src.is_host or dst.is_host for src, dst in directions))

    def test_single_direction(self):
        spec = replace(self.cfg.capture, bidirectional=False)
        directions = select_capture_links(self.topo, spec)

        self.assertEqual(len(directions), len(self.topo.cn_links))
        self.assertTrue(all(src.id < dst.id for src, dst in directions))

    def test_include_as_links(self):
        spec = replace(self.cfg.capture, include_as_links=True)

        self.assertEqual(len(select_capture_links(self.topo, spec)), 2 * len(self.topo.links))

    def test_plan_names_files_by_direction(self):
        captures = CaptureSet.plan(self.topo, self.cfg.capture, Path('/tmp/out'))
        names = {point.filename for point in captures}

        self.assertEqual(len(names), len(captures))
        self.assertTrue(all(name.startswith('DIST__') and name.endswith('__cap.pcap') for name in names))
        self.assertIn('DIST__AS0-GW-to-' + next(
            self.topo.nodes[n].name for n, _ in self.topo.neighbors(self.topo.node_id('AS0-GW'))
            if not self.topo.nodes[n].is_host
        ) + '__cap.pcap', names)


class RunLogParsingTests(SimpleTestCase):
    LOG = '\n'.join([
        '# pulse-wave run log',
        '[seed]',
        '7',
        '[captures]',
        'A__CN0-to-CN1__cap.pcap packets=12 bytes=900',
        'A__CN1-to-CN0__cap.pcap packets=0 bytes=24 partial',
        '[run]',
        'events 40',
        'wall_clock_runtime_s 0.512',
    ])

    def test_sections_and_counters(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'A__run__cap.log'
            path.write_text(self.LOG)
            sections = read_run_log(path)

        self.assertEqual(sections['seed'], ['7'])
        self.assertEqual(capture_counters(sections), {
            'A__CN0-to-CN1__cap.pcap': 12,
            'A__CN1-to-CN0__cap.pcap': 0,
        })

    def test_strip_wall_clock(self):
        self.assertNotIn('wall_clock', strip_wall_clock(self.LOG))
        self.assertIn('events 40', strip_wall_clock(self.LOG))
