import tempfile
from pathlib import Path

import dpkt
from django.test import SimpleTestCase

from capture.writer import CapturePoint, append_packet
from traffic.packets import Packet

from ..exceptions import MalformedPcap
from ..pcap import read_pcap
from .helpers import ATTACKER, TARGET


class ReadPcapTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.point = CapturePoint('CN0', 'CN1', 0, 1, Path(self.tmp.name) / 'T__CN0-to-CN1__cap.pcap')

    def _write(self, packets):
        self.point.open()
        for t, packet in packets:
            append_packet(self.point, t, packet.to_bytes())
        self.point.close()
        return self.point.path

    def test_header_only_file(self):
        self.assertEqual(read_pcap(self._write([])), [])

    def test_fields_round_trip(self):
        syn = Packet(src=ATTACKER, dst=TARGET, protocol=dpkt.ip.IP_PROTO_TCP, size=42,
                     src_port=1234, dst_port=80, flags=dpkt.tcp.TH_SYN)
        echo = Packet(src=ATTACKER, dst=TARGET, protocol=dpkt.ip.IP_PROTO_ICMP, size=128)
        records = read_pcap(self._write([(1_000_000, syn), (2_500_000_400, echo)]), keep_raw=True)

        first, second = records
        self.assertEqual((first.ts_us, first.ip_len, first.frame_len), (1000, 42, 56))
        self.assertEqual((first.src, first.dst, first.src_port, first.dst_port), (ATTACKER, TARGET, 1234, 80))
        self.assertEqual(first.flags, dpkt.tcp.TH_SYN)
        self.assertEqual((second.ts_us, second.protocol, second.dst_port), (2_500_000, dpkt.ip.IP_PROTO_ICMP, 0))
        self.assertEqual(second.raw, echo.to_bytes())
        self.assertEqual(first.capture, 'T__CN0-to-CN1__cap.pcap')

    def test_truncated_final_record(self):
        packet = Packet(src=ATTACKER, dst=TARGET, protocol=dpkt.ip.IP_PROTO_UDP, size=96)
        path = self._write([(0, packet), (10, packet)])
        data = path.read_bytes()
        path.write_bytes(data[:-5])

        with self.assertRaises(MalformedPcap) as ctx:
            read_pcap(path)
        self.assertEqual(ctx.exception.offset, 24 + 16 + 14 + 96)

    def test_bad_magic(self):
        path = Path(self.tmp.name) / 'bogus.pcap'
        path.write_bytes(b'\x00' * 40)

        with self.assertRaises(MalformedPcap) as ctx:
            read_pcap(path)
        self.assertEqual(ctx.exception.offset, 0)

    def test_short_file_header(self):
        path = Path(self.tmp.name) / 'short.pcap'
        path.write_bytes(b'\xd4\xc3\xb2\xa1')

        with self.assertRaises(MalformedPcap):
            read_pcap(path)
