import math
from collections import Counter
from ipaddress import IPv4Address

import dpkt
from django.test import SimpleTestCase

from scenario.models import RANDOM_PORT, AttackVector, BenignSpec, Protocol, SizeDistribution

from .generators import AttackerApp, BenignApp, make_responses
from .packets import KIND_REQUEST, Packet, SizeTooSmall, checksums_ok

SRC = IPv4Address('10.0.5.2')
TARGET = IPv4Address('10.0.9.2')
OTHER = IPv4Address('10.0.10.2')
V4_WEIGHTS = {36: 0.49, 48: 0.18, 96: 0.06, 128: 0.10, 256: 0.17}


def make_app(protocol=Protocol.UDP, size=96, rate=5e6, jitter=0.0, attacker='AS0-C0', seed=7, **extra):
    dist = SizeDistribution(tuple(V4_WEIGHTS.items())) if protocol == Protocol.MIXED else SizeDistribution.fixed(size)
    vector = AttackVector(id='V1', protocol=protocol, size_dist=dist, rate=rate, burst=5, jitter=jitter, **extra)
    return AttackerApp(attacker, SRC, vector, vector.params_for(attacker), {'T0': TARGET, 'T1': OTHER}, seed)


class SendDelayTests(SimpleTestCase):
    def test_jitter_free_delay(self):
        app = make_app(Protocol.TCP_SYN, size=42)

        self.assertEqual(app.next_send_delay(), (67_200, 42))

    def test_jitter_bounds(self):
        app = make_app(size=96, jitter=0.1)
        low = math.floor(96 * 8e9 / (1.1 * 5e6))
        high = math.ceil(96 * 8e9 / (0.9 * 5e6))
        for _ in range(20_000):
            delay, size = app.next_send_delay()
            self.assertEqual(size, 96)
            self.assertTrue(low <= delay <= high, delay)

    def test_mean_rate_close_to_nominal(self):
        app = make_app(size=96, jitter=0.1)
        bits = 0
        elapsed = 0
        for _ in range(200_000):
            delay, size = app.next_send_delay()
            bits += size * 8
            elapsed += delay
        rate = bits / (elapsed / 1e9)

        self.assertAlmostEqual(rate / 5e6, 1.0, delta=0.01)

    def test_mixed_size_histogram(self):
        app = make_app(Protocol.MIXED)
        counts = Counter(app.next_send_delay()[1] for _ in range(100_000))
        for size, weight in V4_WEIGHTS.items():
            self.assertAlmostEqual(counts[size] / 100_000, weight, delta=0.02)

    def test_streams_are_per_app(self):
        first = [make_app(jitter=0.1).next_send_delay() for _ in range(1)]
        a, b = make_app(jitter=0.1), make_app(jitter=0.1)
        other = make_app(jitter=0.1, attacker='AS0-C1')
        seq_a = [a.next_send_delay() for _ in range(50)]

        self.assertEqual(seq_a, [b.next_send_delay() for _ in range(50)])
        self.assertNotEqual(seq_a, [other.next_send_delay() for _ in range(50)])
        self.assertEqual(first[0], seq_a[0])


class CraftPacketTests(SimpleTestCase):
    def test_tcp_syn_42(self):
        app = make_app(Protocol.TCP_SYN, size=42, dst_port=80)
        raw = app.craft_packet(TARGET, 42).to_bytes()
        ip = dpkt.ip.IP(raw)

        self.assertEqual(len(raw), 42)
        self.assertEqual(ip.len, 42)
        self.assertIsInstance(ip.data, dpkt.tcp.TCP)
        self.assertEqual(ip.data.flags, dpkt.tcp.TH_SYN)
        self.assertEqual(ip.data.dport, 80)
        self.assertTrue(1024 <= ip.data.sport <= 65535)
        self.assertEqual(raw[40:], b'\x00\x00')
        self.assertTrue(checksums_ok(raw))

    def test_icmp_128(self):
        raw = make_app(Protocol.ICMP, size=128).craft_packet(TARGET, 128).to_bytes()
        icmp = raw[20:]

        self.assertEqual(len(raw), 128)
        self.assertEqual((icmp[0], icmp[1]), (8, 0))
        self.assertEqual(dpkt.in_cksum(icmp), 0)
        self.assertEqual(dpkt.in_cksum(raw[:20]), 0)

    def test_udp_lengths_and_checksum(self):
        raw = make_app(Protocol.UDP, size=96, src_port=4000, dst_port=53).craft_packet(TARGET, 96).to_bytes()
        udp = dpkt.ip.IP(raw).data

        self.assertEqual(udp.ulen, 76)
        self.assertEqual((udp.sport, udp.dport), (4000, 53))
        self.assertTrue(checksums_ok(raw))

    def test_random_ports_vary(self):
        app = make_app(Protocol.UDP, src_port=RANDOM_PORT, dst_port=RANDOM_PORT)
        ports = {app.craft_packet(TARGET, 96).dst_port for _ in range(100)}

        self.assertGreater(len(ports), 90)
        self.assertTrue(all(1024 <= port <= 65535 for port in ports))

    def test_mixed_small_packets_skip_tcp(self):
        app = make_app(Protocol.MIXED)
        protocols = {app.craft_packet(TARGET, 36).protocol for _ in range(200)}

        self.assertEqual(protocols, {dpkt.ip.IP_PROTO_UDP, dpkt.ip.IP_PROTO_ICMP})

    def test_every_crafted_packet_verifies(self):
        app = make_app(Protocol.MIXED, jitter=0.1)
        for _ in range(2000):
            _, size = app.next_send_delay()
            self.assertTrue(checksums_ok(app.craft_packet(TARGET, size).to_bytes()))

    def test_size_too_small(self):
        with self.assertRaises(SizeTooSmall):
            Packet(src=SRC, dst=TARGET, protocol=dpkt.ip.IP_PROTO_TCP, size=36)

    def test_corrupted_packet_fails_verification(self):
        raw = bytearray(make_app().craft_packet(TARGET, 96).to_bytes())
        raw[50] ^= 0xFF

        self.assertFalse(checksums_ok(bytes(raw)))


class RetargetTests(SimpleTestCase):
    def _run_window(self, app, start, end):
        """Drive an app through one window; returns send instants."""
        times = []
        t = start
        if not app.on_retarget(start, 'T0', end):
            return times
        while t is not None:
            packet, next_t = app.on_send(t)
            if packet is not None:
                times.append(t)
            t = next_t
        return times

    def test_jitter_free_packet_count(self):
        app = make_app(size=96, rate=5e6)
        times = self._run_window(app, 0, 2_000_000_000)
        expected = math.floor(2 * 5e6 / (96 * 8))

        self.assertLessEqual(abs(len(times) - expected), 1)
        self.assertTrue(all(t < 2_000_000_000 for t in times))

    def test_idle_after_window(self):
        app = make_app()
        self._run_window(app, 0, 1_000_000)

        self.assertFalse(app.pending)
        self.assertEqual(app.on_send(2_000_000), (None, None))

    def test_zero_switch_handover_keeps_sending(self):
        app = make_app(size=96, rate=5e6)
        self.assertTrue(app.on_retarget(0, 'T0', 1_000_000))
        t = 0
        while t < 1_000_000:
            _, t = app.on_send(t)
        # pending send is beyond the first window; retarget happens before it fires
        self.assertFalse(app.on_retarget(1_000_000, 'T1', 2_000_000))
        packet, _ = app.on_send(t)

        self.assertEqual(packet.dst, OTHER)
        self.assertLessEqual(t - 1_000_000, 96 * 8 * 1_000_000_000 // 5_000_000)

    def test_retarget_switches_destination(self):
        app = make_app()
        app.on_retarget(0, 'T1', 10**9)
        packet, _ = app.on_send(0)

        self.assertEqual(packet.dst, OTHER)
        self.assertEqual(packet.vector, 'V1')
        self.assertEqual(packet.attacker, 'AS0-C0')


class BenignTests(SimpleTestCase):
    servers = [('AS1-S0', TARGET), ('AS2-S0', OTHER)]

    def test_request_shape(self):
        app = BenignApp('AS3-C0', SRC, self.servers, BenignSpec(), seed=1)
        request, next_t = app.on_flow_start(0)

        self.assertEqual(request.kind, KIND_REQUEST)
        self.assertEqual(request.size, 400)
        self.assertEqual(request.dst_port, 80)
        self.assertEqual(request.flags, dpkt.tcp.TH_PUSH | dpkt.tcp.TH_ACK)
        self.assertGreater(next_t, 0)
        self.assertGreaterEqual(request.reply_count, 1)
        self.assertTrue(checksums_ok(request.to_bytes()))

    def test_responses(self):
        app = BenignApp('AS3-C0', SRC, self.servers, BenignSpec(), seed=1)
        request = app.make_request()
        responses = make_responses(request, BenignSpec())

        self.assertEqual(len(responses), request.reply_count)
        self.assertTrue(all(r.size == 1500 and r.dst == SRC and r.flags == dpkt.tcp.TH_ACK for r in responses))
        self.assertTrue(all(r.dst_port == request.src_port for r in responses))

    def test_request_count_is_poisson(self):
        app = BenignApp('AS3-C0', SRC, self.servers, BenignSpec(think_time_mean=1.0), seed=3)
        t = app.next_think()
        count = 0
        while t < 100 * 10**9:
            count += 1
            t += app.next_think()

        self.assertLessEqual(abs(count - 100), 30)

    def test_reply_count_mean(self):
        app = BenignApp('AS3-C0', SRC, self.servers, BenignSpec(response_packets_mean=10), seed=5)
        counts = [app.make_request().reply_count for _ in range(5000)]

        self.assertAlmostEqual(sum(counts) / len(counts), 10, delta=0.5)
        self.assertEqual({app.make_request().dst for _ in range(200)}, {TARGET, OTHER})
