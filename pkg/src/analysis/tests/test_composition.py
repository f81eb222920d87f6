import dpkt
from django.test import SimpleTestCase

from scenario.parser import load_config, parse_config, resolve_preset
from scheduling.timetable import build_timetable

from ..composition import Attributor, composition_report, is_attack_candidate, vector_signatures
from .helpers import ATTACKER, TARGET, benign_record, make_record

ICMP = dpkt.ip.IP_PROTO_ICMP
TCP = dpkt.ip.IP_PROTO_TCP
UDP = dpkt.ip.IP_PROTO_UDP

OVERLAPPING_SIGNATURES = """
name: MIX
duration: 10s
central_network: {node_count: 1}
autonomous_systems:
  - id: AS0
    client_count: 2
    roles: {0: attacker, 1: attacker}
  - id: AS1
    client_count: 1
    server_count: 1
    roles: {1: target}
vectors:
  - id: V1
    protocol: ICMP
    size: 128
    rate: 1Mbps
    burst: 5s
    attackers: [AS0-C0]
  - id: V2
    protocol: MIXED
    size_dist: {36: 0.5, 128: 0.5}
    rate: 1Mbps
    burst: 5s
    dst_port: 443
    attackers: [AS0-C1]
targets: [AS1-S0]
"""


def seconds(value):
    return int(value * 1_000_000)


class SignatureTests(SimpleTestCase):
    def test_var1_signatures(self):
        signatures = {s.vector_id: s for s in vector_signatures(load_config(resolve_preset('var1')))}

        self.assertEqual(signatures['V1'].protocols, {TCP})
        self.assertEqual(signatures['V1'].sizes, {42})
        self.assertEqual(signatures['V1'].dst_ports, {80})
        self.assertEqual(signatures['V4'].protocols, {TCP, UDP, ICMP})
        self.assertEqual(signatures['V4'].sizes, {36, 48, 96, 128, 256})

    def test_icmp_ignores_ports(self):
        signature = {s.vector_id: s for s in vector_signatures(load_config(resolve_preset('var1')))}['V3']

        self.assertTrue(signature.matches(make_record(0, ICMP, 128, dst_port=0)))
        self.assertFalse(signature.matches(make_record(0, ICMP, 96, dst_port=0)))

    def test_benign_segments_are_not_candidates(self):
        self.assertFalse(is_attack_candidate(benign_record(0)))
        self.assertTrue(is_attack_candidate(make_record(0, TCP, 42, dst_port=80)))
        self.assertTrue(is_attack_candidate(make_record(0, UDP, 96)))


class AttributionTests(SimpleTestCase):
    def setUp(self):
        cfg = parse_config(OVERLAPPING_SIGNATURES)
        self.signatures = vector_signatures(cfg)
        self.timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)

    def test_ambiguous_size_goes_to_vector_on_at_capture(self):
        attribute = Attributor(self.signatures, self.timetable)

        self.assertEqual(attribute(make_record(seconds(1), ICMP, 128, dst_port=0)), 'V1')
        self.assertEqual(attribute(make_record(seconds(7), ICMP, 128, dst_port=0)), 'V2')
        self.assertEqual(attribute(make_record(seconds(5.2), ICMP, 128, dst_port=0)), 'V2')

    def test_packets_in_flight_at_window_end_stay_with_sender(self):
        attribute = Attributor(self.signatures, self.timetable)

        self.assertEqual(attribute(make_record(seconds(5.01), ICMP, 128, dst_port=0)), 'V1')

    def test_unique_match_needs_no_timetable(self):
        attribute = Attributor(self.signatures)

        self.assertEqual(attribute(make_record(0, UDP, 36, dst_port=443)), 'V2')
        self.assertIsNone(attribute(make_record(0, UDP, 36, dst_port=53)))

    def test_labels(self):
        attribute = Attributor(self.signatures, self.timetable)

        self.assertEqual(attribute.label(benign_record(0)), 'benign')
        self.assertEqual(attribute.label(make_record(0, UDP, 500)), 'unattributed')


class CompositionReportTests(SimpleTestCase):
    def setUp(self):
        cfg = parse_config(OVERLAPPING_SIGNATURES)
        self.signatures = vector_signatures(cfg)
        self.timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)

    def _v1_burst(self):
        # One 128 B echo every 5 ms over V1's window [0, 5 s)
        return [make_record(k * 5_000, ICMP, 128, dst_port=0) for k in range(1000)]

    def test_rates_over_timetable_on_time(self):
        report = composition_report(self._v1_burst() + [benign_record(seconds(9))], self.signatures, self.timetable)
        v1 = report.vectors['V1']

        self.assertEqual(v1.packets, 1000)
        self.assertEqual(v1.active_ns, 5_000_000_000)
        self.assertAlmostEqual(v1.avg_pps, 200.0)
        self.assertAlmostEqual(v1.avg_rate_bps, 1000 * 128 * 8 / 5)
        self.assertEqual(v1.protocols, {'ICMP': 1000})
        self.assertEqual(v1.targets, {TARGET})
        self.assertEqual(report.total_packets, 1001)
        self.assertEqual(report.candidate_packets, 1000)
        self.assertEqual(report.vectors['V2'].packets, 0)

    def test_on_time_detected_without_timetable(self):
        records = self._v1_burst() + [benign_record(seconds(19.95))]
        report = composition_report(records, self.signatures)

        self.assertEqual(report.vectors['V1'].active_ns, 5_000_000_000)
        self.assertAlmostEqual(report.vectors['V1'].avg_pps, 200.0)

    def test_size_histogram(self):
        records = [make_record(seconds(5) + k * 1_000, UDP, 36, dst_port=443) for k in range(300)]
        records += [make_record(seconds(6) + k * 1_000, ICMP, 128, dst_port=0) for k in range(100)]
        report = composition_report(records, self.signatures, self.timetable)

        self.assertEqual(report.vectors['V2'].size_shares(), {36: 0.75, 128: 0.25})
        self.assertEqual(report.vectors['V2'].protocols, {'UDP': 300, 'ICMP': 100})

    def test_attacker_shares(self):
        other = '10.0.5.6'
        records = self._v1_burst()[:300] + [make_record(seconds(1), ICMP, 128, dst_port=0, src=other)] * 100
        report = composition_report(records, self.signatures, self.timetable)
        shares = report.attacker_shares()

        self.assertEqual(shares[str(ATTACKER)], (0.75, 0.75))
        self.assertEqual(shares[other], (0.25, 0.25))

    def test_unattributed_warning_above_one_percent(self):
        records = self._v1_burst()[:98] + [make_record(0, UDP, 500)] * 2
        report = composition_report(records, self.signatures, self.timetable)

        self.assertEqual(report.unattributed_packets, 2)
        self.assertEqual([w.code for w in report.warnings], ['UnattributedTraffic'])

    def test_one_percent_is_tolerated(self):
        records = self._v1_burst()[:99] + [make_record(0, UDP, 500)]
        report = composition_report(records, self.signatures, self.timetable)

        self.assertEqual(report.warnings, [])

    def test_benign_only_capture(self):
        report = composition_report([benign_record(k * 1_000) for k in range(50)], self.signatures, self.timetable)

        self.assertEqual(report.attributed_packets, 0)
        self.assertEqual(report.candidate_packets, 0)
        self.assertEqual(report.warnings, [])
