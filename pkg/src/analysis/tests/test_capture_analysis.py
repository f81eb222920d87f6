import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from capture.runlog import capture_counters, read_run_log
from engine.simulator import run
from engine.tests import ATTACK_SCENARIO
from scenario.parser import load_config, parse_config, resolve_preset
from scheduling.timetable import build_timetable
from topology.builder import build_topology
from topology.models import NodeKind

from ..composition import Attributor, composition_report, is_attack_candidate, vector_signatures
from ..flows import flow_records, verify_checksums
from ..load import LoadModel, direction_of_capture, hop_for_direction
from ..pcap import read_pcap
from ..services import GROUP_VECTOR, AnalysisOptions, analyze_files
from ..timeseries import bin_timeseries

BIN_100MS = 100_000_000
BIN_10MS = 10_000_000


class SimulatedCaptureTests(SimpleTestCase):
    """Analysis of the captures of a small two-vector, two-target run."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.out = Path(cls.tmp.name)
        cls.cfg = parse_config(ATTACK_SCENARIO)
        cls.report = run(cls.cfg, cls.out)
        cls.topo = build_topology(cls.cfg)
        cls.timetable = build_timetable(cls.cfg.vectors, cls.cfg.targets, cls.cfg.duration)
        cls.records = {name: read_pcap(cls.out / name) for name in cls.report.capture_counters}

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def _address(self, name):
        return self.topo.host_address(self.topo.node_id(name))

    def _hop(self, filename):
        return hop_for_direction(self.topo, direction_of_capture(filename))

    def test_record_counts_match_run_log(self):
        logged = capture_counters(read_run_log(self.report.run_log))

        self.assertEqual(logged, {name: len(records) for name, records in self.records.items()})

    def test_checksums_verify(self):
        for name in self.records:
            with self.subTest(capture=name):
                self.assertEqual(verify_checksums(read_pcap(self.out / name, keep_raw=True)), 0)

    def test_each_vantage_sees_exactly_the_routed_flows(self):
        model = LoadModel(self.cfg, self.topo, self.timetable)
        for name, records in self.records.items():
            hop = self._hop(name)
            expected = {
                (self._address(attacker), self._address(target))
                for attacker in self.cfg.attackers for target in self.cfg.targets
                if model.crosses(attacker, target, hop)
            }
            seen = {(r.src, r.dst) for r in records if is_attack_candidate(r)}
            with self.subTest(capture=name):
                self.assertEqual(seen, expected)

    def test_union_of_vantages_reveals_every_attacker(self):
        sources = {r.src for records in self.records.values() for r in records if is_attack_candidate(r)}

        self.assertEqual(sources, {self._address(name) for name in self.cfg.attackers})

    def test_measured_rate_follows_analytic_load(self):
        model = LoadModel(self.cfg, self.topo, self.timetable)
        bins = self.timetable.duration // BIN_100MS
        checked = 0
        for name, records in self.records.items():
            expected = model.binned(self._hop(name), BIN_100MS, bins)
            series = bin_timeseries([r for r in records if is_attack_candidate(r)], BIN_100MS)
            measured = series.rate_bps().reindex(range(bins), fill_value=0).to_numpy()
            for k in range(1, bins - 1):
                if expected[k] > 0 and expected[k - 1] == expected[k] == expected[k + 1]:
                    with self.subTest(capture=name, bin=k):
                        self.assertLess(abs(measured[k] - expected[k]) / expected[k], 0.05)
                    checked += 1
        self.assertGreater(checked, 0)

    def test_zero_switch_handover_leaves_no_gap(self):
        # V2 has no switch time: its phase [1.25 s, 2.25 s) moves from one target to the next without a pause
        gateway = self.topo.node_id('AS0-GW')
        cn = next(n for n, _ in self.topo.neighbors(gateway) if not self.topo.nodes[n].is_host)
        name = f"ENG__AS0-GW-to-{self.topo.nodes[cn].name}__cap.pcap"
        label = Attributor(vector_signatures(self.cfg), self.timetable).label
        series = bin_timeseries(self.records[name], BIN_10MS, label)
        v2 = series.frame[series.frame['group'] == 'V2'].set_index('bin')['packets']

        self.assertTrue(all(v2[k] > 0 for k in range(126, 225)))

    def test_flow_records_cover_every_packet(self):
        for name, records in self.records.items():
            flows = flow_records(records)
            with self.subTest(capture=name):
                self.assertEqual(int(flows['packets'].sum()), len(records))
                self.assertEqual(int(flows['bytes'].sum()), sum(r.ip_len for r in records))

    def test_parallel_analysis_matches_serial(self):
        paths = sorted(self.out / name for name in self.records)
        options = AnalysisOptions(
            bin_ns=BIN_100MS, group_by=GROUP_VECTOR, signatures=tuple(vector_signatures(self.cfg)),
            timetable=self.timetable,
        )
        serial = analyze_files(paths, options)
        parallel = analyze_files(paths, options, jobs=2)

        self.assertEqual([a.path for a in serial], paths)
        self.assertEqual([a.series for a in serial], [a.series for a in parallel])
        self.assertEqual([a.packets for a in serial], [a.packets for a in parallel])


class PulsePatternCompositionTests(SimpleTestCase):
    """One full cycle of the constant four-vector pulse pattern, read at the target's gateway."""

    # Observed pps of the pulse pattern at 5 Mbit/s per vector
    REFERENCE_PPS = {'V1': 14874, 'V2': 6506, 'V3': 4880, 'V4': 7065}
    V4_SHARES = {36: 0.49, 48: 0.18, 96: 0.06, 128: 0.10, 256: 0.17}

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cfg = load_config(resolve_preset('var1'))
        cls.cfg = replace(cfg, duration=20.0)
        timetable = build_timetable(cls.cfg.vectors, cls.cfg.targets, cls.cfg.duration)
        topo = build_topology(cls.cfg)
        target_gw = topo.node_id('AS2-GW')
        cn = next(n for n, _ in topo.neighbors(target_gw) if not topo.nodes[n].is_host)
        name = f"VAR1__{topo.nodes[cn].name}-to-AS2-GW__cap.pcap"

        with tempfile.TemporaryDirectory() as out:
            run(cls.cfg, Path(out))
            records = read_pcap(Path(out) / name)
        targets = {target: topo.host_address(topo.node_id(target)) for target in cls.cfg.targets}
        cls.composition = composition_report(records, vector_signatures(cls.cfg), timetable, targets)

    def test_every_vector_is_on_for_one_burst(self):
        for vector in self.composition.vectors.values():
            self.assertEqual(vector.active_ns, 5_000_000_000, vector.vector_id)

    def test_fixed_size_vectors_packet_rates(self):
        for vector_id in ('V1', 'V2', 'V3'):
            measured = self.composition.vectors[vector_id].avg_pps
            with self.subTest(vector=vector_id):
                self.assertLess(abs(measured / self.REFERENCE_PPS[vector_id] - 1), 0.015)

    def test_syn_flood_average_rate(self):
        self.assertLess(abs(self.composition.vectors['V1'].avg_rate_bps / 4.99e6 - 1), 0.01)

    def test_mixed_vector_packet_rate(self):
        # Inter-packet delays stretch by the mean of 1 / (1 + eps), eps uniform in [-0.1, 0.1]
        stretch = math.log(1.1 / 0.9) / 0.2
        mean_size = sum(size * share for size, share in self.V4_SHARES.items())
        expected = 5e6 / (mean_size * 8) / stretch

        self.assertLess(abs(self.REFERENCE_PPS['V4'] / expected - 1), 0.005)
        self.assertLess(abs(self.composition.vectors['V4'].avg_pps / expected - 1), 0.015)

    def test_mixed_vector_size_histogram(self):
        shares = self.composition.vectors['V4'].size_shares()

        self.assertEqual(set(shares), set(self.V4_SHARES))
        for size, share in self.V4_SHARES.items():
            self.assertLess(abs(shares[size] - share), 0.02, size)

    def test_one_attacker_per_vector(self):
        self.assertEqual(len(self.composition.attacker_shares()), 4)
        self.assertEqual(self.composition.unattributed_packets, 0)
        self.assertTrue(np.isclose(sum(p for p, _ in self.composition.attacker_shares().values()), 1.0))


class DistributedVantageTests(SimpleTestCase):
    """The eight-node distributed preset with every first-cycle window scaled down tenfold."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        out = Path(cls.tmp.name)
        dist = load_config(resolve_preset('dist'))
        vectors = tuple(replace(v, burst=v.burst / 10, switch=v.switch / 10) for v in dist.vectors)
        cls.cfg = replace(dist, vectors=vectors, duration=1.2)
        cls.report = run(cls.cfg, out)
        cls.topo = build_topology(cls.cfg)
        cls.timetable = build_timetable(cls.cfg.vectors, cls.cfg.targets, cls.cfg.duration)
        cls.flows = {
            name: {(r.src, r.dst) for r in read_pcap(out / name) if is_attack_candidate(r)}
            for name in cls.report.capture_counters
        }

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def _address(self, name):
        return self.topo.host_address(self.topo.node_id(name))

    def test_shape(self):
        self.assertEqual(sum(1 for node in self.topo.nodes if node.kind == NodeKind.CN), 8)
        self.assertEqual(len(self.cfg.attackers), 12)
        self.assertEqual(self.report.dropped, 0)

    def test_union_of_vantages_is_every_attacker(self):
        sources = {src for flows in self.flows.values() for src, _ in flows}

        self.assertEqual(sources, {self._address(name) for name in self.cfg.attackers})

    def test_vantages_see_different_attacker_subsets(self):
        subsets = {frozenset(src for src, _ in flows) for flows in self.flows.values()}
        subsets.discard(frozenset())

        self.assertGreaterEqual(len(subsets), 2)

    def test_each_vantage_sees_exactly_the_routed_flows(self):
        model = LoadModel(self.cfg, self.topo, self.timetable)
        for name, seen in self.flows.items():
            hop = hop_for_direction(self.topo, direction_of_capture(name))
            expected = {
                (self._address(attacker), self._address(target))
                for attacker in self.cfg.attackers for target in self.cfg.targets
                if model.crosses(attacker, target, hop)
            }
            with self.subTest(capture=name):
                self.assertEqual(seen, expected)
