import numpy as np
from django.test import SimpleTestCase

from scenario.parser import parse_config
from scheduling.timetable import build_timetable
from topology.builder import build_topology

from ..load import LoadModel, direction_of_capture, expected_link_load, hop_for_direction

TWO_ATTACKERS = """
name: LOAD
duration: 4s
central_network: {node_count: 2}
autonomous_systems:
  - id: AS0
    client_count: 2
    roles: {0: attacker, 1: attacker}
  - id: AS1
    client_count: 1
    server_count: 2
    roles: {1: target, 2: target}
vectors:
  - id: V1
    protocol: UDP
    size: 100
    rate: 1Mbps
    burst: 1s
    switch: 0.5s
targets: [AS1-S0, AS1-S1]
"""

SECOND = 1_000_000_000


class LoadModelTests(SimpleTestCase):
    def setUp(self):
        self.cfg = parse_config(TWO_ATTACKERS)
        self.topo = build_topology(self.cfg)
        self.timetable = build_timetable(self.cfg.vectors, self.cfg.targets, self.cfg.duration)
        self.model = LoadModel(self.cfg, self.topo, self.timetable)
        gateway = self.topo.node_id('AS0-GW')
        cn = next(n for n, _ in self.topo.neighbors(gateway) if not self.topo.nodes[n].is_host)
        self.uplink = (gateway, cn)

    def test_attackers_sharing_a_gateway_add_up(self):
        self.assertEqual(self.model.load(self.uplink, SECOND // 2), 2e6)

    def test_switch_gap_is_silent(self):
        self.assertEqual(self.model.load(self.uplink, 1_200_000_000), 0.0)

    def test_only_the_active_target_link_carries_load(self):
        to_s0 = hop_for_direction(self.topo, 'AS1-GW-to-AS1-S0')
        to_s1 = hop_for_direction(self.topo, 'AS1-GW-to-AS1-S1')

        self.assertEqual(self.model.load(to_s0, SECOND // 2), 2e6)
        self.assertEqual(self.model.load(to_s1, SECOND // 2), 0.0)
        self.assertEqual(self.model.load(to_s1, 2 * SECOND), 2e6)

    def test_reverse_direction_carries_no_attack_load(self):
        self.assertEqual(self.model.load(self.uplink[::-1], SECOND // 2), 0.0)

    def test_single_instant_helper(self):
        self.assertEqual(expected_link_load(self.cfg, self.topo, self.timetable, self.uplink, SECOND // 2), 2e6)

    def test_binned_weights_partial_overlap(self):
        binned = self.model.binned(self.uplink, 400_000_000, 10)

        np.testing.assert_allclose(binned, [2e6, 2e6, 1e6, 5e5, 2e6, 2e6, 2e6, 2e6, 1.5e6, 0.0])


class DirectionNameTests(SimpleTestCase):
    def setUp(self):
        self.topo = build_topology(parse_config(TWO_ATTACKERS))

    def test_capture_file_direction(self):
        self.assertEqual(direction_of_capture('DIST__CN3-to-CN5__cap.pcap'), 'CN3-to-CN5')

    def test_hyphenated_node_names(self):
        self.assertEqual(hop_for_direction(self.topo, 'AS0-C0-to-AS0-GW'),
                         (self.topo.node_id('AS0-C0'), self.topo.node_id('AS0-GW')))

    def test_unknown_direction(self):
        with self.assertRaises(KeyError):
            hop_for_direction(self.topo, 'CN0-to-CN9')
        with self.assertRaises(KeyError):
            direction_of_capture('loose.pcap')
