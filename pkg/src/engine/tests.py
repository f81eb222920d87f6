import tempfile
from dataclasses import replace
from ipaddress import IPv4Address
from pathlib import Path
from unittest import mock

import dpkt
from django.test import SimpleTestCase

from capture.exceptions import CaptureWriteError
from capture.runlog import read_run_log, strip_wall_clock
from scenario.parser import load_config, parse_config, resolve_preset
from scheduling.timetable import build_timetable
from topology.builder import build_topology
from topology.routing import path
from traffic.packets import KIND_ATTACK, Packet

from .events import EventKind, EventQueue
from .exceptions import NoRoute
from .simulator import Simulator, run

LINK_SCENARIO = """
name: LINK
duration: 1s
central_network: {node_count: 1}
autonomous_systems:
  - id: AS0
    client_count: 1
    server_count: 1
    link_rate: 100Mbps
    link_delay: 1ms
"""

ATTACK_SCENARIO = """
name: ENG
seed: 3
duration: 4s
central_network: {node_count: 3, redundancy: 0.5}
autonomous_systems:
  - id: AS0
    client_count: 2
    roles: {0: attacker, 1: attacker}
  - id: AS1
    client_count: 2
    server_count: 1
  - id: AS2
    server_count: 2
    roles: {0: target, 1: target}
vectors:
  - id: V1
    protocol: UDP
    size: 200
    rate: 2Mbps
    burst: 0.5s
    switch: 0.25s
    dst_port: 53
  - id: V2
    protocol: TCP_SYN
    size: 60
    rate: 1Mbps
    burst: 0.5s
targets: [AS2-S0, AS2-S1]
benign:
  think_time_mean: 0.2s
"""

BENIGN_SCENARIO = """
name: QUIET
seed: 11
duration: 3s
central_network: {node_count: 2}
autonomous_systems:
  - id: AS0
    client_count: 3
  - id: AS1
    server_count: 2
benign:
  think_time_mean: 0.25s
"""


def make_simulator(text, simulator_class=Simulator):
    cfg = parse_config(text)
    topo = build_topology(cfg)
    timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
    return simulator_class(cfg, topo, timetable)


def simulate_preset(name, duration=1.0):
    """Run a preset for a shortened duration without captures."""
    cfg = replace(load_config(resolve_preset(name)), duration=duration)
    topo = build_topology(cfg)
    timetable = build_timetable(cfg.vectors, cfg.targets, cfg.duration)
    return Simulator(cfg, topo, timetable).run()


def udp_packet(topo, src, dst, size=1500):
    return Packet(
        src=topo.host_address(topo.node_id(src)), dst=topo.host_address(topo.node_id(dst)),
        protocol=dpkt.ip.IP_PROTO_UDP, size=size, src_port=1000, dst_port=2000,
    )


class RecordingSimulator(Simulator):
    """Remembers when each packet entered the network and where it was delivered."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.injected: dict[int, tuple[Packet, int, int]] = {}
        self.deliveries: list[tuple[Packet, int, int]] = []

    def forward(self, node, packet, t):
        self.injected.setdefault(id(packet), (packet, node, t))
        super().forward(node, packet, t)

    def _deliver_local(self, node, packet, t):
        _, _, sent = self.injected[id(packet)]
        self.deliveries.append((packet, sent, t))
        super()._deliver_local(node, packet, t)


class EventQueueTests(SimpleTestCase):
    def test_time_then_sequence_order(self):
        queue = EventQueue()
        queue.push(5, EventKind.APP_SEND, 'late')
        queue.push(1, EventKind.RETARGET, 'first')
        queue.push(1, EventKind.APP_SEND, 'second')

        self.assertEqual([queue.pop().payload for _ in range(3)], ['first', 'second', 'late'])
        self.assertEqual(queue.now, 5)

    def test_past_event_rejected(self):
        queue = EventQueue()
        queue.push(10, EventKind.SIM_END)
        queue.pop()

        with self.assertRaises(ValueError):
            queue.push(9, EventKind.APP_SEND)


class TransmitTests(SimpleTestCase):
    def setUp(self):
        self.sim = make_simulator(LINK_SCENARIO)
        topo = self.sim.topo
        self.client = topo.node_id('AS0-C0')
        self.gateway = topo.node_id('AS0-GW')
        self.direction = self.sim.directions[(self.client, self.gateway)]

    def _pending(self):
        events = []
        while self.sim.queue:
            events.append(self.sim.queue.pop())
        return events

    def test_delivery_time_on_idle_link(self):
        packet = udp_packet(self.sim.topo, 'AS0-C0', 'AS0-S0')
        self.sim.transmit(self.direction, packet, 0)
        events = self._pending()

        self.assertEqual([(e.time, e.kind) for e in events], [
            (120_000, EventKind.QUEUE_DEQUEUE),
            (1_120_000, EventKind.LINK_DELIVER),
        ])

    def test_full_queue_drops_next_packet(self):
        for _ in range(101):
            self.sim.transmit(self.direction, udp_packet(self.sim.topo, 'AS0-C0', 'AS0-S0'), 0)

        self.assertEqual(self.direction.queue.occupancy, 100)
        self.assertEqual(self.direction.counters.drop, 1)
        self.assertEqual(self.direction.counters.tx, 101)

    def test_back_to_back_packets_are_serialized(self):
        for _ in range(2):
            self.sim.transmit(self.direction, udp_packet(self.sim.topo, 'AS0-C0', 'AS0-S0'), 0)
        arrivals = []
        while self.sim.queue:
            event = self.sim.queue.pop()
            if event.kind == EventKind.LINK_DELIVER and event.payload[0] is self.direction:
                arrivals.append(event.time)
            self.sim.dispatch(event)

        self.assertEqual(arrivals, [1_120_000, 1_240_000])
        self.assertEqual(self.direction.counters.rx, 2)

    def test_forward_to_local_destination(self):
        server = self.sim.topo.node_id('AS0-S0')
        self.sim.forward(server, udp_packet(self.sim.topo, 'AS0-C0', 'AS0-S0'), 0)

        self.assertEqual(self.sim.report.delivered, 1)
        self.assertFalse(self.sim.queue)

    def test_forward_one_hop_down_the_star(self):
        self.sim.forward(self.gateway, udp_packet(self.sim.topo, 'AS0-C0', 'AS0-S0'), 0)
        while self.sim.queue:
            self.sim.dispatch(self.sim.queue.pop())

        self.sim.collect()

        self.assertEqual(self.sim.report.delivered, 1)
        self.assertEqual([name for name, c in self.sim.report.links.items() if c.rx], ['AS0-GW-to-AS0-S0'])

    def test_unknown_destination_is_no_route(self):
        packet = Packet(src=IPv4Address('10.0.0.1'), dst=IPv4Address('192.0.2.1'),
                        protocol=dpkt.ip.IP_PROTO_UDP, size=100)

        with self.assertRaises(NoRoute):
            self.sim.forward(self.client, packet, 0)


class SimulationTests(SimpleTestCase):
    def test_attack_run_properties(self):
        sim = make_simulator(ATTACK_SCENARIO, RecordingSimulator)
        report = sim.run()
        topo, timetable = sim.topo, sim.timetable
        targets = {topo.host_address(topo.node_id(name)): name for name in sim.cfg.targets}

        self.assertGreater(report.attack_packets, 0)
        self.assertGreater(report.benign_packets, 0)
        self.assertEqual(set(report.vector_sent), {'V1', 'V2'})
        self.assertEqual(sum(report.vector_sent.values()), report.attack_packets)

        for name, counters in report.links.items():
            self.assertTrue(counters.conserved, name)

        for packet, sent, arrived in sim.deliveries:
            self.assertGreater(arrived, sent)

        for packet, node, sent in sim.injected.values():
            if packet.kind != KIND_ATTACK:
                continue
            self.assertEqual(timetable.active_target(packet.vector, sent), targets[packet.dst])
            self.assertEqual(topo.nodes[node].name, packet.attacker)

    def test_attack_packets_follow_routing_path(self):
        sim = make_simulator(ATTACK_SCENARIO, RecordingSimulator)
        sim.run()
        topo = sim.topo
        hops = path(topo, topo.node_id('AS0-C0'), topo.host_address(topo.node_id('AS2-S0')))
        names = [f"{topo.nodes[h.src].name}-to-{topo.nodes[h.dst].name}" for h in hops]

        self.assertEqual(names[0], 'AS0-C0-to-AS0-GW')
        self.assertEqual(names[-1], 'AS2-GW-to-AS2-S0')
        for name in names:
            self.assertGreater(sim.report.links[name].tx, 0, name)

    def test_benign_only_run(self):
        with tempfile.TemporaryDirectory() as out:
            report = run(parse_config(BENIGN_SCENARIO), Path(out))

        self.assertEqual(report.attack_packets, 0)
        self.assertGreater(report.benign_packets, 0)
        self.assertFalse(report.aborted)
        self.assertEqual(report.delivered + report.dropped, report.benign_packets)

    def test_rerun_is_byte_identical(self):
        cfg = parse_config(ATTACK_SCENARIO)
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            report_a = run(cfg, Path(first))
            report_b = run(cfg, Path(second))
            files_a = sorted(p.name for p in Path(first).iterdir())

            self.assertEqual(files_a, sorted(p.name for p in Path(second).iterdir()))
            for name in files_a:
                if name.endswith('.pcap'):
                    self.assertEqual((Path(first) / name).read_bytes(), (Path(second) / name).read_bytes(), name)
            self.assertEqual(strip_wall_clock(report_a.run_log.read_text()),
                             strip_wall_clock(report_b.run_log.read_text()))
        self.assertEqual(report_a, report_b)

    def test_capture_counts_match_files(self):
        cfg = parse_config(ATTACK_SCENARIO)
        with tempfile.TemporaryDirectory() as out:
            report = run(cfg, Path(out))
            counters = report.capture_counters
            for name, (packets, size) in counters.items():
                with open(Path(out) / name, 'rb') as f:
                    records = list(dpkt.pcap.Reader(f))
                self.assertEqual(len(records), packets, name)
                self.assertEqual(sum(len(buf) for _, buf in records), size, name)
                stamps = [ts for ts, _ in records]
                self.assertEqual(stamps, sorted(stamps), name)
            self.assertGreater(report.captured_packets, 0)

    def test_run_log_lists_byte_counters(self):
        with tempfile.TemporaryDirectory() as out:
            report = run(parse_config(ATTACK_SCENARIO), Path(out))
            sections = read_run_log(report.run_log)

        sent = report.vector_sent
        self.assertEqual(report.vector_bytes, {'V1': sent['V1'] * 200, 'V2': sent['V2'] * 60})
        self.assertIn(f"sent V1 {sent['V1']} bytes={report.vector_bytes['V1']}", sections['run'])

        for line in sections['links']:
            name, *fields = line.split()
            self.assertEqual(fields[-1], f"tx_bytes={report.links[name].tx_bytes}")
        uplinks = report.links['AS0-C0-to-AS0-GW'].tx_bytes + report.links['AS0-C1-to-AS0-GW'].tx_bytes
        self.assertEqual(uplinks, sum(report.vector_bytes.values()))

    def test_capture_failure_aborts_and_flags_partial_files(self):
        cfg = parse_config(ATTACK_SCENARIO)
        failing = mock.Mock(side_effect=CaptureWriteError('ENG__CN0-to-CN1__cap.pcap', 'disk full'))
        with tempfile.TemporaryDirectory() as out, mock.patch('engine.simulator.append_packet', failing):
            with self.assertRaises(CaptureWriteError):
                run(cfg, Path(out))
            log, = Path(out).glob('*.log')
            sections = read_run_log(log)

        self.assertIn('aborted true', sections['run'])
        self.assertTrue(any(line.endswith(' partial') for line in sections['captures']))


class ScalabilityTrendTests(SimpleTestCase):
    """Work per simulated second across the scalability presets."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.reports = {name: simulate_preset(name) for name in ('sc1', 'sc2', 'sc3', 'sc2_pv', 'sc2_as')}

    def test_work_grows_with_scenario_size(self):
        sc1, sc2, sc3 = (self.reports[name] for name in ('sc1', 'sc2', 'sc3'))

        self.assertLess(sc1.events, sc2.events)
        self.assertLess(sc2.events, sc3.events)
        self.assertLess(sc1.delivered, sc2.delivered)
        self.assertLess(sc2.delivered, sc3.delivered)

    def test_packet_rate_outweighs_as_count(self):
        baseline = self.reports['sc2'].events
        packet_rate = self.reports['sc2_pv'].events / baseline
        as_count = self.reports['sc2_as'].events / baseline

        self.assertGreater(packet_rate, 2.0)
        self.assertGreater(packet_rate, as_count)
