import dataclasses
from ipaddress import IPv4Address, IPv4Network

import networkx as nx
from django.test import SimpleTestCase

from core.rng import derive_rng
from scenario.models import AsSpec, CnSpec, Role
from scenario.parser import load_config, parse_config, resolve_preset

from .builder import (
    assign_addresses,
    attach_autonomous_systems,
    build_central_network,
    build_topology,
    dump_edge_list,
    link_count,
    subnet_for,
)
from .exceptions import AddressSpaceExhausted
from .models import Link, Node, NodeKind, Topology
from .routing import compute_routes, path


def manual_topology(cn_edges, hosts_at):
    """CN routers 0..n-1 from ``cn_edges`` plus one host hanging off each CN node in ``hosts_at``."""
    cn_count = max(max(edge) for edge in cn_edges) + 1
    nodes = [Node(i, f"CN{i}", NodeKind.CN) for i in range(cn_count)]
    links = []
    for u, v in sorted(cn_edges):
        links.append(Link(len(links), u, v, 1e9, 0.001, 100))
    for attach_to in hosts_at:
        host = Node(len(nodes), f"H{len(nodes)}", NodeKind.CLIENT, role=Role.BENIGN)
        nodes.append(host)
        links.append(Link(len(links), attach_to, host.id, 1e8, 0.0002, 100))
    return assign_addresses(Topology(nodes=tuple(nodes), links=tuple(links)))


class CentralNetworkTests(SimpleTestCase):
    def test_link_count_law_and_connectivity(self):
        for n in range(2, 11):
            for redundancy in (0, 0.25, 0.5, 0.75, 1):
                expected = link_count(n, redundancy)
                for seed in range(100):
                    graph = build_central_network(n, redundancy, derive_rng(seed, 'topology'))
                    self.assertEqual(graph.number_of_edges(), expected, (n, redundancy, seed))
                    self.assertTrue(nx.is_connected(graph), (n, redundancy, seed))
                    self.assertEqual(nx.number_of_selfloops(graph), 0)

    def test_examples(self):
        rng = derive_rng(3, 'topology')
        self.assertEqual(build_central_network(8, 0, rng).number_of_edges(), 7)
        self.assertEqual(build_central_network(8, 1, rng).number_of_edges(), 28)
        self.assertEqual(build_central_network(8, 0.5, rng).number_of_edges(), 18)

    def test_redundancy_rounds_half_up(self):
        # n=4 has 3 candidate extra links; 0.5 * 3 = 1.5 rounds to 2
        self.assertEqual(link_count(4, 0.5), 5)

    def test_single_node(self):
        graph = build_central_network(1, 0.5, derive_rng(0, 'topology'))

        self.assertEqual(graph.number_of_nodes(), 1)
        self.assertEqual(graph.number_of_edges(), 0)


class AttachTests(SimpleTestCase):
    def _gateway_placement(self, cn_nodes, as_count, seed=0):
        rng = derive_rng(seed, 'topology')
        cn = build_central_network(cn_nodes, 0.5, rng)
        specs = [AsSpec(id=f"AS{i}", client_count=1) for i in range(as_count)]
        topo = attach_autonomous_systems(cn, CnSpec(cn_nodes), specs, rng)
        placement = {}
        for link in topo.links:
            for end, other in ((link.a, link.b), (link.b, link.a)):
                if topo.nodes[end].kind == NodeKind.GATEWAY and topo.nodes[other].kind == NodeKind.CN:
                    self.assertNotIn(end, placement)
                    placement[end] = other
        self.assertEqual(len(placement), as_count)
        return topo, placement

    def test_four_as_on_eight_cn_nodes(self):
        for seed in range(10):
            _, placement = self._gateway_placement(8, 4, seed)
            self.assertEqual(len(set(placement.values())), 4)

    def test_round_robin_balances(self):
        _, placement = self._gateway_placement(6, 12)
        counts = [list(placement.values()).count(node) for node in range(6)]

        self.assertEqual(counts, [2] * 6)

    def test_empty_as_keeps_graph_connected(self):
        rng = derive_rng(0, 'topology')
        cn = build_central_network(3, 0, rng)
        topo = attach_autonomous_systems(cn, CnSpec(3), [AsSpec(id='AS0'), AsSpec(id='AS1', client_count=2)], rng)
        graph = nx.Graph([(link.a, link.b) for link in topo.links])

        self.assertEqual(topo.node('AS0-GW').kind, NodeKind.GATEWAY)
        self.assertEqual(graph.number_of_nodes(), len(topo.nodes))
        self.assertTrue(nx.is_connected(graph))

    def test_node_order_and_roles(self):
        rng = derive_rng(0, 'topology')
        spec = AsSpec(id='AS0', client_count=2, server_count=1, roles={0: Role.ATTACKER, 2: Role.TARGET})
        topo = attach_autonomous_systems(build_central_network(2, 0, rng), CnSpec(2), [spec], rng)

        self.assertEqual([node.name for node in topo.nodes], ['CN0', 'CN1', 'AS0-GW', 'AS0-C0', 'AS0-C1', 'AS0-S0'])
        self.assertEqual(topo.node('AS0-C0').role, Role.ATTACKER)
        self.assertEqual(topo.node('AS0-C1').role, Role.BENIGN)
        self.assertEqual(topo.node('AS0-S0').role, Role.TARGET)
        self.assertEqual(topo.node('AS0-S0').kind, NodeKind.SERVER)


class AddressingTests(SimpleTestCase):
    def test_first_link(self):
        topo = manual_topology([(0, 1)], [])
        link = topo.links[0]

        self.assertEqual(link.addr_a, IPv4Address('10.0.0.1'))
        self.assertEqual(link.addr_b, IPv4Address('10.0.0.2'))
        self.assertEqual(topo.owner_of(IPv4Address('10.0.0.1')), 0)

    def test_subnet_numbering(self):
        self.assertEqual(subnet_for(256), IPv4Network('10.1.0.0/30'))
        self.assertEqual(subnet_for(65535), IPv4Network('10.255.255.0/30'))
        with self.assertRaises(AddressSpaceExhausted):
            subnet_for(65536)

    def test_subnets_unique(self):
        for seed in range(5):
            cfg = load_config(resolve_preset('dist'))
            topo = build_topology(dataclasses.replace(cfg, seed=seed))
            subnets = [link.subnet for link in topo.links]
            addresses = [a for link in topo.links for a in (link.addr_a, link.addr_b)]
            self.assertEqual(len(set(subnets)), len(subnets))
            self.assertEqual(len(set(addresses)), len(addresses))

    def test_edge_list(self):
        topo = manual_topology([(0, 1)], [1])

        self.assertEqual(dump_edge_list(topo), 'CN0 CN1 1000000000 0.001 10.0.0.0/30\n'
                                               'CN1 H2 100000000 0.0002 10.0.1.0/30\n')


class RoutingTests(SimpleTestCase):
    def _walk(self, topo, src, dst):
        return [hop.dst for hop in path(topo, src, topo.host_address(dst))]

    def test_line(self):
        topo = manual_topology([(0, 1), (1, 2)], [0, 2])
        topo = dataclasses.replace(topo, routes=compute_routes(topo))

        self.assertEqual(self._walk(topo, 3, 4), [0, 1, 2, 4])

    def test_triangle_prefers_direct_link(self):
        topo = manual_topology([(0, 1), (0, 2), (1, 2)], [0, 2])
        topo = dataclasses.replace(topo, routes=compute_routes(topo))

        self.assertEqual(self._walk(topo, 3, 4), [0, 2, 4])

    def test_tie_goes_to_lowest_id(self):
        topo = manual_topology([(0, 3), (0, 5), (1, 3), (1, 5), (0, 2), (0, 4)], [])
        routes = compute_routes(topo, destinations=[1])
        graph = nx.Graph([(link.a, link.b) for link in topo.links])
        first_hops = {p[1] for p in nx.all_shortest_paths(graph, 0, 1)}

        self.assertEqual(first_hops, {3, 5})
        self.assertEqual(routes.next_hop(0, 1), min(first_hops))

    def test_no_loops_between_hosts(self):
        topo = build_topology(load_config(resolve_preset('dist')))
        hosts = [node.id for node in topo.hosts()]
        for src in hosts:
            for dst in hosts:
                if src == dst:
                    continue
                visited = [src] + self._walk(topo, src, dst)
                self.assertEqual(len(visited), len(set(visited)))
                self.assertEqual(visited[-1], dst)

    def test_cross_as_path_uses_gateways_and_cn(self):
        topo = build_topology(load_config(resolve_preset('dist')))
        hops = path(topo, topo.node_id('AS1-C0'), topo.host_address(topo.node_id('AS3-S0')))
        visited = [topo.nodes[hop.dst].name for hop in hops]

        self.assertEqual(visited[0], 'AS1-GW')
        self.assertEqual(visited[-2:], ['AS3-GW', 'AS3-S0'])
        self.assertGreaterEqual(sum(topo.is_cn_link(hop.link) for hop in hops), 2)

    def test_deterministic(self):
        cfg = load_config(resolve_preset('dist'))

        self.assertEqual(build_topology(cfg), build_topology(cfg))

    def test_single_gateway_link_per_as(self):
        cfg = parse_config("""
name: shape
duration: 1
central_network: {node_count: 6, redundancy: 0.25}
autonomous_systems:
  - {id: A, client_count: 2, server_count: 1}
  - {id: B, client_count: 1, server_count: 1}
""")
        topo = build_topology(cfg)
        for spec in cfg.autonomous_systems:
            gateway = topo.node_id(spec.gateway_name)
            uplinks = [i for i in topo.cn_links if gateway in (topo.links[i].a, topo.links[i].b)]
            self.assertEqual(len(uplinks), 1)
