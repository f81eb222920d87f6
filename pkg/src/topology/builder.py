"""
Topology Builder

Synthesizes the Central Network partial mesh, attaches one gateway per
Autonomous System, star-wires AS hosts to their gateway and numbers every
point-to-point link with its own /30.
"""

import dataclasses
import logging
from ipaddress import IPv4Address, IPv4Network

import networkx as nx
import numpy as np

from core.rng import derive_rng
from core.units import round_half_up
from scenario.models import AsSpec, CnSpec, ScenarioConfig

from .exceptions import AddressSpaceExhausted
from .models import Link, Node, NodeKind, Topology
from .routing import compute_routes

logger = logging.getLogger('topology')

MAX_LINKS = 65536


def link_count(n: int, redundancy: float) -> int:
    """Undirected CN link count: spanning tree plus the redundant share."""
    tree = n - 1
    candidates = n * (n - 1) // 2 - tree
    return tree + round_half_up(redundancy * candidates)


def build_central_network(n: int, redundancy: float, rng: np.random.Generator) -> nx.Graph:
    """
    Build the CN partial mesh.

    A random recursive spanning tree guarantees connectivity; the
    remaining ``redundancy`` share of non-tree node pairs is then sampled
    uniformly without replacement.

    Args:
        n: Node count (>= 1)
        redundancy: Share of superfluous links in [0, 1]
        rng: Seeded generator

    Returns:
        Undirected graph over nodes 0..n-1
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(n))

    order = rng.permutation(n).tolist()
    for position in range(1, n):
        parent = order[int(rng.integers(position))]
        graph.add_edge(order[position], parent)

    extra = link_count(n, redundancy) - (n - 1)
    if extra > 0:
        candidates = sorted(tuple(sorted(pair)) for pair in nx.non_edges(graph))
        picks = rng.choice(len(candidates), size=extra, replace=False)
        graph.add_edges_from(candidates[i] for i in sorted(picks.tolist()))

    logger.debug(f"Central network: {n} nodes, {graph.number_of_edges()} links")
    return graph


def _place_gateways(cn_nodes: int, as_count: int, rng: np.random.Generator) -> list[int]:
    """Least-loaded CN node for each AS in turn; the generator breaks ties."""
    load = [0] * cn_nodes
    placement = []
    for _ in range(as_count):
        fewest = min(load)
        candidates = [node for node, count in enumerate(load) if count == fewest]
        choice = candidates[int(rng.integers(len(candidates)))]
        load[choice] += 1
        placement.append(choice)
    return placement


def attach_autonomous_systems(cn: nx.Graph, cn_spec: CnSpec, specs: tuple[AsSpec, ...] | list[AsSpec],
                              rng: np.random.Generator) -> Topology:
    """
    Add gateways and hosts around the CN graph.

    Node ids: CN routers first, then per AS its gateway, clients and
    servers. Link order: sorted CN edges, then per AS the gateway uplink
    followed by its host links.
    """
    nodes = [Node(i, f"CN{i}", NodeKind.CN) for i in range(cn.number_of_nodes())]
    links: list[Link] = []
    cn_links = set()

    def connect(u: int, v: int, rate: float, delay: float, queue_len: int) -> int:
        index = len(links)
        links.append(Link(index, min(u, v), max(u, v), rate, delay, queue_len))
        return index

    for u, v in sorted(tuple(sorted(edge)) for edge in cn.edges()):
        cn_links.add(connect(u, v, cn_spec.link_rate, cn_spec.link_delay, cn_spec.queue_len))

    placement = _place_gateways(len(nodes), len(specs), rng)
    for spec, attach_to in zip(specs, placement):
        gateway = Node(len(nodes), spec.gateway_name, NodeKind.GATEWAY, as_id=spec.id)
        nodes.append(gateway)
        # Uplink uses CN link parameters: it terminates on a CN interface
        cn_links.add(connect(attach_to, gateway.id, cn_spec.link_rate, cn_spec.link_delay, cn_spec.queue_len))

        for index, name in enumerate(spec.host_names()):
            kind = NodeKind.CLIENT if index < spec.client_count else NodeKind.SERVER
            host = Node(len(nodes), name, kind, role=spec.role_of(index), as_id=spec.id)
            nodes.append(host)
            connect(gateway.id, host.id, spec.link_rate, spec.link_delay, spec.queue_len)

        logger.debug(f"{spec.gateway_name} attached to CN{attach_to}")

    return Topology(nodes=tuple(nodes), links=tuple(links), cn_links=frozenset(cn_links))


def subnet_for(index: int) -> IPv4Network:
    if index >= MAX_LINKS:
        raise AddressSpaceExhausted(index + 1, MAX_LINKS)
    return IPv4Network(f"10.{index // 256}.{index % 256}.0/30")


def assign_addresses(topo: Topology) -> Topology:
    """Give link k the subnet 10.(k/256).(k%256).0/30; the lower node id takes .1."""
    if len(topo.links) > MAX_LINKS:
        raise AddressSpaceExhausted(len(topo.links), MAX_LINKS)
    links = []
    for link in topo.links:
        subnet = subnet_for(link.index)
        base = int(subnet.network_address)
        links.append(dataclasses.replace(
            link, subnet=subnet, addr_a=IPv4Address(base + 1), addr_b=IPv4Address(base + 2),
        ))
    return dataclasses.replace(topo, links=tuple(links))


def build_topology(cfg: ScenarioConfig) -> Topology:
    """
    Build the complete, addressed and routed topology of a scenario.

    The generator is derived from the scenario seed, so identical
    configurations always give identical topologies.
    """
    rng = derive_rng(cfg.seed, 'topology')
    cn = build_central_network(cfg.central_network.node_count, cfg.central_network.redundancy, rng)
    topo = attach_autonomous_systems(cn, cfg.central_network, cfg.autonomous_systems, rng)
    topo = assign_addresses(topo)
    topo = dataclasses.replace(topo, routes=compute_routes(topo))
    logger.info(f"Topology: {len(topo.nodes)} nodes, {len(topo.links)} links, "
                f"{len(topo.cn_links)} on the CN surface")
    return topo


def _format_rate(rate: float) -> str:
    return str(int(rate)) if float(rate).is_integer() else repr(rate)


def dump_edge_list(topo: Topology) -> str:
    """Plain-text edge list ``from to rate_bps delay_s subnet``, one link per line."""
    lines = []
    for link in topo.links:
        lines.append(' '.join([
            topo.nodes[link.a].name,
            topo.nodes[link.b].name,
            _format_rate(link.rate),
            repr(float(link.delay)),
            str(link.subnet) if link.subnet is not None else '-',
        ]))
    return '\n'.join(lines) + '\n' if lines else ''
