"""
Static Routing

Hop-count shortest paths toward every host. Ties go to the neighbor with
the smallest node id, so each (source, destination) pair has exactly one
path and no ECMP.
"""

from ipaddress import IPv4Address

import networkx as nx

from .exceptions import UnreachableDestination
from .models import Hop, RoutingTable, Topology


def _graph(topo: Topology) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(node.id for node in topo.nodes)
    graph.add_edges_from((link.a, link.b) for link in topo.links)
    return graph


def compute_routes(topo: Topology, destinations: list[int] | None = None) -> RoutingTable:
    """
    Compute next hops toward each destination.

    Args:
        topo: Connected topology
        destinations: Node ids to route toward (default: every host)

    Returns:
        RoutingTable covering every node for each destination

    Raises:
        UnreachableDestination: Some node cannot reach a destination
    """
    graph = _graph(topo)
    if destinations is None:
        destinations = [node.id for node in topo.hosts()]

    next_node: dict[int, dict[int, int]] = {}
    for dest in destinations:
        distance = nx.single_source_shortest_path_length(graph, dest)
        if len(distance) != len(topo.nodes):
            missing = next(node for node in topo.nodes if node.id not in distance)
            raise UnreachableDestination(missing.name, topo.nodes[dest].name)

        hops = {}
        for node, dist in distance.items():
            if node == dest:
                continue
            # neighbors() is sorted by id: the first closer one wins ties
            hops[node] = next(
                neighbor for neighbor, _ in topo.neighbors(node)
                if distance[neighbor] == dist - 1
            )
        next_node[dest] = hops
    return RoutingTable(next_node)


def path(topo: Topology, src: int, dst_addr: IPv4Address) -> list[Hop]:
    """
    Directed links a packet from ``src`` to ``dst_addr`` traverses, in order.

    Raises:
        UnreachableDestination: Address unknown or not routed
    """
    dest = topo.owner_of(dst_addr)
    if dest is None:
        raise UnreachableDestination(topo.nodes[src].name, str(dst_addr))

    hops = []
    node = src
    while node != dest:
        following = topo.routes.next_hop(node, dest)
        if following is None or len(hops) > len(topo.nodes):
            raise UnreachableDestination(topo.nodes[src].name, topo.nodes[dest].name)
        hops.append(Hop(topo.link_between(node, following).index, node, following))
        node = following
    return hops
