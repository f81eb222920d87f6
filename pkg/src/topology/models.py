"""
Pulse-Wave Simulator - Topology Models

Entities:
- Node: CN router, AS gateway or AS host
- Link: Point-to-point channel with its own /30 subnet
- Hop: One directed traversal of a link
- Topology: Nodes, links, addresses and routes of one scenario
"""

from __future__ import annotations

from dataclasses import dataclass, field
from ipaddress import IPv4Address, IPv4Network

from django.db import models

from scenario.models import Role


class NodeKind(models.TextChoices):
    """Node kind enumeration."""
    CN = 'cn', 'Central Network router'
    GATEWAY = 'gateway', 'AS gateway'
    CLIENT = 'client', 'AS client'
    SERVER = 'server', 'AS server'


HOST_KINDS = (NodeKind.CLIENT, NodeKind.SERVER)


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    kind: NodeKind
    role: Role | None = None
    as_id: str | None = None

    @property
    def is_host(self) -> bool:
        return self.kind in HOST_KINDS


@dataclass(frozen=True)
class Link:
    """
    Undirected point-to-point link; ``a`` is always the lower node id.

    Addresses are filled by ``assign_addresses``.
    """
    index: int
    a: int
    b: int
    rate: float
    delay: float
    queue_len: int
    subnet: IPv4Network | None = None
    addr_a: IPv4Address | None = None
    addr_b: IPv4Address | None = None

    def other(self, node: int) -> int:
        return self.b if node == self.a else self.a

    def address_of(self, node: int) -> IPv4Address | None:
        return self.addr_a if node == self.a else self.addr_b


@dataclass(frozen=True)
class Hop:
    """Directed traversal of ``link`` from node ``src`` to node ``dst``."""
    link: int
    src: int
    dst: int


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    cn_links: frozenset[int] = frozenset()
    routes: RoutingTable | None = None
    _by_name: dict[str, int] = field(init=False, compare=False, repr=False)
    _adjacency: dict[int, list[tuple[int, int]]] = field(init=False, compare=False, repr=False)
    _owners: dict[IPv4Address, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        by_name = {node.name: node.id for node in self.nodes}
        adjacency: dict[int, list[tuple[int, int]]] = {node.id: [] for node in self.nodes}
        owners = {}
        for link in self.links:
            adjacency[link.a].append((link.b, link.index))
            adjacency[link.b].append((link.a, link.index))
            if link.addr_a is not None:
                owners[link.addr_a] = link.a
                owners[link.addr_b] = link.b
        for neighbors in adjacency.values():
            neighbors.sort()
        object.__setattr__(self, '_by_name', by_name)
        object.__setattr__(self, '_adjacency', adjacency)
        object.__setattr__(self, '_owners', owners)

    def node(self, name: str) -> Node:
        return self.nodes[self._by_name[name]]

    def node_id(self, name: str) -> int:
        return self._by_name[name]

    def neighbors(self, node: int) -> list[tuple[int, int]]:
        """(neighbor id, link index) pairs sorted by neighbor id."""
        return self._adjacency[node]

    def owner_of(self, address: IPv4Address) -> int | None:
        return self._owners.get(address)

    def host_address(self, node: int) -> IPv4Address:
        """Address of a host's single interface (toward its gateway)."""
        (_, link_index), = self._adjacency[node]
        return self.links[link_index].address_of(node)

    def link_between(self, u: int, v: int) -> Link:
        for neighbor, link_index in self._adjacency[u]:
            if neighbor == v:
                return self.links[link_index]
        raise KeyError(f"no link between {self.nodes[u].name} and {self.nodes[v].name}")

    def is_cn_link(self, link_index: int) -> bool:
        """True for CN-CN and CN-gateway links (the capture surface)."""
        return link_index in self.cn_links

    def hosts(self) -> list[Node]:
        return [node for node in self.nodes if node.is_host]


class RoutingTable:
    """
    Next hop toward every destination host.

    ``next_node[dest][node]`` is the neighbor ``node`` forwards to; the
    table is computed once and never mutated.
    """

    def __init__(self, next_node: dict[int, dict[int, int]]):
        self.next_node = next_node

    def next_hop(self, node: int, dest: int) -> int | None:
        return self.next_node.get(dest, {}).get(node)

    def __eq__(self, other):
        return isinstance(other, RoutingTable) and self.next_node == other.next_node
