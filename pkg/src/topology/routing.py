"""
Routes toward an announcing origin: shortest-path DAG and Gao-Rexford policy trees
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import networkx as nx
import numpy as np

try:
    from .graph import AsGraph
    from ..utils.errors import DomainError, UnlabeledGraph
    from ..utils.random_streams import make_stream
    from ..utils.constants import (
        ROUTE_CUSTOMER, ROUTE_PEER, ROUTE_PROVIDER, ROUTE_ORIGIN, ROUTE_NONE, STREAM_LOCAL_PREFS,
    )
except ImportError:
    from topology.graph import AsGraph
    from utils.errors import DomainError, UnlabeledGraph
    from utils.random_streams import make_stream
    from utils.constants import (
        ROUTE_CUSTOMER, ROUTE_PEER, ROUTE_PROVIDER, ROUTE_ORIGIN, ROUTE_NONE, STREAM_LOCAL_PREFS,
    )

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolicyPath:
    """Route between the announcing source and one destination, source first"""

    source: int
    destination: int
    nodes: tuple

    def __post_init__(self):
        if not self.nodes or self.nodes[0] != self.source or self.nodes[-1] != self.destination:
            raise DomainError(f"Path {self.nodes} does not run from {self.source} to {self.destination}")
        if len(set(self.nodes)) != len(self.nodes):
            raise DomainError(f"Path {self.nodes} contains a loop")

    @property
    def d(self) -> int:
        return len(self.nodes) - 1


@dataclass
class RoutingTree:
    """Per-node next hop toward the source.

    ``parent[v]`` is the neighbor v learned its route from (-1 at the source
    and at unreachable nodes); ``order`` lists reachable nodes by
    nondecreasing distance, so parents always precede children.
    """

    source: int
    parent: np.ndarray
    dist: np.ndarray
    route_class: np.ndarray
    order: List[int]

    def reachable(self, node: int) -> bool:
        return self.dist[node] >= 0

    def reached_count(self) -> int:
        return len(self.order)

    def path(self, destination: int) -> Optional[PolicyPath]:
        """Node sequence source -> destination, or None when unreachable"""
        if not self.reachable(destination):
            return None
        nodes = [destination]
        while nodes[-1] != self.source:
            nodes.append(int(self.parent[nodes[-1]]))
        return PolicyPath(self.source, destination, tuple(reversed(nodes)))

    def children(self) -> List[List[int]]:
        result: List[List[int]] = [[] for _ in range(len(self.parent))]
        for node in self.order:
            if node != self.source:
                result[int(self.parent[node])].append(node)
        return result


@dataclass
class ShortestPaths:
    """BFS distances from the source plus the shortest-path DAG"""

    source: int
    dist: np.ndarray
    predecessors: List[List[int]]
    order: List[int]

    def dag_edges(self) -> List[tuple]:
        return [(u, v) for v in self.order for u in self.predecessors[v]]

    def tree(self) -> RoutingTree:
        """Shortest-path tree using the lowest-id DAG parent"""
        n = len(self.dist)
        parent = np.full(n, -1, dtype=np.int64)
        route_class = np.full(n, ROUTE_NONE, dtype=np.int8)
        for node in self.order:
            if node == self.source:
                route_class[node] = ROUTE_ORIGIN
            else:
                parent[node] = self.predecessors[node][0]
                route_class[node] = ROUTE_CUSTOMER
        return RoutingTree(self.source, parent, self.dist.copy(), route_class, list(self.order))


def _check_source(graph: AsGraph, source: int):
    if not 0 <= source < graph.n:
        raise DomainError(f"Source {source} is not a node of a graph with {graph.n} nodes")


def shortest_paths(graph: AsGraph, source: int) -> ShortestPaths:
    """Hop distances and DAG: u -> v iff dist(v) = dist(u) + 1"""
    _check_source(graph, source)
    lengths = nx.single_source_shortest_path_length(graph.graph, source)
    dist = np.full(graph.n, -1, dtype=np.int64)
    for node, length in lengths.items():
        dist[node] = length
    order = sorted(lengths, key=lambda node: (lengths[node], node))
    predecessors: List[List[int]] = [[] for _ in range(graph.n)]
    for node in order:
        if node == source:
            continue
        predecessors[node] = [u for u in graph.neighbors(node) if dist[u] == dist[node] - 1]
    return ShortestPaths(source, dist, predecessors, order)


def assign_local_prefs(graph: AsGraph, seed: int) -> AsGraph:
    """Give each node a random ranking 1..degree of its neighbors"""
    rng = make_stream(seed, STREAM_LOCAL_PREFS)
    prefs: Dict[int, Dict[int, int]] = {}
    for node in range(graph.n):
        neighbors = graph.neighbors(node)
        ranks = rng.permutation(len(neighbors)) + 1
        prefs[node] = {neighbor: int(rank) for neighbor, rank in zip(neighbors, ranks)}
    return graph.with_local_prefs(prefs)


def _best_next_hop(graph: AsGraph, node: int, candidates: List[int]) -> int:
    # highest local preference, then lowest AS number
    return max(candidates, key=lambda u: (graph.local_pref(node, u), -graph.asn(u)))


def policy_tree(graph: AsGraph, source: int) -> RoutingTree:
    """Best valley-free routes of every node toward the origin ``source``.

    Route choice prefers customer over peer over provider routes, then
    shorter routes, then higher local preference. Customer routes climb
    provider links layer by layer, peer routes take a single peer hop from
    a node holding a customer route, provider routes descend customer
    links from any routed node.
    """
    if not graph.labeled:
        raise UnlabeledGraph("Policy routing needs relationship labels on every edge")
    _check_source(graph, source)

    n = graph.n
    parent = np.full(n, -1, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    route_class = np.full(n, ROUTE_NONE, dtype=np.int8)
    split = [graph.split_neighbors(node) for node in range(n)]

    dist[source] = 0
    route_class[source] = ROUTE_ORIGIN

    # customer routes: move up provider links
    frontier = [source]
    while frontier:
        candidates: Dict[int, List[int]] = {}
        for u in frontier:
            for provider in split[u][2]:
                if route_class[provider] == ROUTE_NONE:
                    candidates.setdefault(provider, []).append(u)
        for node, via in candidates.items():
            parent[node] = _best_next_hop(graph, node, via)
            dist[node] = dist[parent[node]] + 1
            route_class[node] = ROUTE_CUSTOMER
        frontier = sorted(candidates)

    # peer routes: one peer hop from the origin or a customer route
    exporters = [u for u in range(n) if route_class[u] in (ROUTE_ORIGIN, ROUTE_CUSTOMER)]
    offers: Dict[int, List[int]] = {}
    for u in exporters:
        for peer in split[u][1]:
            if route_class[peer] == ROUTE_NONE:
                offers.setdefault(peer, []).append(u)
    for node, via in offers.items():
        shortest = min(dist[u] for u in via)
        parent[node] = _best_next_hop(graph, node, [u for u in via if dist[u] == shortest])
        dist[node] = shortest + 1
        route_class[node] = ROUTE_PEER

    # provider routes: descend customer links, processed by route length
    buckets: Dict[int, List[int]] = {}
    for u in range(n):
        if dist[u] >= 0:
            buckets.setdefault(int(dist[u]), []).append(u)
    length = 0
    while length <= max(buckets, default=-1):
        candidates = {}
        for u in buckets.get(length, []):
            for customer in split[u][0]:
                if route_class[customer] == ROUTE_NONE:
                    candidates.setdefault(customer, []).append(u)
        for node, via in candidates.items():
            parent[node] = _best_next_hop(graph, node, via)
            dist[node] = length + 1
            route_class[node] = ROUTE_PROVIDER
        if candidates:
            buckets.setdefault(length + 1, []).extend(candidates)
        length += 1

    order = sorted((node for node in range(n) if dist[node] >= 0), key=lambda node: (dist[node], node))
    unreached = n - len(order)
    if unreached:
        logger.debug(f"Policy tree from {source}: {unreached} nodes without a valley-free route")
    return RoutingTree(source, parent, dist, route_class, order)


def compute_policy_paths(graph: AsGraph, source: int) -> Dict[int, Optional[PolicyPath]]:
    """Best policy path from ``source`` to every other node (None if unreachable)"""
    tree = policy_tree(graph, source)
    return {node: tree.path(node) for node in range(graph.n) if node != source}


def is_valley_free(graph: AsGraph, nodes: List[int]) -> bool:
    """Whether an announcement can travel along ``nodes`` under the export rules"""
    climbing = True
    for u, v in zip(nodes, nodes[1:]):
        relation = graph.relation(u, v)
        if relation == "provider":
            if not climbing:
                return False
        elif relation == "peer":
            if not climbing:
                return False
            climbing = False
        else:
            climbing = False
    return True
