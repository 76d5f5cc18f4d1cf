"""
AS graph container

Nodes are dense integers 0..N-1, each optionally carrying its original AS
number. In policy mode every edge is labeled either p2p or c2p; a c2p edge
stores which endpoint is the customer.
"""

import hashlib
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import networkx as nx
import pandas as pd

try:
    from ..utils.errors import DomainError, UnlabeledGraph
    from ..utils.constants import REL_P2P, REL_C2P
except ImportError:
    from utils.errors import DomainError, UnlabeledGraph
    from utils.constants import REL_P2P, REL_C2P

logger = logging.getLogger(__name__)


class AsGraph:
    """Undirected AS topology, optionally with relationships and local preferences"""

    def __init__(self, graph: nx.Graph, local_prefs: Optional[Dict[int, Dict[int, int]]] = None):
        nodes = sorted(graph.nodes)
        if nodes != list(range(len(nodes))):
            raise DomainError("AsGraph nodes must be the dense integers 0..N-1")
        if nx.number_of_selfloops(graph):
            raise DomainError("AsGraph must not contain self-loops")

        labels = [data.get("rel") for _, _, data in graph.edges(data=True)]
        labeled = sum(label is not None for label in labels)
        if labeled and labeled != len(labels):
            raise DomainError(f"Only {labeled} of {len(labels)} edges carry a relationship label")
        for u, v, data in graph.edges(data=True):
            rel = data.get("rel")
            if rel is not None and rel not in (REL_P2P, REL_C2P):
                raise DomainError(f"Unknown relationship {rel!r} on edge {u}-{v}")
            if rel == REL_C2P and data.get("customer") not in (u, v):
                raise DomainError(f"c2p edge {u}-{v} does not name its customer endpoint")

        self.graph = graph
        self.labeled = bool(labels) and labeled == len(labels)
        self.adjacency: List[List[int]] = [sorted(graph.adj[node]) for node in nodes]
        self._split: Optional[List[Tuple[List[int], List[int], List[int]]]] = None
        self.local_prefs = None
        if local_prefs is not None:
            self._check_prefs(local_prefs)
            self.local_prefs = local_prefs

    def _check_prefs(self, prefs: Dict[int, Dict[int, int]]):
        for node, neighbors in enumerate(self.adjacency):
            if set(prefs.get(node, {})) != set(neighbors):
                raise DomainError(f"Local preferences for node {node} do not cover its neighbors")

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def neighbors(self, node: int) -> List[int]:
        return self.adjacency[node]

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def asn(self, node: int) -> int:
        return int(self.graph.nodes[node].get("asn", node))

    def mean_degree(self) -> float:
        return 2.0 * self.edge_count() / self.n if self.n else 0.0

    def relation(self, node: int, neighbor: int) -> str:
        """What ``neighbor`` is to ``node``: 'customer', 'peer' or 'provider'"""
        if not self.labeled:
            raise UnlabeledGraph("Graph has no relationship labels")
        data = self.graph.edges[node, neighbor]
        if data["rel"] == REL_P2P:
            return "peer"
        return "customer" if data["customer"] == neighbor else "provider"

    def split_neighbors(self, node: int) -> Tuple[List[int], List[int], List[int]]:
        """(customers, peers, providers) of ``node``, each sorted by id"""
        if self._split is None:
            self._split = [self._classify(v) for v in range(self.n)]
        return self._split[node]

    def _classify(self, node: int) -> Tuple[List[int], List[int], List[int]]:
        customers, peers, providers = [], [], []
        for neighbor in self.adjacency[node]:
            relation = self.relation(node, neighbor)
            if relation == "customer":
                customers.append(neighbor)
            elif relation == "peer":
                peers.append(neighbor)
            else:
                providers.append(neighbor)
        return customers, peers, providers

    def local_pref(self, node: int, neighbor: int) -> int:
        if self.local_prefs is None:
            return 0
        return self.local_prefs[node][neighbor]

    def with_local_prefs(self, prefs: Dict[int, Dict[int, int]]) -> "AsGraph":
        return AsGraph(self.graph, prefs)

    def is_connected(self) -> bool:
        return self.n > 0 and nx.is_connected(self.graph)

    def subgraph(self, nodes: Iterable[int]) -> "AsGraph":
        """Induced subgraph, relabeled densely in increasing id order"""
        keep = sorted(set(nodes))
        mapping = {old: new for new, old in enumerate(keep)}
        sub = nx.relabel_nodes(self.graph.subgraph(keep).copy(), mapping)
        for u, v, data in sub.edges(data=True):
            if "customer" in data:
                data["customer"] = mapping[data["customer"]]
        for old, new in mapping.items():
            sub.nodes[new].setdefault("asn", self.asn(old))
        return AsGraph(sub)

    def __repr__(self) -> str:
        mode = "labeled" if self.labeled else "unlabeled"
        return f"AsGraph(n={self.n}, edges={self.edge_count()}, {mode})"


def from_networkx(graph: nx.Graph) -> AsGraph:
    """Wrap a generator output, relabeling nodes densely"""
    graph = nx.convert_node_labels_to_integers(graph, ordering="sorted")
    return AsGraph(nx.Graph(graph))


def largest_component(graph: AsGraph) -> AsGraph:
    """The largest connected component, relabeled; the graph itself if connected"""
    if graph.n == 0 or graph.is_connected():
        return graph
    component = max(nx.connected_components(graph.graph), key=lambda c: (len(c), -min(c)))
    logger.warning(f"Graph is disconnected; using largest component ({len(component)} of {graph.n} nodes)")
    return graph.subgraph(component)


def prune(graph: AsGraph, min_degree: int = 3, drop_stubs: bool = True) -> AsGraph:
    """Drop low-degree nodes and (in policy mode) stub ASes without customers.

    Repeats until stable, since every removal lowers neighbor degrees.
    """
    keep = set(range(graph.n))
    while True:
        sub = graph.graph.subgraph(keep)
        drop = set()
        for node in keep:
            if sub.degree(node) < min_degree:
                drop.add(node)
            elif drop_stubs and graph.labeled:
                has_customer = any(
                    graph.relation(node, neighbor) == "customer" for neighbor in sub.adj[node]
                )
                if not has_customer:
                    drop.add(node)
        if not drop:
            break
        keep -= drop

    pruned = largest_component(graph.subgraph(keep))
    logger.info(f"Pruned graph from {graph.n} to {pruned.n} nodes (min_degree={min_degree}, drop_stubs={drop_stubs})")
    return pruned


def graph_hash(graph: AsGraph) -> str:
    """Content hash of the edge set and labels"""
    digest = hashlib.sha256()
    digest.update(f"{graph.n}\n".encode())
    for u, v, data in sorted((min(a, b), max(a, b), d) for a, b, d in graph.graph.edges(data=True)):
        digest.update(f"{u},{v},{data.get('rel', '')},{data.get('customer', '')}\n".encode())
    return digest.hexdigest()[:16]


def edge_label(graph: AsGraph, u: int, v: int) -> str:
    """Edge-list label: 'p2p', 'c2p' when u is the customer, 'p2c' otherwise, '' unlabeled"""
    if not graph.labeled:
        return ""
    relation = graph.relation(u, v)
    if relation == "peer":
        return REL_P2P
    return REL_C2P if relation == "provider" else "p2c"


def export_edge_list(graph: AsGraph, path: Union[str, Path]):
    """Write ``u,v,label`` rows using AS numbers"""
    rows = []
    for u, v in sorted((min(a, b), max(a, b)) for a, b in graph.graph.edges):
        rows.append({"u": graph.asn(u), "v": graph.asn(v), "label": edge_label(graph, u, v)})
    pd.DataFrame(rows, columns=["u", "v", "label"]).to_csv(path, index=False)
    logger.info(f"Exported {len(rows)} edges to {path}")
