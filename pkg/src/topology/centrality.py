"""
Centrality, path samples and SDN cluster selection
"""

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Union

import networkx as nx
import numpy as np
import pandas as pd

try:
    from .graph import AsGraph, graph_hash
    from .routing import PolicyPath, RoutingTree, policy_tree, shortest_paths
    from ..analysis.dataplane import CentralityProfile, PathLengthDistribution
    from ..utils.errors import DomainError, EmptySample, MissingProfile, ParseError
    from ..utils.random_streams import make_stream
    from ..utils.constants import (
        BETWEENNESS_EXACT, BETWEENNESS_PATH_SAMPLE, EXACT_BETWEENNESS_MAX_NODES,
        STRATEGY_TOP_BETWEENNESS, STRATEGIES, STREAM_CLUSTER, STREAM_PATH_SAMPLE,
        DEFAULT_PATH_SAMPLES,
    )
except ImportError:
    from topology.graph import AsGraph, graph_hash
    from topology.routing import PolicyPath, RoutingTree, policy_tree, shortest_paths
    from analysis.dataplane import CentralityProfile, PathLengthDistribution
    from utils.errors import DomainError, EmptySample, MissingProfile, ParseError
    from utils.random_streams import make_stream
    from utils.constants import (
        BETWEENNESS_EXACT, BETWEENNESS_PATH_SAMPLE, EXACT_BETWEENNESS_MAX_NODES,
        STRATEGY_TOP_BETWEENNESS, STRATEGIES, STREAM_CLUSTER, STREAM_PATH_SAMPLE,
        DEFAULT_PATH_SAMPLES,
    )

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterSelection:
    """How the SDN cluster is chosen and how large it is"""

    strategy: str
    k: int

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"Unknown cluster strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.k < 0:
            raise DomainError(f"Cluster size must be >= 0, got {self.k}")


def routing_tree(graph: AsGraph, source: int) -> RoutingTree:
    """Policy tree on labeled graphs, lowest-id shortest-path tree otherwise"""
    if graph.labeled:
        return policy_tree(graph, source)
    return shortest_paths(graph, source).tree()


def sample_policy_paths(graph: AsGraph, n_pairs: int = DEFAULT_PATH_SAMPLES, seed: int = 0,
                        destinations_per_source: int = 1) -> List[PolicyPath]:
    """Routes between random ordered (source, destination) pairs.

    With ``destinations_per_source`` = 1 every pair is uniform. Larger values
    draw fewer sources and several uniform destinations per source, which
    needs one routing tree per source instead of one per pair. Unreachable
    pairs are dropped and counted in the log.
    """
    if graph.n < 2:
        raise EmptySample("Path sampling needs at least two nodes")
    if n_pairs < 1 or destinations_per_source < 1:
        raise DomainError("Path sample size and destinations per source must be >= 1")

    rng = make_stream(seed, STREAM_PATH_SAMPLE)
    n_sources = -(-n_pairs // destinations_per_source)
    sources = np.repeat(rng.integers(graph.n, size=n_sources), destinations_per_source)[:n_pairs]
    destinations = rng.integers(graph.n - 1, size=n_pairs)
    destinations = destinations + (destinations >= sources)

    paths: List[Optional[PolicyPath]] = [None] * n_pairs
    by_source: Dict[int, List[int]] = {}
    for index, source in enumerate(sources):
        by_source.setdefault(int(source), []).append(index)
    for source in sorted(by_source):
        tree = routing_tree(graph, source)
        for index in by_source[source]:
            paths[index] = tree.path(int(destinations[index]))

    found = [path for path in paths if path is not None]
    dropped = n_pairs - len(found)
    if dropped:
        logger.warning(f"{dropped} of {n_pairs} sampled pairs have no route")
    logger.info(f"Sampled {len(found)} paths from {len(by_source)} sources")
    return found


def path_length_distribution(paths: Sequence[PolicyPath]) -> PathLengthDistribution:
    """Normalized histogram of path lengths"""
    if not paths:
        raise EmptySample("Cannot build a path length distribution from no paths")
    return PathLengthDistribution.from_counts(Counter(path.d for path in paths))


def exact_betweenness(graph: AsGraph) -> CentralityProfile:
    """Shortest-path betweenness, each unordered pair counted once"""
    if graph.n == 0:
        raise EmptySample("Graph has no nodes")
    target = graph.graph
    if not nx.is_connected(target):
        component = max(nx.connected_components(target), key=len)
        logger.warning(f"Betweenness computed on the largest component ({len(component)} of {graph.n} nodes)")
        target = target.subgraph(component)
    values = nx.betweenness_centrality(target, normalized=False)
    scores = {node: float(values.get(node, 0.0)) for node in range(graph.n)}
    return CentralityProfile(scores, BETWEENNESS_EXACT)


def path_sample_betweenness(paths: Sequence[PolicyPath], n: int) -> CentralityProfile:
    """Share of sampled paths on which each node is an intermediate hop"""
    if not paths:
        raise EmptySample("Path-sample betweenness needs at least one path")
    counts = np.zeros(n, dtype=np.float64)
    for path in paths:
        for node in path.nodes[1:-1]:
            counts[node] += 1.0
    counts /= len(paths)
    return CentralityProfile({node: float(value) for node, value in enumerate(counts)}, BETWEENNESS_PATH_SAMPLE)


def default_backend(graph: AsGraph) -> str:
    """Exact counting on small unlabeled graphs, path sampling otherwise"""
    if not graph.labeled and graph.n <= EXACT_BETWEENNESS_MAX_NODES:
        return BETWEENNESS_EXACT
    return BETWEENNESS_PATH_SAMPLE


def betweenness(graph: AsGraph, backend: Optional[str] = None, paths: Optional[Sequence[PolicyPath]] = None,
                n_pairs: int = DEFAULT_PATH_SAMPLES, seed: int = 0) -> CentralityProfile:
    """Betweenness profile with the requested or the size-appropriate backend"""
    backend = backend or default_backend(graph)
    if backend == BETWEENNESS_EXACT:
        if graph.labeled:
            logger.warning("Exact betweenness ignores relationship labels; counting shortest paths")
        return exact_betweenness(graph)
    if backend != BETWEENNESS_PATH_SAMPLE:
        raise DomainError(f"Unknown betweenness backend {backend!r}")
    if paths is None:
        paths = sample_policy_paths(graph, n_pairs, seed)
    return path_sample_betweenness(paths, graph.n)


def closeness(graph: AsGraph) -> CentralityProfile:
    """Closeness centrality; announcements from low-closeness nodes gain most from a cluster"""
    values = nx.closeness_centrality(graph.graph)
    return CentralityProfile({node: float(values[node]) for node in range(graph.n)}, "closeness")


def select_cluster(selection: ClusterSelection, n: int, profile: Optional[CentralityProfile] = None,
                   seed: int = 0) -> FrozenSet[int]:
    """Node set of the SDN cluster"""
    if selection.k > n:
        raise DomainError(f"Cluster size {selection.k} exceeds the {n} nodes of the graph")
    if selection.strategy == STRATEGY_TOP_BETWEENNESS:
        if profile is None:
            raise MissingProfile("Betweenness-based selection needs a centrality profile")
        return frozenset(profile.ranked()[:selection.k])
    rng = make_stream(seed, STREAM_CLUSTER, selection.k)
    return frozenset(int(node) for node in rng.choice(n, size=selection.k, replace=False))


def profile_cache_path(cache_dir: Union[str, Path], graph: AsGraph, backend: str, seed: int) -> Path:
    return Path(cache_dir) / f"centrality_{graph_hash(graph)}_{backend}_{seed}.csv"


def save_profile(profile: CentralityProfile, path: Union[str, Path]):
    """Write ``node,score`` rows"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"node": list(profile.scores), "score": list(profile.scores.values())})
    frame.to_csv(path, index=False, float_format="%.17g")


def load_profile(path: Union[str, Path], backend: str) -> CentralityProfile:
    try:
        frame = pd.read_csv(path)
        scores = {int(row.node): float(row.score) for row in frame.itertuples(index=False)}
    except (OSError, AttributeError, ValueError, pd.errors.ParserError) as e:
        raise ParseError(f"Cannot read centrality cache {path}: {e}")
    return CentralityProfile(scores, backend)
