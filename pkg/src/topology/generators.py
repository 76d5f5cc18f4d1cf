"""
Synthetic topology generators
"""

import logging

import networkx as nx

try:
    from .graph import AsGraph, from_networkx
    from ..utils.errors import DomainError
    from ..utils.random_streams import derive_seed
    from ..utils.constants import STREAM_GRAPH
except ImportError:
    from topology.graph import AsGraph, from_networkx
    from utils.errors import DomainError
    from utils.random_streams import derive_seed
    from utils.constants import STREAM_GRAPH

logger = logging.getLogger(__name__)


def gen_full_mesh(N: int) -> AsGraph:
    """Complete graph on N nodes"""
    if N < 1:
        raise DomainError(f"Full mesh needs N >= 1, got {N}")
    return from_networkx(nx.complete_graph(N))


def gen_poisson(N: int, p: float, seed: int) -> AsGraph:
    """G(N, p): every pair linked independently with probability p"""
    if N < 1:
        raise DomainError(f"Poisson graph needs N >= 1, got {N}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Link probability must be in [0, 1], got {p}")
    graph = nx.fast_gnp_random_graph(N, p, seed=derive_seed(seed, STREAM_GRAPH))
    logger.debug(f"Generated G({N}, {p}) with {graph.number_of_edges()} edges")
    return from_networkx(graph)


def gen_barabasi_albert(N: int, m: int, seed: int) -> AsGraph:
    """Preferential-attachment graph; average degree close to 2m"""
    if m < 1 or m >= N:
        raise DomainError(f"Barabasi-Albert needs 1 <= m < N, got m={m}, N={N}")
    graph = nx.barabasi_albert_graph(N, m, seed=derive_seed(seed, STREAM_GRAPH))
    logger.debug(f"Generated BA({N}, {m}) with {graph.number_of_edges()} edges")
    return from_networkx(graph)


def gen_small_world(N: int, k_nn: int, p_rewire: float, seed: int) -> AsGraph:
    """Newman-Watts-Strogatz ring lattice with added shortcuts"""
    if k_nn < 2 or k_nn % 2 or k_nn >= N:
        raise DomainError(f"Small world needs an even k_nn in [2, N), got {k_nn}")
    if not 0.0 <= p_rewire <= 1.0:
        raise DomainError(f"Rewiring probability must be in [0, 1], got {p_rewire}")
    graph = nx.newman_watts_strogatz_graph(N, k_nn, p_rewire, seed=derive_seed(seed, STREAM_GRAPH))
    return from_networkx(graph)
