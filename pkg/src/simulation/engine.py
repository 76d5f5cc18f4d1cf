"""
Discrete-event propagation engine

One trial samples a delay for every eligible directed edge (in a fixed
edge order) and one SDN latency, then runs an earliest-arrival event loop.
The same trial index therefore sees the same edge delays whatever the
cluster, which couples runs with and without centralization.
"""

import heapq
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Union

import numpy as np

try:
    from ..analysis.timemodel import TimeModel, SdnLatencyModel, sample_many
    from ..topology.graph import AsGraph
    from ..topology.routing import RoutingTree, policy_tree, shortest_paths
    from ..utils.errors import ConfigError, DisconnectedSource, DomainError
    from ..utils.random_streams import trial_stream
    from ..utils.constants import (
        ROUTING_MODES, ROUTING_SHORTEST_PATH_DAG, ROUTING_POLICY_TREE, ROUTING_FLOOD, DEFAULT_SEED,
        PLAN_CACHE_SIZE,
    )
except ImportError:
    from analysis.timemodel import TimeModel, SdnLatencyModel, sample_many
    from topology.graph import AsGraph
    from topology.routing import RoutingTree, policy_tree, shortest_paths
    from utils.errors import ConfigError, DisconnectedSource, DomainError
    from utils.random_streams import trial_stream
    from utils.constants import (
        ROUTING_MODES, ROUTING_SHORTEST_PATH_DAG, ROUTING_POLICY_TREE, ROUTING_FLOOD, DEFAULT_SEED,
        PLAN_CACHE_SIZE,
    )

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass
class Scenario:
    """Everything one Monte-Carlo run needs; ``source`` None draws a source per trial"""

    graph: AsGraph
    bgp_model: TimeModel
    routing: Optional[str] = None
    cluster: FrozenSet[int] = frozenset()
    sdn_model: SdnLatencyModel = field(default_factory=SdnLatencyModel)
    source: Optional[int] = None
    trials: int = 1
    seed: int = DEFAULT_SEED
    per_node_draws: bool = False

    def __post_init__(self):
        if self.routing is None:
            self.routing = ROUTING_POLICY_TREE if self.graph.labeled else ROUTING_SHORTEST_PATH_DAG
        if self.routing not in ROUTING_MODES:
            raise ConfigError(f"Unknown routing mode {self.routing!r}; expected one of {ROUTING_MODES}")
        self.cluster = frozenset(int(node) for node in self.cluster)
        outside = [node for node in self.cluster if not 0 <= node < self.graph.n]
        if outside:
            raise DomainError(f"Cluster nodes {sorted(outside)[:5]} are not in the graph")
        if self.trials < 1:
            raise DomainError(f"Trials must be >= 1, got {self.trials}")
        if self.source is not None and not 0 <= self.source < self.graph.n:
            raise DomainError(f"Source {self.source} is not in the graph")

    def with_cluster(self, cluster) -> "Scenario":
        return Scenario(self.graph, self.bgp_model, self.routing, frozenset(cluster), self.sdn_model,
                        self.source, self.trials, self.seed, self.per_node_draws)


class RoutingPlan:
    """Eligible forwarding edges from one source, stored as flat CSR arrays.

    ``targets[offsets[u]:offsets[u + 1]]`` are the nodes u forwards to;
    ``tree_edge[v]`` is the flat index of the edge from v's SD-path parent.
    """

    def __init__(self, graph: AsGraph, source: int, routing: str):
        if routing == ROUTING_POLICY_TREE:
            tree = policy_tree(graph, source)
            forward = tree.children()
        else:
            paths = shortest_paths(graph, source)
            tree = paths.tree()
            if routing == ROUTING_FLOOD:
                forward = [list(graph.neighbors(u)) for u in range(graph.n)]
            else:
                forward = [[] for _ in range(graph.n)]
                for v in paths.order:
                    for u in paths.predecessors[v]:
                        forward[u].append(v)
                for targets in forward:
                    targets.sort()

        self.source = source
        self.tree: RoutingTree = tree
        self.offsets = np.zeros(graph.n + 1, dtype=np.int64)
        self.offsets[1:] = np.cumsum([len(targets) for targets in forward])
        self.targets: List[int] = [v for targets in forward for v in targets]
        self.origins = np.repeat(np.arange(graph.n), np.diff(self.offsets))
        self.offset_list: List[int] = self.offsets.tolist()

        self.tree_edge = np.full(graph.n, -1, dtype=np.int64)
        for v in tree.order:
            if v == source:
                continue
            u = int(tree.parent[v])
            start, stop = int(self.offsets[u]), int(self.offsets[u + 1])
            self.tree_edge[v] = start + self.targets[start:stop].index(v)

    @property
    def edge_count(self) -> int:
        return len(self.targets)


@dataclass
class PropagationTrace:
    """Per-node times of one trial.

    ``reception`` is the first delivery over any eligible edge or through the
    cluster; ``final_reception`` the delivery over the node's SD-path parent
    or through the cluster. Unreached nodes hold inf. ``tsd``, ``path_length``
    and ``kprime`` describe the SD-path from the source to each node and are
    nan/-1 at the source and at unreached nodes.
    """

    source: int
    reception: np.ndarray
    final_reception: np.ndarray
    cluster_arrival: float
    sdn_latency: float
    tsd: np.ndarray
    path_length: np.ndarray
    kprime: np.ndarray

    @property
    def reached(self) -> np.ndarray:
        return np.isfinite(self.reception)

    @property
    def unreached_count(self) -> int:
        return int(np.count_nonzero(~self.reached))

    def sorted_reception(self) -> np.ndarray:
        return np.sort(self.reception[self.reached])

    def t_c(self) -> float:
        """Time until every reached node holds the update"""
        return float(self.sorted_reception()[-1])

    def t_ell(self, ell: int) -> float:
        """Time until ``ell`` nodes (the source included) hold the update"""
        times = self.sorted_reception()
        if not 1 <= ell <= len(times):
            return math.nan
        return float(times[ell - 1])

    def t_fraction(self, fraction: float) -> float:
        """T_ell with ell the given share of reached nodes"""
        times = self.sorted_reception()
        ell = min(len(times), max(1, int(round(fraction * len(times)))))
        return float(times[ell - 1])

    def destinations(self) -> np.ndarray:
        """Nodes other than the source that hold a final route"""
        mask = self.path_length > 0
        return np.flatnonzero(mask)

    def to_dict(self) -> Dict:
        def finite(values):
            return [None if not np.isfinite(value) else float(value) for value in values]

        return {
            "source": self.source,
            "cluster_arrival": None if not np.isfinite(self.cluster_arrival) else self.cluster_arrival,
            "sdn_latency": self.sdn_latency,
            "reception": finite(self.reception),
            "final_reception": finite(self.final_reception),
            "tsd": finite(self.tsd),
            "path_length": [int(value) for value in self.path_length],
            "kprime": [int(value) for value in self.kprime],
        }

    def dump(self, path: Union[str, Path]):
        """Debug dump of every per-node time"""
        with open(path, "w") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
        logger.debug(f"Trace of source {self.source} written to {path}")


class PropagationEngine:
    """Runs trials of one scenario, caching routing plans per source"""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._plans: Dict[int, RoutingPlan] = {}

    def plan(self, source: int) -> RoutingPlan:
        plan = self._plans.get(source)
        if plan is None:
            if len(self._plans) >= PLAN_CACHE_SIZE:
                self._plans.clear()
            plan = RoutingPlan(self.scenario.graph, source, self.scenario.routing)
            self._plans[source] = plan
        return plan

    def run_trial(self, trial_index: int) -> PropagationTrace:
        scenario = self.scenario
        n = scenario.graph.n
        rng = trial_stream(scenario.seed, trial_index)
        source = int(rng.integers(n)) if scenario.source is None else scenario.source
        plan = self.plan(source)

        if scenario.per_node_draws:
            delays = sample_many(scenario.bgp_model, rng, n)[plan.origins].tolist()
        else:
            delays = sample_many(scenario.bgp_model, rng, plan.edge_count).tolist()
        sdn_latency = scenario.sdn_model.sample(rng)

        cluster = scenario.cluster
        reception = [INF] * n
        done = [False] * n
        reception[source] = 0.0
        heap = [(0.0, source)]
        cluster_arrival = INF
        offsets, targets = plan.offset_list, plan.targets

        while heap:
            time, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u in cluster and cluster_arrival == INF:
                cluster_arrival = time
                via_cluster = time + sdn_latency
                for member in cluster:
                    if via_cluster < reception[member]:
                        reception[member] = via_cluster
                        heapq.heappush(heap, (via_cluster, member))
            for index in range(offsets[u], offsets[u + 1]):
                v = targets[index]
                if done[v]:
                    continue
                arrival = time + delays[index]
                if arrival < reception[v]:
                    reception[v] = arrival
                    heapq.heappush(heap, (arrival, v))

        reached = sum(1 for value in reception if value < INF)
        if reached <= 1:
            raise DisconnectedSource(f"Source {source} reaches no other node under {scenario.routing} routing")

        via_cluster = cluster_arrival + sdn_latency
        tree = plan.tree
        final = np.full(n, INF)
        tsd = np.full(n, np.nan)
        path_length = np.full(n, -1, dtype=np.int64)
        kprime = np.full(n, -1, dtype=np.int64)
        final[source] = 0.0
        path_length[source] = 0
        kprime[source] = 1 if source in cluster else 0
        path_max = {source: 0.0}
        for v in tree.order:
            if v == source:
                continue
            parent = int(tree.parent[v])
            time = final[parent] + delays[plan.tree_edge[v]]
            if v in cluster:
                time = min(time, via_cluster)
            final[v] = time
            path_max[v] = max(path_max[parent], time)
            tsd[v] = path_max[v]
            path_length[v] = path_length[parent] + 1
            kprime[v] = kprime[parent] + (1 if v in cluster else 0)

        trace = PropagationTrace(source, np.asarray(reception, dtype=np.float64), final,
                                 cluster_arrival, sdn_latency, tsd, path_length, kprime)
        if trace.unreached_count:
            logger.debug(f"Trial {trial_index}: {trace.unreached_count} nodes unreached from source {source}")
        return trace


def run_trial(scenario: Scenario, trial_index: int) -> PropagationTrace:
    """Propagate one announcement; the trial's stream is keyed by its index"""
    return PropagationEngine(scenario).run_trial(trial_index)
