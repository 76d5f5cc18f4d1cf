"""
CLI commands: analytic sweeps, simulations, topology statistics and fitting
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

try:
    from .config import ExperimentConfig
    from .persistence import RunManifest
    from ..analysis import controlplane, dataplane, timemodel
    from ..analysis.dataplane import CentralityProfile, KPrimeDistribution, PathLengthDistribution
    from ..topology.graph import AsGraph, graph_hash, largest_component, prune, export_edge_list
    from ..topology.generators import gen_full_mesh, gen_poisson, gen_barabasi_albert, gen_small_world
    from ..topology.caida import load_caida_asrel
    from ..topology.routing import PolicyPath, assign_local_prefs
    from ..topology.centrality import (
        betweenness, closeness, default_backend, load_profile, path_length_distribution,
        path_sample_betweenness, profile_cache_path, sample_policy_paths, save_profile,
    )
    from ..simulation.engine import Scenario
    from ..simulation.monte_carlo import SweepResult, normalized_sweep
    from ..utils.errors import ConfigError, DegenerateProfile
    from ..utils.settings import settings
    from ..utils.constants import (
        BETWEENNESS_PATH_SAMPLE, EXACT_BETWEENNESS_MAX_NODES, OMEGA_CAP,
        STRATEGY_RANDOM, STRATEGY_TOP_BETWEENNESS,
    )
except ImportError:
    from experiments.config import ExperimentConfig
    from experiments.persistence import RunManifest
    from analysis import controlplane, dataplane, timemodel
    from analysis.dataplane import CentralityProfile, KPrimeDistribution, PathLengthDistribution
    from topology.graph import AsGraph, graph_hash, largest_component, prune, export_edge_list
    from topology.generators import gen_full_mesh, gen_poisson, gen_barabasi_albert, gen_small_world
    from topology.caida import load_caida_asrel
    from topology.routing import PolicyPath, assign_local_prefs
    from topology.centrality import (
        betweenness, closeness, default_backend, load_profile, path_length_distribution,
        path_sample_betweenness, profile_cache_path, sample_policy_paths, save_profile,
    )
    from simulation.engine import Scenario
    from simulation.monte_carlo import SweepResult, normalized_sweep
    from utils.errors import ConfigError, DegenerateProfile
    from utils.settings import settings
    from utils.constants import (
        BETWEENNESS_PATH_SAMPLE, EXACT_BETWEENNESS_MAX_NODES, OMEGA_CAP,
        STRATEGY_RANDOM, STRATEGY_TOP_BETWEENNESS,
    )

logger = logging.getLogger(__name__)


def build_graph(config: ExperimentConfig) -> AsGraph:
    """Topology described by the ``topology`` section"""
    topology = config.topology
    generator = topology["generator"]
    seed = config.seed
    if generator == "caida":
        graph = load_caida_asrel(config.caida_path())
        if topology["prune"]:
            graph = prune(graph, int(topology["min_degree"]), bool(topology["drop_stubs"]))
        graph = largest_component(graph)
        graph = assign_local_prefs(graph, seed)
    else:
        N = int(topology["N"])
        if generator == "full_mesh":
            graph = gen_full_mesh(N)
        elif generator == "poisson":
            graph = gen_poisson(N, float(topology["p"]), seed)
        elif generator == "barabasi_albert":
            graph = gen_barabasi_albert(N, int(topology["m"]), seed)
        else:
            graph = gen_small_world(N, int(topology["k_nn"]), float(topology["p_rewire"]), seed)
        if topology["largest_component"]:
            graph = largest_component(graph)
    logger.info(f"Built {generator} topology: {graph}")
    return graph


def _check_cluster_sizes(config: ExperimentConfig, graph: AsGraph):
    too_large = [k for k in config.k_values if k > graph.n]
    if too_large:
        raise ConfigError(f"Cluster sizes {too_large} exceed the {graph.n} nodes of the topology")


def sample_paths(config: ExperimentConfig, graph: AsGraph) -> List[PolicyPath]:
    cluster = config.cluster
    return sample_policy_paths(graph, int(cluster["path_samples"]), config.seed,
                               int(cluster["destinations_per_source"]))


def resolve_profile(config: ExperimentConfig, graph: AsGraph,
                    paths: Optional[List[PolicyPath]] = None) -> CentralityProfile:
    """Betweenness profile, read from the centrality cache when present"""
    backend = config.cluster["backend"] or default_backend(graph)
    path = profile_cache_path(settings.cache_dir, graph, backend, config.seed)
    if path.exists():
        logger.info(f"Using cached centrality {path}")
        return load_profile(path, backend)
    if backend == BETWEENNESS_PATH_SAMPLE:
        profile = path_sample_betweenness(paths if paths is not None else sample_paths(config, graph), graph.n)
    else:
        profile = betweenness(graph, backend)
    save_profile(profile, path)
    return profile


def betweenness_distribution(N: int, k: int, profile: CentralityProfile) -> Tuple[KPrimeDistribution, float]:
    """k' distribution for the top-k betweenness cluster and its odds ratio"""
    if k == 0 or k == N:
        return KPrimeDistribution.hypergeometric(N, k), 1.0
    cluster = profile.ranked()[:k]
    try:
        omega = dataplane.omega_ratio(profile, cluster)
    except DegenerateProfile:
        omega_sdn, omega_bgp = profile.means(cluster)
        if omega_sdn > 0:
            # every node carrying centrality is already in the cluster
            omega = OMEGA_CAP
        else:
            logger.warning(f"k={k}: no node carries centrality; using uniform membership")
            return KPrimeDistribution.hypergeometric(N, k), 1.0
    return KPrimeDistribution.fisher(N, k, omega), omega


def bounds_table(path_dist: PathLengthDistribution, N: int, k_values: List[int],
                 profile: Optional[CentralityProfile] = None) -> pd.DataFrame:
    """Normalized T_SD bounds per k for random and (given a profile) betweenness clusters"""
    rows: List[Dict[str, Any]] = []
    for k in k_values:
        lower, upper = dataplane.normalized_bounds(path_dist, KPrimeDistribution.hypergeometric(N, k))
        rows.append({"k": k, "strategy": STRATEGY_RANDOM, "omega": 1.0, "lower_norm": lower, "upper_norm": upper})
        if profile is not None:
            dist, omega = betweenness_distribution(N, k, profile)
            lower, upper = dataplane.normalized_bounds(path_dist, dist)
            rows.append({"k": k, "strategy": STRATEGY_TOP_BETWEENNESS, "omega": omega,
                         "lower_norm": lower, "upper_norm": upper})
    return pd.DataFrame(rows, columns=["k", "strategy", "omega", "lower_norm", "upper_norm"])


def cmd_analytic_bounds(config: ExperimentConfig, graph: Optional[AsGraph] = None,
                        filename: str = "bounds.csv") -> pd.DataFrame:
    """Normalized data-plane bounds across the k sweep, both selection strategies"""
    graph = graph if graph is not None else build_graph(config)
    _check_cluster_sizes(config, graph)
    paths = sample_paths(config, graph)
    path_dist = path_length_distribution(paths)
    profile = resolve_profile(config, graph, paths)
    k_values = sorted(set([0] + config.k_values))
    table = bounds_table(path_dist, graph.n, k_values, profile)

    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    manifest.csv(path_dist.to_frame(), "path_lengths.csv")
    manifest.csv(table, filename)
    manifest.extra["nodes"] = graph.n
    manifest.save()
    return table


def _analytic_parameters(config: ExperimentConfig) -> Tuple[int, float]:
    """(N, p) for the chain, from the generator or from the built graph"""
    topology = config.topology
    if topology["generator"] == "full_mesh":
        return int(topology["N"]), 1.0
    if topology["generator"] == "poisson" and not topology["largest_component"]:
        return int(topology["N"]), float(topology["p"])
    graph = build_graph(config)
    p = graph.mean_degree() / (graph.n - 1) if graph.n > 1 else 1.0
    return graph.n, p


def ell_counts(N: int, fractions: List[float]) -> List[int]:
    return [max(1, min(N, int(round(f * N)))) for f in fractions]


def cmd_analytic_convergence(config: ExperimentConfig) -> pd.DataFrame:
    """Expected T_c and T_ell across the k sweep from the Markov chain"""
    N, p = _analytic_parameters(config)
    degree_model = config.routing["degree_model"]
    if degree_model == controlplane.FULL_MESH:
        p = 1.0
    too_large = [k for k in config.k_values if k > N]
    if too_large:
        raise ConfigError(f"Cluster sizes {too_large} exceed N={N}")
    rate = 1.0 / timemodel.mean(config.bgp_model())
    fractions = config.ell_fractions
    ells = ell_counts(N, fractions)

    logger.info(f"Chain sweep: N={N}, degree model {degree_model}, p={p:.6g}, rate={rate:.6g}")
    table = controlplane.sweep(N, config.k_values, ells, rate, degree_model, p)
    renames = {}
    for fraction, ell in zip(fractions, ells):
        renames[f"E_Tl_{ell}"] = f"E_Tl_{fraction:g}N"
        renames[f"E_Tl_{ell}_norm"] = f"E_Tl_{fraction:g}N_norm"
    table = table.rename(columns=renames)

    manifest = RunManifest(config.output_dir, config.seed, config.digest())
    manifest.csv(table, "convergence.csv")
    manifest.extra.update({"nodes": N, "p": p, "degree_model": degree_model})
    manifest.save()
    return table


def build_scenario(config: ExperimentConfig, graph: AsGraph) -> Scenario:
    simulation = config.simulation
    source = simulation["source"]
    return Scenario(
        graph=graph,
        bgp_model=config.bgp_model(),
        routing=config.routing["mode"],
        sdn_model=timemodel.SdnLatencyModel(config.sdn_model()),
        source=None if source is None else int(source),
        trials=config.trials,
        seed=config.seed,
        per_node_draws=bool(simulation["per_node_draws"]),
    )


def run_sweep(config: ExperimentConfig, graph: AsGraph) -> SweepResult:
    """Monte-Carlo sweep over the configured cluster sizes"""
    _check_cluster_sizes(config, graph)
    scenario = build_scenario(config, graph)
    strategy = config.cluster["strategy"]
    profile = resolve_profile(config, graph) if strategy == STRATEGY_TOP_BETWEENNESS else None
    output_dir = config.output_dir
    return normalized_sweep(
        scenario, config.k_values, strategy, profile, config.ell_fractions, config.workers,
        checkpoint_dir=output_dir if config.simulation["checkpoint"] else None,
        digest=config.digest(),
        trace_dir=output_dir / "traces" if config.simulation["trace"] else None,
    )


def write_sweep(result: SweepResult, manifest: RunManifest, prefix: str = ""):
    manifest.csv(result.bucket_frame(), f"{prefix}buckets.csv")
    manifest.csv(result.ratio_frame(), f"{prefix}partial.csv")
    manifest.csv(result.tc_frame(), f"{prefix}tc.csv")
    manifest.csv(result.per_d_frame(), f"{prefix}per_d.csv")
    summary = {str(k): stats.to_dict() for k, stats in sorted(result.runs.items())}
    manifest.json({"runs": summary}, f"{prefix}summary.json")


def cmd_simulate(config: ExperimentConfig, graph: Optional[AsGraph] = None, prefix: str = "") -> SweepResult:
    """Simulate every k of the sweep and write the summary files"""
    graph = graph if graph is not None else build_graph(config)
    result = run_sweep(config, graph)
    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    write_sweep(result, manifest, prefix)
    manifest.extra["nodes"] = graph.n
    manifest.save()
    return result


def cmd_topo_stats(config: ExperimentConfig, export_edges: bool = False) -> Dict[str, Any]:
    """Size, degree, path length and centrality summary of the configured topology"""
    graph = build_graph(config)
    degrees = [graph.degree(node) for node in range(graph.n)]
    paths = sample_paths(config, graph)
    path_dist = path_length_distribution(paths)
    profile = resolve_profile(config, graph, paths)

    frame = pd.DataFrame({
        "node": range(graph.n),
        "asn": [graph.asn(node) for node in range(graph.n)],
        "degree": degrees,
        "betweenness": [profile.scores[node] for node in range(graph.n)],
    })
    if graph.n <= EXACT_BETWEENNESS_MAX_NODES:
        ranking = closeness(graph)
        frame["closeness"] = [ranking.scores[node] for node in range(graph.n)]
    else:
        logger.info(f"Skipping closeness on {graph.n} nodes")

    stats = {
        "nodes": graph.n,
        "edges": graph.edge_count(),
        "labeled": graph.labeled,
        "mean_degree": graph.mean_degree(),
        "max_degree": max(degrees, default=0),
        "mean_path_length": path_dist.mean(),
        "sampled_paths": len(paths),
        "betweenness_backend": profile.backend,
        "top_betweenness": [graph.asn(node) for node in profile.ranked()[:10]],
    }
    if "closeness" in frame:
        # announcements from the least central nodes gain most from a cluster
        stats["largest_expected_gain"] = [int(asn) for asn in frame.sort_values(["closeness", "node"])["asn"][:10]]

    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    manifest.json(stats, "topo_stats.json")
    manifest.csv(path_dist.to_frame(), "path_lengths.csv")
    manifest.csv(frame, "centrality.csv")
    if export_edges:
        export_edge_list(graph, Path(config.output_dir) / "edges.csv")
        manifest.files.append("edges.csv")
    manifest.save()
    return stats


def cmd_fit(observations: Union[str, Path], output: Optional[Union[str, Path]] = None) -> timemodel.TimeModel:
    """Fit an exponential update-time model to measured path delays"""
    model = timemodel.fit_exponential(timemodel.load_observations(observations))
    if output is not None:
        timemodel.save_model_json(model, output)
    return model
