"""
Named experiment presets, each a fixed configuration plus the commands it runs
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

try:
    from .config import ExperimentConfig
    from .commands import build_graph, cmd_analytic_bounds, ell_counts, run_sweep
    from .persistence import RunManifest
    from ..analysis import controlplane, dataplane
    from ..analysis.dataplane import KPrimeDistribution, PathLengthDistribution
    from ..analysis.timemodel import mean
    from ..topology.graph import graph_hash
    from ..utils.errors import ConfigError
    from ..utils.constants import STRATEGY_RANDOM, STRATEGY_TOP_BETWEENNESS
except ImportError:
    from experiments.config import ExperimentConfig
    from experiments.commands import build_graph, cmd_analytic_bounds, ell_counts, run_sweep
    from experiments.persistence import RunManifest
    from analysis import controlplane, dataplane
    from analysis.dataplane import KPrimeDistribution, PathLengthDistribution
    from analysis.timemodel import mean
    from topology.graph import graph_hash
    from utils.errors import ConfigError
    from utils.constants import STRATEGY_RANDOM, STRATEGY_TOP_BETWEENNESS

logger = logging.getLogger(__name__)

EXPONENTIAL_BGP = {"variant": "exponential", "rate": 1.0}
UNIFORM_BGP = {"variant": "uniform", "lo": 0.0, "hi": 2.0}

POISSON_1000 = {"generator": "poisson", "N": 1000, "p": 0.005}
BA_1000 = {"generator": "barabasi_albert", "N": 1000, "m": 5}
CAIDA_FULL = {"generator": "caida", "prune": False}
CAIDA_REDUCED = {"generator": "caida", "prune": True, "min_degree": 3, "drop_stubs": True}

TABLE_D_VALUES = [2, 5]
TABLE_K_VALUES = [20, 50, 100, 200]
FIG3_K_VALUES = [0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000]
FIG5_D_VALUES = [3, 6, 9]

PRESET_CONFIGS: Dict[str, Dict[str, Any]] = {
    "table-bounds": {
        "topology": POISSON_1000,
        "cluster": {"strategy": STRATEGY_RANDOM, "k_values": [0] + TABLE_K_VALUES},
        "timing": {"bgp": EXPONENTIAL_BGP},
    },
    "fig3": {
        "topology": CAIDA_FULL,
        "cluster": {"strategy": STRATEGY_TOP_BETWEENNESS, "k_values": FIG3_K_VALUES,
                    "path_samples": 1000000, "destinations_per_source": 1000},
    },
    "fig5": {
        "topology": CAIDA_FULL,
        "cluster": {"strategy": STRATEGY_TOP_BETWEENNESS, "k_values": [0, 10, 20, 50, 100, 200],
                    "destinations_per_source": 1000},
        "timing": {"bgp": EXPONENTIAL_BGP},
        "simulation": {"trials": 100, "checkpoint": True},
    },
    "fig6": {
        "topology": POISSON_1000,
        "cluster": {"strategy": STRATEGY_RANDOM, "k_values": [0, 50, 200]},
    },
    "fig7": {
        "topology": BA_1000,
        "cluster": {"strategy": STRATEGY_RANDOM, "k_values": [0, 10, 20, 50, 100, 200, 500, 1000]},
        "routing": {"degree_model": controlplane.POISSON_GRAPH},
        "simulation": {"ell_fractions": [0.1, 0.5, 1.0]},
    },
    "fig8": {
        "topology": CAIDA_REDUCED,
        "cluster": {"strategy": STRATEGY_TOP_BETWEENNESS, "k_values": [0, 10, 20, 50, 100, 200, 500],
                    "destinations_per_source": 1000},
        "timing": {"bgp": EXPONENTIAL_BGP},
        "simulation": {"trials": 100, "ell_fractions": [0.1, 0.5, 1.0], "checkpoint": True},
    },
}


def preset_config(name: str, assignments: Sequence[str] = (), seed: Optional[int] = None,
                  trials: Optional[int] = None, output_dir: Optional[str] = None) -> ExperimentConfig:
    if name not in PRESET_CONFIGS:
        raise ConfigError(f"Unknown preset {name!r}; expected one of {sorted(PRESET_CONFIGS)}")
    config = ExperimentConfig.from_dict(PRESET_CONFIGS[name], name=name)
    return config.with_overrides(assignments, seed, trials, output_dir)


def _clip_k(config: ExperimentConfig, n: int) -> ExperimentConfig:
    """Drop sweep sizes larger than the loaded topology"""
    kept = [k for k in config.k_values if k <= n]
    if len(kept) < len(config.k_values):
        logger.info(f"Dropping cluster sizes above N={n}")
    return config.replace("cluster", k_values=kept)


def table_bounds(config: ExperimentConfig) -> List[Path]:
    """Normalized T_SD per path length: analytic bounds against simulation"""
    N = config.known_n
    graph = build_graph(config)
    sweep = run_sweep(config, graph)
    simulated = sweep.per_d_frame().set_index(["k", "d"])

    rows = []
    for d in TABLE_D_VALUES:
        for k in TABLE_K_VALUES:
            lower, upper = dataplane.normalized_bounds(PathLengthDistribution.point_mass(d),
                                                       KPrimeDistribution.hypergeometric(N, k))
            sim = simulated.loc[(k, d)] if (k, d) in simulated.index else None
            rows.append({
                "d": d, "k": k, "upper_norm": upper,
                "sim_norm": float(sim["ratio"]) if sim is not None else float("nan"),
                "sim_se": float(sim["ratio_se"]) if sim is not None else float("nan"),
                "lower_norm": lower,
            })
    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    path = manifest.csv(pd.DataFrame(rows), "table_bounds.csv")
    manifest.save()
    return [path]


def fig3(config: ExperimentConfig) -> List[Path]:
    """Internet-graph bounds for random and betweenness clusters"""
    graph = build_graph(config)
    config = _clip_k(config, graph.n)
    cmd_analytic_bounds(config, graph, "fig3.csv")
    return [config.output_dir / "fig3.csv", config.output_dir / "path_lengths.csv"]


def fig5(config: ExperimentConfig) -> List[Path]:
    """Internet-graph T_SD per path length under a betweenness cluster"""
    graph = build_graph(config)
    config = _clip_k(config, graph.n)
    sweep = run_sweep(config, graph)
    frame = sweep.per_d_frame()
    frame = frame[frame["d"].isin(FIG5_D_VALUES)].reset_index(drop=True)
    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    path = manifest.csv(frame, "fig5.csv")
    manifest.extra["nodes"] = graph.n
    manifest.save()
    return [path]


def fig6(config: ExperimentConfig) -> List[Path]:
    """Simulated E[T_SD | d] against the analytic bounds, exponential and uniform update times"""
    graph = build_graph(config)
    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    paths = []
    for label, model in (("exp", EXPONENTIAL_BGP), ("uni", UNIFORM_BGP)):
        variant = config.replace("timing", bgp=model)
        sweep = run_sweep(variant, graph)
        mu = mean(variant.bgp_model())
        rows = []
        for row in sweep.per_d_frame().to_dict("records"):
            k, d = int(row["k"]), int(row["d"])
            if k == 0 or d + 1 > graph.n:
                continue
            lower, upper = dataplane.tsd_bounds_given_d(d, KPrimeDistribution.hypergeometric(graph.n, k), mu)
            rows.append({"k": k, "d": d, "count": row["count"], "sim_mean": row["mean"], "sim_se": row["se"],
                         "lower": lower, "upper": upper})
        paths.append(manifest.csv(pd.DataFrame(rows), f"fig6_{label}.csv"))
    manifest.save()
    return paths


def fig7(config: ExperimentConfig) -> List[Path]:
    """Normalized partial convergence on a power-law graph: chain model against simulation"""
    graph = build_graph(config)
    config = _clip_k(config, graph.n)
    fractions = config.ell_fractions
    ells = ell_counts(graph.n, fractions)
    p = graph.mean_degree() / (graph.n - 1)
    analytic = controlplane.sweep(graph.n, config.k_values, ells, 1.0, config.routing["degree_model"], p)
    analytic = analytic.set_index("k")

    simulated = {}
    for label, model in (("exp", EXPONENTIAL_BGP), ("uni", UNIFORM_BGP)):
        simulated[label] = run_sweep(config.replace("timing", bgp=model), graph).ratio_frame()

    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    paths = []
    labels = ell_counts(config.known_n or graph.n, fractions)
    for fraction, ell, label in zip(fractions, ells, labels):
        rows = []
        for k in config.k_values:
            row = {"k": k, "analytic_norm": float(analytic.loc[k, f"E_Tl_{ell}_norm"])}
            for name, frame in simulated.items():
                match = frame[(frame["k"] == k) & (frame["ell_fraction"] == fraction)].iloc[0]
                row[f"sim_{name}_norm"] = float(match["ratio"])
                row[f"sim_{name}_se"] = float(match["ratio_se"])
            rows.append(row)
        paths.append(manifest.csv(pd.DataFrame(rows), f"fig7_ell{label}.csv"))
    manifest.extra.update({"nodes": graph.n, "p": p})
    manifest.save()
    return paths


def fig8(config: ExperimentConfig) -> List[Path]:
    """Normalized partial convergence on the reduced Internet graph, betweenness cluster"""
    graph = build_graph(config)
    config = _clip_k(config, graph.n)
    sweep = run_sweep(config, graph)
    manifest = RunManifest(config.output_dir, config.seed, config.digest(), graph_hash(graph))
    paths = [manifest.csv(sweep.ratio_frame(), "fig8.csv"), manifest.csv(sweep.tc_frame(), "fig8_tc.csv")]
    manifest.extra["nodes"] = graph.n
    manifest.save()
    return paths


PRESETS: Dict[str, Callable[[ExperimentConfig], List[Path]]] = {
    "table-bounds": table_bounds,
    "fig3": fig3,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
}


def cmd_reproduce(name: str, assignments: Sequence[str] = (), seed: Optional[int] = None,
                  trials: Optional[int] = None, output_dir: Optional[str] = None) -> List[Path]:
    """Run a named preset and return the files it wrote"""
    config = preset_config(name, assignments, seed, trials, output_dir)
    logger.info(f"Reproducing {name} into {config.output_dir}")
    return PRESETS[name](config)
