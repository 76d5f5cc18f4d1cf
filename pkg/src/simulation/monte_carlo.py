"""
Monte-Carlo aggregation of propagation traces
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

try:
    from .engine import PropagationEngine, Scenario
    from ..analysis.dataplane import CentralityProfile
    from ..topology.centrality import ClusterSelection, select_cluster
    from ..utils.errors import DomainError, ParseError
    from ..utils.constants import DEFAULT_ELL_FRACTIONS, TRIAL_CHUNK_SIZE
except ImportError:
    from simulation.engine import PropagationEngine, Scenario
    from analysis.dataplane import CentralityProfile
    from topology.centrality import ClusterSelection, select_cluster
    from utils.errors import DomainError, ParseError
    from utils.constants import DEFAULT_ELL_FRACTIONS, TRIAL_CHUNK_SIZE

logger = logging.getLogger(__name__)


@dataclass
class MomentAccumulator:
    """Count, mean and sum of squared deviations, merged with Chan's pairwise update.

    When each added value is itself the average of several raw observations
    (one trial's T_SD values in a bucket), ``samples`` counts those
    observations while ``count`` counts the values the standard error runs over.
    """

    count: int = 0
    average: float = 0.0
    m2: float = 0.0
    samples: int = 0

    def add(self, value: float, samples: int = 1):
        self.count += 1
        self.samples += int(samples)
        delta = value - self.average
        self.average += delta / self.count
        self.m2 += delta * (value - self.average)

    def merge(self, other: "MomentAccumulator"):
        if other.count == 0:
            self.samples += other.samples
            return
        if self.count == 0:
            self.count, self.average, self.m2 = other.count, other.average, other.m2
            self.samples += other.samples
            return
        total = self.count + other.count
        delta = other.average - self.average
        self.average += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total
        self.samples += other.samples

    @property
    def mean(self) -> float:
        return self.average if self.count else math.nan

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return max(0.0, self.m2 / (self.count - 1))

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else math.nan

    def to_list(self) -> list:
        return [self.count, self.average, self.m2, self.samples]

    @classmethod
    def from_list(cls, values: Sequence) -> "MomentAccumulator":
        if len(values) != 4:
            raise ValueError(f"expected count, mean, m2 and samples, got {list(values)}")
        return cls(int(values[0]), float(values[1]), float(values[2]), int(values[3]))


def _add_trial_means(groups: Dict[Any, MomentAccumulator], keys: List[Any], codes: np.ndarray, values: np.ndarray):
    """Add one trial: each group receives the mean of its values in this trial"""
    counts = np.bincount(codes, minlength=len(keys))
    totals = np.bincount(codes, weights=values, minlength=len(keys))
    for index, key in enumerate(keys):
        groups.setdefault(key, MomentAccumulator()).add(totals[index] / counts[index], int(counts[index]))


def paired_ratio(values: Sequence[float], base_values: Sequence[float]) -> Tuple[float, float]:
    """Ratio of means of per-trial pairs and its delta-method standard error.

    Pairs come from runs sharing edge delays trial by trial; the residuals
    x_i - r * y_i carry their correlation.
    """
    x = np.asarray(values, dtype=float)
    y = np.asarray(base_values, dtype=float)
    if x.size == 0 or x.size != y.size:
        raise DomainError(f"Paired ratio needs equally many trials, got {x.size} and {y.size}")
    base_mean = float(y.mean())
    if not base_mean:
        return math.nan, math.nan
    ratio = float(x.mean()) / base_mean
    if x.size < 2:
        return ratio, 0.0
    residual = x - ratio * y
    return ratio, float(np.std(residual, ddof=1) / math.sqrt(x.size) / abs(base_mean))


@dataclass
class SummaryStats:
    """Aggregated T_SD buckets, partial convergence times and T_c of one run.

    The trial is the sampling unit: a bucket receives one value per trial
    that reaches it (the mean T_SD of its destinations in that trial), so
    standard errors account for destinations sharing a trial's edge delays.
    Per-trial T_c and T_ell values are kept in trial order for paired ratios.
    """

    k: int = 0
    seed: int = 0
    trials: int = 0
    ell_fractions: Tuple[float, ...] = tuple(DEFAULT_ELL_FRACTIONS)
    buckets: Dict[Tuple[int, int], MomentAccumulator] = field(default_factory=dict)
    by_d: Dict[int, MomentAccumulator] = field(default_factory=dict)
    partial: Dict[float, MomentAccumulator] = field(default_factory=dict)
    tc: MomentAccumulator = field(default_factory=MomentAccumulator)
    unreached: int = 0
    tc_trials: List[float] = field(default_factory=list)
    partial_trials: Dict[float, List[float]] = field(default_factory=dict)

    def add_trace(self, trace):
        self.trials += 1
        self.unreached += trace.unreached_count
        destinations = trace.destinations()
        if destinations.size:
            d = trace.path_length[destinations]
            kprime = trace.kprime[destinations]
            values = trace.tsd[destinations]
            pairs, codes = np.unique(np.stack([d, kprime], axis=1), axis=0, return_inverse=True)
            _add_trial_means(self.buckets, [tuple(int(x) for x in pair) for pair in pairs], codes.ravel(), values)
            lengths, codes = np.unique(d, return_inverse=True)
            _add_trial_means(self.by_d, [int(x) for x in lengths], codes.ravel(), values)
        for fraction in self.ell_fractions:
            value = trace.t_fraction(fraction)
            self.partial.setdefault(fraction, MomentAccumulator()).add(value)
            self.partial_trials.setdefault(fraction, []).append(value)
        value = trace.t_c()
        self.tc.add(value)
        self.tc_trials.append(value)

    def merge(self, other: "SummaryStats"):
        self.trials += other.trials
        self.unreached += other.unreached
        for target, source in ((self.buckets, other.buckets), (self.by_d, other.by_d), (self.partial, other.partial)):
            for key in sorted(source):
                target.setdefault(key, MomentAccumulator()).merge(source[key])
        self.tc.merge(other.tc)
        self.tc_trials.extend(other.tc_trials)
        for fraction in sorted(other.partial_trials):
            self.partial_trials.setdefault(fraction, []).extend(other.partial_trials[fraction])

    def bucket_frame(self) -> pd.DataFrame:
        """One row per (d, k') bucket; ``count`` is destinations, ``trials`` the trials the SE runs over"""
        rows = [{"bucket_d": d, "bucket_kprime": kprime, "count": acc.samples, "mean": acc.mean, "se": acc.se,
                 "trials": acc.count}
                for (d, kprime), acc in sorted(self.buckets.items())]
        return pd.DataFrame(rows, columns=["bucket_d", "bucket_kprime", "count", "mean", "se", "trials"])

    def per_d_frame(self) -> pd.DataFrame:
        rows = [{"d": d, "count": acc.samples, "mean": acc.mean, "se": acc.se, "trials": acc.count}
                for d, acc in sorted(self.by_d.items())]
        return pd.DataFrame(rows, columns=["d", "count", "mean", "se", "trials"])

    def partial_frame(self) -> pd.DataFrame:
        rows = [{"ell_fraction": ell, "mean": acc.mean, "se": acc.se} for ell, acc in sorted(self.partial.items())]
        return pd.DataFrame(rows, columns=["ell_fraction", "mean", "se"])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "seed": self.seed,
            "trials": self.trials,
            "ell_fractions": list(self.ell_fractions),
            "unreached": self.unreached,
            "tc": self.tc.to_list(),
            "partial": [[ell] + acc.to_list() for ell, acc in sorted(self.partial.items())],
            "by_d": [[d] + acc.to_list() for d, acc in sorted(self.by_d.items())],
            "buckets": [[d, kprime] + acc.to_list() for (d, kprime), acc in sorted(self.buckets.items())],
            "tc_trials": list(self.tc_trials),
            "partial_trials": [[ell] + list(values) for ell, values in sorted(self.partial_trials.items())],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SummaryStats":
        try:
            return cls(
                k=int(data["k"]),
                seed=int(data["seed"]),
                trials=int(data["trials"]),
                ell_fractions=tuple(float(x) for x in data["ell_fractions"]),
                unreached=int(data["unreached"]),
                tc=MomentAccumulator.from_list(data["tc"]),
                partial={float(row[0]): MomentAccumulator.from_list(row[1:]) for row in data["partial"]},
                by_d={int(row[0]): MomentAccumulator.from_list(row[1:]) for row in data["by_d"]},
                buckets={(int(row[0]), int(row[1])): MomentAccumulator.from_list(row[2:]) for row in data["buckets"]},
                tc_trials=[float(x) for x in data["tc_trials"]],
                partial_trials={float(row[0]): [float(x) for x in row[1:]] for row in data["partial_trials"]},
            )
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ParseError(f"Invalid summary statistics record: {e}")

    def save_json(self, path: Union[str, Path], **extra):
        payload = dict(self.to_dict(), **extra)
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)

    @classmethod
    def load_json(cls, path: Union[str, Path]) -> "SummaryStats":
        try:
            with open(path, "r") as handle:
                return cls.from_dict(json.load(handle))
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"Cannot read {path}: {e}")


def _run_chunk(scenario: Scenario, start: int, stop: int, ell_fractions: Tuple[float, ...],
               trace_dir: Optional[str] = None) -> SummaryStats:
    engine = PropagationEngine(scenario)
    stats = SummaryStats(len(scenario.cluster), scenario.seed, 0, ell_fractions)
    for trial_index in range(start, stop):
        trace = engine.run_trial(trial_index)
        if trace_dir is not None:
            trace.dump(Path(trace_dir) / f"trace_k{len(scenario.cluster)}_{trial_index}.json")
        stats.add_trace(trace)
    return stats


def run_monte_carlo(scenario: Scenario, ell_fractions: Sequence[float] = DEFAULT_ELL_FRACTIONS,
                    workers: int = 1, trace_dir: Optional[Union[str, Path]] = None) -> SummaryStats:
    """Aggregate ``scenario.trials`` independent trials.

    Trials are split into fixed-size chunks merged in chunk order, so the
    result does not depend on the number of worker processes.
    """
    fractions = tuple(sorted(float(f) for f in ell_fractions))
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise DomainError(f"Partial convergence fractions must lie in (0, 1], got {fractions}")
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
        trace_dir = str(trace_dir)

    chunks = [(start, min(start + TRIAL_CHUNK_SIZE, scenario.trials))
              for start in range(0, scenario.trials, TRIAL_CHUNK_SIZE)]
    logger.info(f"Running {scenario.trials} trials (k={len(scenario.cluster)}, routing={scenario.routing}, "
                f"workers={workers})")

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, scenario, start, stop, fractions, trace_dir) for start, stop in chunks]
            parts = [future.result() for future in futures]
    else:
        parts = [_run_chunk(scenario, start, stop, fractions, trace_dir) for start, stop in chunks]

    stats = SummaryStats(len(scenario.cluster), scenario.seed, 0, fractions)
    for part in parts:
        stats.merge(part)
    if stats.unreached:
        logger.warning(f"{stats.unreached} node receptions missing over {stats.trials} trials (unreached nodes)")
    return stats


def ratio_with_se(mean: float, se: float, base_mean: float, base_se: float) -> Tuple[float, float]:
    """Ratio of two estimates and its first-order standard error, treating them as independent.

    Runs of one sweep share edge delays trial by trial and are positively
    correlated, so for them this error is an upper estimate; T_c and T_ell
    ratios use ``paired_ratio`` instead.
    """
    if not base_mean or math.isnan(base_mean) or math.isnan(mean):
        return math.nan, math.nan
    ratio = mean / base_mean
    relative = math.hypot(se / mean if mean else 0.0, base_se / base_mean)
    return ratio, abs(ratio) * relative


@dataclass
class SweepResult:
    """Baseline run plus one run per cluster size, with ratio tables"""

    baseline: SummaryStats
    runs: Dict[int, SummaryStats]
    clusters: Dict[int, frozenset] = field(default_factory=dict)
    nodes: int = 0

    def _ratio(self, k: int, acc: MomentAccumulator, base: MomentAccumulator) -> Tuple[float, float]:
        if k == 0:
            return 1.0, 0.0
        return ratio_with_se(acc.mean, acc.se, base.mean, base.se)

    def _paired(self, k: int, values: List[float], base_values: List[float],
                acc: MomentAccumulator, base: MomentAccumulator) -> Tuple[float, float]:
        if k == 0:
            return 1.0, 0.0
        if values and len(values) == len(base_values):
            return paired_ratio(values, base_values)
        return ratio_with_se(acc.mean, acc.se, base.mean, base.se)

    def ell_count(self, fraction: float) -> int:
        return max(1, min(self.nodes, int(round(fraction * self.nodes))))

    def ratio_frame(self) -> pd.DataFrame:
        """Rows (k, ell, ell_fraction, mean, se, ratio, ratio_se) of the partial convergence times"""
        rows = []
        for k, stats in sorted(self.runs.items()):
            for ell, acc in sorted(stats.partial.items()):
                ratio, ratio_se = self._paired(k, stats.partial_trials.get(ell, []),
                                               self.baseline.partial_trials.get(ell, []),
                                               acc, self.baseline.partial[ell])
                rows.append({"k": k, "ell": self.ell_count(ell), "ell_fraction": ell, "mean": acc.mean,
                             "se": acc.se, "ratio": ratio, "ratio_se": ratio_se})
        return pd.DataFrame(rows, columns=["k", "ell", "ell_fraction", "mean", "se", "ratio", "ratio_se"])

    def tc_frame(self) -> pd.DataFrame:
        rows = []
        for k, stats in sorted(self.runs.items()):
            ratio, ratio_se = self._paired(k, stats.tc_trials, self.baseline.tc_trials, stats.tc, self.baseline.tc)
            rows.append({"k": k, "mean": stats.tc.mean, "se": stats.tc.se, "ratio": ratio, "ratio_se": ratio_se})
        return pd.DataFrame(rows, columns=["k", "mean", "se", "ratio", "ratio_se"])

    def per_d_frame(self) -> pd.DataFrame:
        """Mean T_SD per path length (over all k'), normalized by the baseline"""
        rows = []
        for k, stats in sorted(self.runs.items()):
            for d, acc in sorted(stats.by_d.items()):
                base = self.baseline.by_d.get(d)
                ratio, ratio_se = self._ratio(k, acc, base) if base else (math.nan, math.nan)
                rows.append({"k": k, "d": d, "count": acc.samples, "mean": acc.mean, "se": acc.se,
                             "ratio": ratio, "ratio_se": ratio_se})
        return pd.DataFrame(rows, columns=["k", "d", "count", "mean", "se", "ratio", "ratio_se"])

    def bucket_frame(self) -> pd.DataFrame:
        frames = []
        for k, stats in sorted(self.runs.items()):
            frame = stats.bucket_frame()
            frame.insert(0, "k", k)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)


def normalized_sweep(base: Scenario, k_values: Sequence[int], strategy: str,
                     profile: Optional[CentralityProfile] = None,
                     ell_fractions: Sequence[float] = DEFAULT_ELL_FRACTIONS, workers: int = 1,
                     checkpoint_dir: Optional[Union[str, Path]] = None, digest: str = "",
                     trace_dir: Optional[Union[str, Path]] = None) -> SweepResult:
    """Run the empty-cluster baseline once, then every k with a freshly selected cluster.

    All runs share the master seed, so trial i sees the same edge delays in
    every run. With ``checkpoint_dir`` each finished run is stored and reused
    on restart when its config digest matches.
    """
    if not k_values:
        raise DomainError("Cluster size sweep is empty")

    def run(k: int, cluster: frozenset) -> SummaryStats:
        path = Path(checkpoint_dir) / f"checkpoint_k{k}.json" if checkpoint_dir else None
        if path is not None and path.exists():
            with open(path, "r") as handle:
                stored = json.load(handle)
            if stored.get("digest") == digest:
                logger.info(f"Resuming k={k} from {path}")
                return SummaryStats.from_dict(stored)
            logger.warning(f"Ignoring checkpoint {path} written for another configuration")
        stats = run_monte_carlo(base.with_cluster(cluster), ell_fractions, workers, trace_dir)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            stats.save_json(path, digest=digest)
        return stats

    baseline = run(0, frozenset())
    runs: Dict[int, SummaryStats] = {}
    clusters: Dict[int, frozenset] = {}
    for k in sorted(set(int(k) for k in k_values)):
        if k == 0:
            runs[0], clusters[0] = baseline, frozenset()
            continue
        cluster = select_cluster(ClusterSelection(strategy, k), base.graph.n, profile, base.seed)
        clusters[k] = cluster
        runs[k] = run(k, cluster)
        logger.info(f"k={k}: mean T_c {runs[k].tc.mean:.4f} vs baseline {baseline.tc.mean:.4f}")
    return SweepResult(baseline, runs, clusters, base.graph.n)
