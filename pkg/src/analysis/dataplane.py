"""
Data-plane connectivity time: path bounds and cluster-occupancy distributions

A path of length d has d+1 nodes; k' of them belong to the SDN cluster.
The bounds are dimensionless multiples of the mean per-hop update time.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import betaln, logsumexp

try:
    from ..utils.errors import DomainError, DegenerateProfile, ParseError
    from ..utils.constants import PMF_TOLERANCE
except ImportError:
    from utils.errors import DomainError, DegenerateProfile, ParseError
    from utils.constants import PMF_TOLERANCE

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KPrimeDistribution:
    """Distribution of the number of cluster members on a path.

    ``omega`` is None for the (central) hypergeometric case and the odds
    ratio for Fisher's noncentral hypergeometric case.
    """

    N: int
    k: int
    omega: Optional[float] = None

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"Population must be >= 1, got N={self.N}")
        if not 0 <= self.k <= self.N:
            raise DomainError(f"Cluster size must lie in [0, N], got k={self.k}, N={self.N}")
        if self.omega is not None and not self.omega > 0:
            raise DomainError(f"Odds ratio must be > 0, got {self.omega}")

    @classmethod
    def hypergeometric(cls, N: int, k: int) -> "KPrimeDistribution":
        return cls(N, k)

    @classmethod
    def fisher(cls, N: int, k: int, omega: float) -> "KPrimeDistribution":
        return cls(N, k, float(omega))

    @property
    def is_noncentral(self) -> bool:
        return self.omega is not None


@dataclass
class CentralityProfile:
    """Per-node centrality scores (betweenness by default)"""

    scores: Dict[int, float]
    backend: str = "exact"

    def __post_init__(self):
        negative = [node for node, value in self.scores.items() if value < 0]
        if negative:
            raise DomainError(f"Centrality must be >= 0; negative at nodes {negative[:5]}")

    def means(self, cluster: Iterable[int]) -> Tuple[float, float]:
        """(omega_sdn, omega_bgp): mean score inside and outside the cluster"""
        members = set(cluster)
        inside = [value for node, value in self.scores.items() if node in members]
        outside = [value for node, value in self.scores.items() if node not in members]
        if not inside or not outside:
            raise DegenerateProfile("Cluster must be a nonempty proper subset of the profiled nodes")
        return float(np.mean(inside)), float(np.mean(outside))

    def ranked(self) -> list:
        """Nodes by decreasing score, ties by smallest id"""
        return sorted(self.scores, key=lambda node: (-self.scores[node], node))


@dataclass
class PathLengthDistribution:
    """Probability of each SD-path length d >= 1"""

    pmf: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.pmf:
            raise DomainError("Path length distribution needs at least one length")
        if min(self.pmf) < 1:
            raise DomainError("Path lengths must be >= 1")
        if min(self.pmf.values()) < 0:
            raise DomainError("Probabilities must be >= 0")
        total = sum(self.pmf.values())
        if abs(total - 1.0) > PMF_TOLERANCE:
            raise DomainError(f"Path length probabilities sum to {total!r}, expected 1")

    @classmethod
    def from_counts(cls, counts: Mapping[int, float]) -> "PathLengthDistribution":
        total = float(sum(counts.values()))
        if total <= 0:
            raise DomainError("Path length counts are empty")
        pmf = {int(d): c / total for d, c in counts.items() if c > 0}
        # absorb rounding so the sum is 1 within tolerance
        last = max(pmf)
        pmf[last] = 1.0 - sum(p for d, p in pmf.items() if d != last)
        return cls(dict(sorted(pmf.items())))

    @classmethod
    def point_mass(cls, d: int) -> "PathLengthDistribution":
        return cls({int(d): 1.0})

    def max_length(self) -> int:
        return max(self.pmf)

    def mean(self) -> float:
        return sum(d * p for d, p in self.pmf.items())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"d": list(self.pmf), "probability": list(self.pmf.values())})

    def save_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def load_csv(cls, path: Union[str, Path]) -> "PathLengthDistribution":
        try:
            frame = pd.read_csv(path, comment="#")
            counts = {int(row.d): float(row.probability) for row in frame.itertuples(index=False)}
        except (OSError, AttributeError, ValueError, pd.errors.ParserError) as e:
            raise ParseError(f"Cannot read path length distribution from {path}: {e}")
        return cls.from_counts(counts)


def _check_kprime(d: int, kprime: int):
    if d < 1:
        raise DomainError(f"Path length must be >= 1, got d={d}")
    if not 0 <= kprime <= d + 1:
        raise DomainError(f"k' must lie in [0, d+1] = [0, {d + 1}], got {kprime}")


def lb(d: int, kprime: int) -> float:
    """Lower bound factor on E[T_SD | d, k']"""
    _check_kprime(d, kprime)
    if kprime >= d:
        return 0.0
    return d / (kprime + 1)


def ub(d: int, kprime: int) -> float:
    """Upper bound factor on E[T_SD | d, k']"""
    _check_kprime(d, kprime)
    if kprime >= 2:
        return float(d - kprime + 1)
    return float(d)


def _log_binom(n: int, r: np.ndarray) -> np.ndarray:
    """log C(n, r) elementwise; r must lie in [0, n]"""
    r = np.asarray(r, dtype=float)
    return -np.log1p(n) - betaln(n - r + 1.0, r + 1.0)


def kprime_pmf_vector(dist: KPrimeDistribution, d: int) -> np.ndarray:
    """P{k' = i | d} for i = 0..d+1, computed in log space"""
    if d < 1:
        raise DomainError(f"Path length must be >= 1, got d={d}")
    draws = d + 1
    if draws > dist.N:
        raise DomainError(f"Path of {draws} nodes does not fit in N={dist.N}")

    pmf = np.zeros(draws + 1)
    lo = max(0, draws - (dist.N - dist.k))
    hi = min(dist.k, draws)
    support = np.arange(lo, hi + 1)

    log_weights = _log_binom(dist.k, support) + _log_binom(dist.N - dist.k, draws - support)
    if dist.is_noncentral:
        log_weights = log_weights + support * np.log(dist.omega)

    pmf[lo:hi + 1] = np.exp(log_weights - logsumexp(log_weights))
    return pmf


def kprime_pmf(dist: KPrimeDistribution, d: int, i: int) -> float:
    """P{k' = i | d}; zero outside the feasible support"""
    if not 0 <= i <= d + 1:
        raise DomainError(f"k' must lie in [0, d+1], got {i}")
    return float(kprime_pmf_vector(dist, d)[i])


def bound_factors(d: int) -> Tuple[np.ndarray, np.ndarray]:
    """LB and UB factors for every k' in 0..d+1"""
    lower = np.array([lb(d, i) for i in range(d + 2)])
    upper = np.array([ub(d, i) for i in range(d + 2)])
    return lower, upper


def tsd_bounds_given_d(d: int, dist: KPrimeDistribution, mu_bgp: float) -> Tuple[float, float]:
    """Bounds on E[T_SD | d] by conditioning on k'"""
    if not mu_bgp > 0:
        raise DomainError(f"Mean update time must be > 0, got {mu_bgp}")
    pmf = kprime_pmf_vector(dist, d)
    lower, upper = bound_factors(d)
    return float(lower @ pmf) * mu_bgp, float(upper @ pmf) * mu_bgp


def tsd_bounds(path_dist: PathLengthDistribution, dist: KPrimeDistribution,
               mu_bgp: float) -> Tuple[float, float]:
    """Bounds on E[T_SD] mixed over the path length distribution"""
    lower = upper = 0.0
    for d, probability in path_dist.pmf.items():
        if probability == 0:
            continue
        lo, hi = tsd_bounds_given_d(d, dist, mu_bgp)
        lower += probability * lo
        upper += probability * hi
    return lower, upper


def normalized_bounds(path_dist: PathLengthDistribution, dist: KPrimeDistribution) -> Tuple[float, float]:
    """Bounds divided by the no-cluster value (which is the mean path length)"""
    lower, upper = tsd_bounds(path_dist, dist, 1.0)
    baseline = path_dist.mean()
    return lower / baseline, upper / baseline


def omega_ratio(profile: CentralityProfile, cluster: Iterable[int]) -> float:
    """Mean centrality inside the cluster over mean centrality outside"""
    omega_sdn, omega_bgp = profile.means(cluster)
    if omega_bgp <= 0:
        raise DegenerateProfile("Nodes outside the cluster have zero mean centrality")
    if omega_sdn <= 0:
        raise DegenerateProfile("Cluster members have zero mean centrality; odds ratio would be 0")
    return omega_sdn / omega_bgp
