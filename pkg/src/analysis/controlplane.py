"""
Control-plane convergence: Markov chain over the number of updated nodes

Step i counts transitions made so far; x is the step at which the SDN
cluster first receives the update (x = 0 means the source is a member).
After the cluster is reached it counts as one merged node, so the chain
has N-k transitions in total.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

try:
    from ..utils.errors import DomainError, DegenerateDegree
    from ..utils.constants import (
        PSDN_TAIL_TOLERANCE, PSDN_TRUNCATION_MIN_NODES, MGF_STEP_SCALE,
    )
except ImportError:
    from utils.errors import DomainError, DegenerateDegree
    from utils.constants import (
        PSDN_TAIL_TOLERANCE, PSDN_TRUNCATION_MIN_NODES, MGF_STEP_SCALE,
    )

logger = logging.getLogger(__name__)

FULL_MESH = "full_mesh"
POISSON_GRAPH = "poisson_graph"


@dataclass(frozen=True)
class ChainScenario:
    """Parameters of the update-dissemination chain"""

    N: int
    k: int
    rate: float = 1.0
    degree_model: str = FULL_MESH
    p: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"Network size must be >= 1, got N={self.N}")
        if not 1 <= self.k <= self.N:
            raise DomainError(f"Cluster size must lie in [1, N], got k={self.k}")
        if not self.rate > 0:
            raise DomainError(f"Rate must be > 0, got {self.rate}")
        if self.degree_model not in (FULL_MESH, POISSON_GRAPH):
            raise DomainError(f"Unknown degree model: {self.degree_model}")
        if self.degree_model == POISSON_GRAPH and not 0 < self.p <= 1:
            raise DomainError(f"Edge probability must lie in (0, 1], got p={self.p}")

    @property
    def steps(self) -> int:
        return self.N - self.k

    @classmethod
    def full_mesh(cls, N: int, k: int, rate: float = 1.0) -> "ChainScenario":
        return cls(N, max(k, 1), rate)

    @classmethod
    def poisson(cls, N: int, k: int, p: float, rate: float = 1.0) -> "ChainScenario":
        return cls(N, max(k, 1), rate, POISSON_GRAPH, p)


class DegreeFunction:
    """bgp-degree D(i|x) for i = 1..N-k at a given cluster-arrival step x.

    ``values(x)`` returns the whole vector for one x, which keeps the double
    sums at O((N-k)^2) with numpy doing the inner loop.
    """

    def __init__(self, scenario: ChainScenario,
                 vector: Optional[Callable[[int], np.ndarray]] = None):
        self.scenario = scenario
        self._vector = vector

    def values(self, x: int) -> np.ndarray:
        if self._vector is not None:
            result = np.asarray(self._vector(x), dtype=float)
        elif self.scenario.degree_model == POISSON_GRAPH:
            result = _poisson_vector(self.scenario, x)
        else:
            result = _full_mesh_vector(self.scenario, x)

        if result.shape != (self.scenario.steps,):
            raise DomainError(f"Degree vector has shape {result.shape}, expected ({self.scenario.steps},)")
        if result.size and not np.all(result > 0):
            step = int(np.argmin(result > 0)) + 1
            raise DegenerateDegree(
                f"bgp-degree is zero at step {step} (x={x}); the graph would be disconnected"
            )
        return result

    def __call__(self, i: int, x: int) -> float:
        return float(self.values(x)[i - 1])


def _updated_vector(scenario: ChainScenario, x: int) -> np.ndarray:
    steps = np.arange(1, scenario.steps + 1)
    return np.where(steps <= x, steps, steps + scenario.k - 1)


def _full_mesh_vector(scenario: ChainScenario, x: int) -> np.ndarray:
    return (scenario.N - _updated_vector(scenario, x)).astype(float)


def _poisson_vector(scenario: ChainScenario, x: int) -> np.ndarray:
    n = _updated_vector(scenario, x).astype(float)
    return (scenario.N - n) * -np.expm1(n * np.log1p(-scenario.p)) if scenario.p < 1 else scenario.N - n


def default_degrees(scenario: ChainScenario) -> DegreeFunction:
    return DegreeFunction(scenario)


def _check_step(name: str, value: int, upper: int):
    if not 0 <= value <= upper:
        raise DomainError(f"{name} must lie in [0, {upper}], got {value}")


def n_updated(i: int, x: int, k: int, N: Optional[int] = None) -> int:
    """Number of nodes holding the update after step i"""
    if N is not None:
        _check_step("i", i, N - k)
        _check_step("x", x, N - k)
    elif i < 0 or x < 0 or k < 1:
        raise DomainError(f"Invalid step arguments i={i}, x={x}, k={k}")
    if i <= x:
        return i
    return i + k - 1


def degree_fullmesh(i: int, x: int, N: int, k: int) -> int:
    """D(i|x) when every node is adjacent to every other"""
    if not 1 <= i <= N - k:
        raise DomainError(f"i must lie in [1, {N - k}], got {i}")
    return N - n_updated(i, x, k, N)


def degree_poisson_expected(i: int, x: int, N: int, k: int, p: float) -> float:
    """E[D(i|x)] in a G(N, p) graph"""
    if not 0 < p <= 1:
        raise DomainError(f"Edge probability must lie in (0, 1], got p={p}")
    if not 1 <= i <= N - k:
        raise DomainError(f"i must lie in [1, {N - k}], got {i}")
    n = n_updated(i, x, k, N)
    value = (N - n) * (1.0 - (1.0 - p) ** n)
    if value <= 0:
        raise DegenerateDegree(f"Expected bgp-degree is zero at i={i}, x={x}")
    return value


def p_sdn_vector(N: int, k: int) -> np.ndarray:
    """P_sdn(x) for x = 0..N-k"""
    if not 1 <= k <= N:
        raise DomainError(f"Cluster size must lie in [1, N], got k={k}")
    x = np.arange(0, N - k + 1)
    remaining = N - x.astype(float)
    # log of prod_{j<x} (1 - k/(N-j)), shifted so index x holds the product up to x-1
    log_miss = np.log1p(-k / remaining[:-1]) if N > k else np.zeros(0)
    log_survival = np.concatenate(([0.0], np.cumsum(log_miss)))
    return (k / remaining) * np.exp(log_survival)


def p_sdn(x: int, N: int, k: int) -> float:
    """Probability that the cluster first receives the update at step x"""
    _check_step("x", x, N - k)
    return float(p_sdn_vector(N, k)[x])


def _active_steps(scenario: ChainScenario) -> np.ndarray:
    """P_sdn over the x values that are summed, possibly truncated for huge N"""
    weights = p_sdn_vector(scenario.N, scenario.k)
    if scenario.N < PSDN_TRUNCATION_MIN_NODES:
        return weights
    tail = np.cumsum(weights[::-1])[::-1]
    keep = int(np.searchsorted(-tail, -PSDN_TAIL_TOLERANCE, side="right"))
    keep = max(keep, 1)
    if keep < weights.size:
        logger.warning(
            f"Truncating x-sum at {keep} of {weights.size} terms; dropped P_sdn mass {tail[keep]:.3e}"
        )
    return weights[:keep]


def mgf_tc(theta: float, scenario: ChainScenario, deg: Optional[DegreeFunction] = None) -> float:
    """Moment generating function of the convergence time"""
    deg = deg or default_degrees(scenario)
    if scenario.steps == 0:
        return 1.0

    weights = _active_steps(scenario)
    total = 0.0
    for x, weight in enumerate(weights):
        rates = scenario.rate * deg.values(x)
        if theta >= rates.min():
            raise DomainError(f"theta={theta} outside convergence region (< {rates.min()})")
        total += weight * np.exp(-np.sum(np.log1p(-theta / rates)))
    return float(total)


def _partial_sum(scenario: ChainScenario, deg: DegreeFunction, limit: Callable[[int], int]) -> float:
    weights = _active_steps(scenario)
    total = 0.0
    for x, weight in enumerate(weights):
        m = limit(x)
        if m <= 0:
            continue
        total += weight * np.sum(1.0 / deg.values(x)[:m])
    return float(total / scenario.rate)


def expected_tc(scenario: ChainScenario, deg: Optional[DegreeFunction] = None) -> float:
    """Mean time until every node holds the update"""
    deg = deg or default_degrees(scenario)
    if scenario.steps == 0:
        return 0.0
    return _partial_sum(scenario, deg, lambda x: scenario.steps)


def partial_limit(ell: int, x: int, k: int) -> int:
    """Number of transitions needed to reach ell updated nodes given x"""
    if ell <= x + 1:
        return ell - 1
    if ell <= x + k:
        return x
    return ell - k


def expected_t_partial(ell: int, scenario: ChainScenario, deg: Optional[DegreeFunction] = None) -> float:
    """Mean time until ell nodes hold the update"""
    if not 1 <= ell <= scenario.N:
        raise DomainError(f"ell must lie in [1, {scenario.N}], got {ell}")
    deg = deg or default_degrees(scenario)
    if scenario.steps == 0:
        return 0.0
    return _partial_sum(scenario, deg, lambda x: partial_limit(ell, x, scenario.k))


def baseline_no_sdn(scenario: ChainScenario) -> ChainScenario:
    """The no-centralization reference: a single-member cluster changes nothing"""
    return replace(scenario, k=1)


def mgf_step(scenario: ChainScenario) -> float:
    """Finite-difference step scaled to the slowest transition rate"""
    return MGF_STEP_SCALE * scenario.rate


def moment_tc(order: int, scenario: ChainScenario, deg: Optional[DegreeFunction] = None,
              step: Optional[float] = None) -> float:
    """Raw moment E[T_c^order] from central differences of the MGF at zero"""
    if order not in (1, 2):
        raise DomainError("Only first and second moments are supported")
    deg = deg or default_degrees(scenario)
    h = step or mgf_step(scenario) * (1e3 if order == 2 else 1.0)
    if order == 1:
        return (mgf_tc(h, scenario, deg) - mgf_tc(-h, scenario, deg)) / (2 * h)
    return (mgf_tc(h, scenario, deg) - 2 * mgf_tc(0.0, scenario, deg) + mgf_tc(-h, scenario, deg)) / h ** 2


def variance_tc(scenario: ChainScenario, deg: Optional[DegreeFunction] = None) -> float:
    first = moment_tc(1, scenario, deg)
    return moment_tc(2, scenario, deg) - first ** 2


def sweep(N: int, k_values: Sequence[int], ells: Sequence[int], rate: float = 1.0,
          degree_model: str = FULL_MESH, p: float = 1.0) -> pd.DataFrame:
    """E[T_c] and E[T_ell] for every k, raw and normalized by the k=1 baseline"""
    def build(k: int) -> ChainScenario:
        return ChainScenario(N, max(int(k), 1), rate, degree_model, p)

    base = baseline_no_sdn(build(1))
    base_tc = expected_tc(base)
    base_tl = {ell: expected_t_partial(ell, base) for ell in ells}

    rows: List[Dict[str, float]] = []
    for k in k_values:
        scenario = build(k)
        row = {"k": int(k), "E_Tc": expected_tc(scenario)}
        row["E_Tc_norm"] = row["E_Tc"] / base_tc if base_tc > 0 else 1.0
        for ell in ells:
            value = expected_t_partial(ell, scenario)
            row[f"E_Tl_{ell}"] = value
            row[f"E_Tl_{ell}_norm"] = value / base_tl[ell] if base_tl[ell] > 0 else 1.0
        rows.append(row)
        logger.debug(f"Chain sweep N={N} k={k}: E[Tc]={row['E_Tc']:.4f}")
    return pd.DataFrame(rows)
