"""
BGP update time and SDN dissemination time models
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

try:
    from ..utils.errors import DomainError, EmptyObservations, ParseError
except ImportError:
    from utils.errors import DomainError, EmptyObservations, ParseError

logger = logging.getLogger(__name__)

EXPONENTIAL = "exponential"
UNIFORM = "uniform"
DETERMINISTIC = "deterministic"
EMPIRICAL = "empirical"

VARIANTS = [EXPONENTIAL, UNIFORM, DETERMINISTIC, EMPIRICAL]


@dataclass(frozen=True)
class TimeModel:
    """Distribution of a non-negative delay.

    Only the parameters of the chosen variant are meaningful: ``rate`` for
    exponential, ``lo``/``hi`` for uniform, ``value`` for deterministic and
    ``samples`` for empirical (bootstrap) models.
    """

    variant: str
    rate: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    value: float = 0.0
    samples: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.variant == EXPONENTIAL:
            if not self.rate > 0:
                raise DomainError(f"Exponential rate must be > 0, got {self.rate}")
        elif self.variant == UNIFORM:
            if self.lo < 0 or not self.hi > self.lo:
                raise DomainError(f"Uniform bounds need 0 <= lo < hi, got [{self.lo}, {self.hi}]")
        elif self.variant == DETERMINISTIC:
            if self.value < 0:
                raise DomainError(f"Deterministic value must be >= 0, got {self.value}")
        elif self.variant == EMPIRICAL:
            if not self.samples:
                raise DomainError("Empirical model needs at least one sample")
            if min(self.samples) < 0:
                raise DomainError("Empirical samples must be >= 0")
        else:
            raise DomainError(f"Unknown time model variant: {self.variant}")

    @classmethod
    def exponential(cls, rate: float) -> "TimeModel":
        return cls(EXPONENTIAL, rate=float(rate))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "TimeModel":
        return cls(UNIFORM, lo=float(lo), hi=float(hi))

    @classmethod
    def deterministic(cls, value: float) -> "TimeModel":
        return cls(DETERMINISTIC, value=float(value))

    @classmethod
    def empirical(cls, samples: Sequence[float]) -> "TimeModel":
        return cls(EMPIRICAL, samples=tuple(float(s) for s in samples))

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly representation"""
        if self.variant == EXPONENTIAL:
            return {"variant": EXPONENTIAL, "rate": self.rate}
        if self.variant == UNIFORM:
            return {"variant": UNIFORM, "lo": self.lo, "hi": self.hi}
        if self.variant == DETERMINISTIC:
            return {"variant": DETERMINISTIC, "value": self.value}
        return {"variant": EMPIRICAL, "samples": list(self.samples)}

    def describe(self) -> str:
        """Short label used in logs and file headers"""
        if self.variant == EXPONENTIAL:
            return f"exponential(rate={self.rate:g})"
        if self.variant == UNIFORM:
            return f"uniform({self.lo:g},{self.hi:g})"
        if self.variant == DETERMINISTIC:
            return f"deterministic({self.value:g})"
        return f"empirical(n={len(self.samples)})"


@dataclass(frozen=True)
class SdnLatencyModel:
    """Time for the whole SDN cluster to learn an update once one member has it"""

    model: TimeModel = TimeModel(DETERMINISTIC, value=0.0)

    def mean(self) -> float:
        return mean(self.model)

    def sample(self, rng: np.random.Generator) -> float:
        return sample(self.model, rng)


@dataclass(frozen=True)
class PathObservation:
    """Measured end-to-end update delay over an AS path of ``d`` hops"""

    t_sd: float
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"Path length must be >= 1, got {self.d}")
        if self.t_sd < 0:
            raise DomainError(f"Delay must be >= 0, got {self.t_sd}")


def model_from_dict(data: Dict[str, Any]) -> TimeModel:
    """Build a model from its dictionary form (config files, fitted JSON)"""
    variant = str(data.get("variant", "")).lower()
    if variant == EXPONENTIAL:
        if "rate" in data:
            return TimeModel.exponential(data["rate"])
        return TimeModel.exponential(1.0 / float(data["mean"]))
    if variant == UNIFORM:
        return TimeModel.uniform(data["lo"], data["hi"])
    if variant == DETERMINISTIC:
        return TimeModel.deterministic(data.get("value", 0.0))
    if variant == EMPIRICAL:
        return TimeModel.empirical(data["samples"])
    raise DomainError(f"Unknown time model variant: {data.get('variant')!r}")


def sample(model: TimeModel, rng: np.random.Generator) -> float:
    """One iid draw from ``model``"""
    return float(sample_many(model, rng, 1)[0])


def sample_many(model: TimeModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` iid draws; the i-th value equals the i-th call of ``sample`` on the same stream"""
    if model.variant == EXPONENTIAL:
        return rng.exponential(1.0 / model.rate, size=n)
    if model.variant == UNIFORM:
        return rng.uniform(model.lo, model.hi, size=n)
    if model.variant == DETERMINISTIC:
        return np.full(n, model.value, dtype=float)
    values = np.asarray(model.samples, dtype=float)
    return values[rng.integers(0, len(values), size=n)]


def mean(model: TimeModel) -> float:
    """Closed-form mean"""
    if model.variant == EXPONENTIAL:
        return 1.0 / model.rate
    if model.variant == UNIFORM:
        return (model.lo + model.hi) / 2.0
    if model.variant == DETERMINISTIC:
        return model.value
    return float(np.mean(model.samples))


def variance(model: TimeModel) -> float:
    """Closed-form variance (population variance for empirical models)"""
    if model.variant == EXPONENTIAL:
        return 1.0 / model.rate ** 2
    if model.variant == UNIFORM:
        return (model.hi - model.lo) ** 2 / 12.0
    if model.variant == DETERMINISTIC:
        return 0.0
    return float(np.var(model.samples))


def fit_exponential(observations: List[PathObservation]) -> TimeModel:
    """Exponential model whose mean is total delay over total hops"""
    if not observations:
        raise EmptyObservations("Cannot fit an empty observation list")

    total_delay = sum(obs.t_sd for obs in observations)
    total_hops = sum(obs.d for obs in observations)
    estimate = total_delay / total_hops
    if estimate <= 0:
        raise DomainError("Observed delays sum to zero; rate is undefined")

    logger.info(f"Fitted mean update time {estimate:.4f} from {len(observations)} observations")
    return TimeModel.exponential(1.0 / estimate)


def load_observations(path: Union[str, Path]) -> List[PathObservation]:
    """Read observations from a CSV with header ``t_sd,d``"""
    try:
        frame = pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError) as e:
        raise ParseError(f"Cannot read observations from {path}: {e}")

    missing = {"t_sd", "d"} - set(frame.columns)
    if missing:
        raise ParseError(f"{path}: missing columns {sorted(missing)}")

    try:
        return [PathObservation(float(row.t_sd), int(row.d)) for row in frame.itertuples(index=False)]
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: invalid observation row: {e}")


def model_to_json(model: TimeModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True)


def save_model_json(model: TimeModel, path: Union[str, Path]):
    Path(path).write_text(model_to_json(model) + "\n")
    logger.info(f"Wrote time model to {path}")


def synthetic_path_delays(model: TimeModel, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """End-to-end delays of ``n`` independent ``d``-hop paths (no cluster)"""
    if d < 1:
        raise DomainError(f"Path length must be >= 1, got {d}")
    return sample_many(model, rng, n * d).reshape(n, d).sum(axis=1)


def empirical_ccdf(values: Sequence[float]) -> pd.DataFrame:
    """CCDF of a sample as a (t, ccdf) frame, P{X > t} at each sorted value"""
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        return pd.DataFrame({"t": [], "ccdf": []})
    ccdf = 1.0 - np.arange(1, ordered.size + 1) / ordered.size
    return pd.DataFrame({"t": ordered, "ccdf": ccdf})
