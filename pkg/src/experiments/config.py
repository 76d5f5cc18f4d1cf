"""
Experiment configuration files

One JSON document per experiment with the sections below. Keys missing
from a file take the defaults; unknown sections or keys are rejected.
"""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

try:
    from ..analysis.controlplane import FULL_MESH, POISSON_GRAPH
    from ..analysis.timemodel import model_from_dict, TimeModel
    from ..utils.errors import ConfigError, DomainError
    from ..utils.settings import settings
    from ..utils.constants import (
        DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_BGP_RATE, DEFAULT_ELL_FRACTIONS, DEFAULT_PATH_SAMPLES,
        ROUTING_MODES, STRATEGY_RANDOM, STRATEGIES, BETWEENNESS_EXACT, BETWEENNESS_PATH_SAMPLE,
    )
except ImportError:
    from analysis.controlplane import FULL_MESH, POISSON_GRAPH
    from analysis.timemodel import model_from_dict, TimeModel
    from utils.errors import ConfigError, DomainError
    from utils.settings import settings
    from utils.constants import (
        DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_BGP_RATE, DEFAULT_ELL_FRACTIONS, DEFAULT_PATH_SAMPLES,
        ROUTING_MODES, STRATEGY_RANDOM, STRATEGIES, BETWEENNESS_EXACT, BETWEENNESS_PATH_SAMPLE,
    )

logger = logging.getLogger(__name__)

GENERATORS = ["full_mesh", "poisson", "barabasi_albert", "small_world", "caida"]
DEGREE_MODELS = [FULL_MESH, POISSON_GRAPH]

# numeric keys and their conversion; None stays allowed
NUMERIC_KEYS = {
    ("topology", "N"): int,
    ("topology", "p"): float,
    ("topology", "m"): int,
    ("topology", "k_nn"): int,
    ("topology", "p_rewire"): float,
    ("topology", "min_degree"): int,
    ("cluster", "path_samples"): int,
    ("cluster", "destinations_per_source"): int,
    ("simulation", "trials"): int,
    ("simulation", "seed"): int,
    ("simulation", "source"): int,
    ("simulation", "workers"): int,
}
NUMERIC_LISTS = {
    ("cluster", "k_values"): int,
    ("simulation", "ell_fractions"): float,
}

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "topology": {
        "generator": "poisson",
        "N": 1000,
        "p": 0.005,
        "m": 5,
        "k_nn": 10,
        "p_rewire": 0.1,
        "path": None,
        "prune": False,
        "min_degree": 3,
        "drop_stubs": True,
        "largest_component": True,
    },
    "cluster": {
        "strategy": STRATEGY_RANDOM,
        "k_values": [0, 20, 50, 100, 200],
        "backend": None,
        "path_samples": DEFAULT_PATH_SAMPLES,
        "destinations_per_source": 1,
    },
    "timing": {
        "bgp": {"variant": "exponential", "rate": DEFAULT_BGP_RATE},
        "sdn": {"variant": "deterministic", "value": 0.0},
    },
    "routing": {
        "mode": None,
        "degree_model": POISSON_GRAPH,
    },
    "simulation": {
        "trials": DEFAULT_TRIALS,
        "seed": DEFAULT_SEED,
        "ell_fractions": list(DEFAULT_ELL_FRACTIONS),
        "source": None,
        "per_node_draws": False,
        "workers": None,
        "checkpoint": False,
        "trace": False,
    },
    "output": {
        "dir": None,
    },
}


def _merge(base: Dict[str, Any], updates: Dict[str, Any], where: str = "") -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in updates.items():
        if key not in merged:
            raise ConfigError(f"Unknown configuration key '{where}{key}'")
        # sections merge key by key; values inside a section (time models too) are replaced whole
        if isinstance(merged[key], dict) and where == "":
            if not isinstance(value, dict):
                raise ConfigError(f"Section '{key}' must be an object")
            merged[key] = _merge(merged[key], value, f"{key}.")
        else:
            merged[key] = value
    return merged


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


@dataclass
class ExperimentConfig:
    """Validated experiment configuration"""

    name: str
    data: Dict[str, Dict[str, Any]]
    source_path: Optional[Path] = None

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], name: Optional[str] = None,
                  source_path: Optional[Path] = None) -> "ExperimentConfig":
        raw = dict(raw)
        name = raw.pop("name", None) or name or "experiment"
        return cls(str(name), _merge(DEFAULT_CONFIG, raw), source_path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        path = Path(path)
        try:
            with open(path, "r") as handle:
                raw = json.load(handle)
        except FileNotFoundError:
            raise ConfigError(f"Configuration file not found: {path}")
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}")
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        logger.info(f"Loaded experiment configuration {path}")
        return cls.from_dict(raw, path.stem, path)

    def with_overrides(self, assignments: Sequence[str] = (), seed: Optional[int] = None,
                       trials: Optional[int] = None, output_dir: Optional[str] = None) -> "ExperimentConfig":
        """Copy with ``section.key=value`` assignments and dedicated flags applied"""
        updates: Dict[str, Dict[str, Any]] = {}
        for assignment in assignments:
            key, sep, text = assignment.partition("=")
            section, dot, field_name = key.strip().partition(".")
            if not sep or not dot or not field_name:
                raise ConfigError(f"Override must look like section.key=value, got {assignment!r}")
            updates.setdefault(section, {})[field_name] = _parse_value(text.strip())
        if seed is not None:
            updates.setdefault("simulation", {})["seed"] = seed
        if trials is not None:
            updates.setdefault("simulation", {})["trials"] = trials
        if output_dir is not None:
            updates.setdefault("output", {})["dir"] = output_dir
        return ExperimentConfig(self.name, _merge(self.data, updates), self.source_path)

    def replace(self, section: str, **values) -> "ExperimentConfig":
        """Copy with keys of one section replaced by Python values"""
        return ExperimentConfig(self.name, _merge(self.data, {section: values}), self.source_path)

    def _check_numbers(self):
        for (section, key), convert in NUMERIC_KEYS.items():
            value = self.data[section][key]
            if value is None:
                continue
            try:
                convert(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
        for (section, key), convert in NUMERIC_LISTS.items():
            values = self.data[section][key]
            if not isinstance(values, list):
                raise ConfigError(f"{section}.{key} must be a list of numbers, got {values!r}")
            try:
                [convert(value) for value in values]
            except (TypeError, ValueError):
                raise ConfigError(f"{section}.{key} must be a list of numbers, got {values!r}")

    def validate(self):
        self._check_numbers()
        topology = self.topology
        if topology["generator"] not in GENERATORS:
            raise ConfigError(f"Unknown generator {topology['generator']!r}; expected one of {GENERATORS}")
        if topology["generator"] == "caida":
            path = topology["path"] or settings.caida_path
            if path is None:
                raise ConfigError("CAIDA topology needs topology.path or INTERSDN_CAIDA_PATH")
            if not Path(path).is_file():
                raise ConfigError(f"CAIDA file does not exist: {path}")
        elif int(topology["N"]) < 1:
            raise ConfigError("topology.N must be >= 1")

        cluster = self.cluster
        if cluster["strategy"] not in STRATEGIES:
            raise ConfigError(f"Unknown cluster strategy {cluster['strategy']!r}; expected one of {STRATEGIES}")
        if not cluster["k_values"] or any(int(k) < 0 for k in cluster["k_values"]):
            raise ConfigError("cluster.k_values must be a nonempty list of sizes >= 0")
        if self.known_n is not None and max(int(k) for k in cluster["k_values"]) > self.known_n:
            raise ConfigError(f"cluster.k_values exceed N={self.known_n}")
        if cluster["backend"] not in (None, BETWEENNESS_EXACT, BETWEENNESS_PATH_SAMPLE):
            raise ConfigError(f"Unknown betweenness backend {cluster['backend']!r}")

        if self.routing["mode"] not in [None] + ROUTING_MODES:
            raise ConfigError(f"Unknown routing mode {self.routing['mode']!r}; expected one of {ROUTING_MODES}")
        if self.routing["degree_model"] not in DEGREE_MODELS:
            raise ConfigError(f"Unknown degree model {self.routing['degree_model']!r}")

        simulation = self.simulation
        if int(simulation["trials"]) < 1:
            raise ConfigError("simulation.trials must be >= 1")
        fractions = simulation["ell_fractions"]
        if not fractions or any(not 0.0 < float(f) <= 1.0 for f in fractions):
            raise ConfigError("simulation.ell_fractions must lie in (0, 1]")

        try:
            self.bgp_model()
            self.sdn_model()
        except (DomainError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid time model: {e}")

    @property
    def topology(self) -> Dict[str, Any]:
        return self.data["topology"]

    @property
    def cluster(self) -> Dict[str, Any]:
        return self.data["cluster"]

    @property
    def timing(self) -> Dict[str, Any]:
        return self.data["timing"]

    @property
    def routing(self) -> Dict[str, Any]:
        return self.data["routing"]

    @property
    def simulation(self) -> Dict[str, Any]:
        return self.data["simulation"]

    @property
    def known_n(self) -> Optional[int]:
        """N when the generator fixes it before the graph is built"""
        if self.topology["generator"] == "caida":
            return None
        return int(self.topology["N"])

    @property
    def seed(self) -> int:
        return int(self.simulation["seed"])

    @property
    def trials(self) -> int:
        return int(self.simulation["trials"])

    @property
    def k_values(self) -> List[int]:
        return sorted(set(int(k) for k in self.cluster["k_values"]))

    @property
    def ell_fractions(self) -> List[float]:
        return sorted(float(f) for f in self.simulation["ell_fractions"])

    @property
    def workers(self) -> int:
        workers = self.simulation["workers"]
        return int(workers) if workers else settings.workers

    @property
    def output_dir(self) -> Path:
        configured = self.data["output"]["dir"]
        return Path(configured) if configured else settings.output_dir / self.name

    def caida_path(self) -> Path:
        return Path(self.topology["path"] or settings.caida_path)

    def bgp_model(self) -> TimeModel:
        return model_from_dict(self.timing["bgp"])

    def sdn_model(self) -> TimeModel:
        return model_from_dict(self.timing["sdn"])

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, **copy.deepcopy(self.data)}

    def digest(self) -> str:
        """Content hash of the effective configuration (output location excluded)"""
        payload = self.to_dict()
        payload["output"] = {}
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
