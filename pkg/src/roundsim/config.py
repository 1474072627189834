"""Experiment configuration: JSON schema, validation, topology expansion.

Loading is a pure function of the document text. Generator shorthands
("complete", "ring") expand to explicit adjacency lists, so a loaded
RunConfig always carries the full topology and re-serializes canonically.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError, UnknownAlgorithmError
from .network import DETERMINISTIC, POISSON, UNIFORM, DelayDistribution

DEFAULT_SEED = 0xC0FFEE

_TOP_LEVEL_KEYS = {
    "algorithm", "topology", "delay", "lossProbability",
    "roundsPerComputation", "computationsPerRun", "seed", "workerCount",
    "algorithmParams", "logTags",
}


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    adjacency: dict            # node id -> ordered tuple of neighbor ids
    delay: DelayDistribution
    loss_probability: float
    rounds_per_computation: int
    computations_per_run: int
    seed: int
    worker_count: int = 1
    algorithm_params: dict = field(default_factory=dict)
    log_tags: Optional[tuple] = None   # None enables all algorithm tags

    @property
    def node_ids(self) -> tuple:
        return tuple(sorted(self.adjacency))

    @property
    def n_nodes(self) -> int:
        return len(self.adjacency)

    @property
    def n_channels(self) -> int:
        return sum(len(v) for v in self.adjacency.values())

    def with_(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)

    def to_json_obj(self, include_workers: bool = True) -> dict:
        # The log header omits workerCount: it is an execution detail, and
        # logs must be byte-identical across worker counts.
        obj = {
            "algorithm": self.algorithm,
            "topology": {"adjacency": {str(u): list(vs) for u, vs in
                                       sorted(self.adjacency.items())}},
            "delay": self.delay.to_json(),
            "lossProbability": self.loss_probability,
            "roundsPerComputation": self.rounds_per_computation,
            "computationsPerRun": self.computations_per_run,
            "seed": self.seed,
            "algorithmParams": self.algorithm_params,
        }
        if include_workers:
            obj["workerCount"] = self.worker_count
        if self.log_tags is not None:
            obj["logTags"] = sorted(self.log_tags)
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))


def _require(obj: dict, key: str):
    if key not in obj:
        raise ConfigError(key, "missing required key")
    return obj[key]


def _as_int(value, path: str, minimum=None, maximum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(path, f"must be <= {maximum}, got {value}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _parse_topology(obj) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError("topology", "expected an object")
    if "adjacency" in obj:
        extra = set(obj) - {"adjacency", "kind"}
        if extra:
            raise ConfigError("topology", f"unknown keys {sorted(extra)}")
        if obj.get("kind") not in (None, "adjacency"):
            raise ConfigError("topology.kind",
                              "must be 'adjacency' when adjacency is given")
        raw = obj["adjacency"]
        if not isinstance(raw, dict) or not raw:
            raise ConfigError("topology.adjacency", "expected a non-empty object")
        adjacency = {}
        for key, neighbors in raw.items():
            try:
                node = int(key)
            except (TypeError, ValueError):
                raise ConfigError("topology.adjacency",
                                  f"node id {key!r} is not an integer") from None
            if node < 0:
                raise ConfigError("topology.adjacency", f"negative node id {node}")
            if not isinstance(neighbors, list):
                raise ConfigError(f"topology.adjacency.{node}", "expected a list")
            seen = set()
            out = []
            for v in neighbors:
                v = _as_int(v, f"topology.adjacency.{node}")
                if v in seen:
                    raise ConfigError(f"topology.adjacency.{node}",
                                      f"duplicate neighbor {v}")
                seen.add(v)
                out.append(v)
            adjacency[node] = tuple(out)
        declared = set(adjacency)
        for node, neighbors in adjacency.items():
            for v in neighbors:
                if v not in declared:
                    raise ConfigError(f"topology.adjacency.{node}",
                                      f"neighbor {v} is not a declared node")
        return adjacency
    kind = obj.get("kind")
    if kind not in ("complete", "ring"):
        raise ConfigError("topology.kind",
                          f"expected 'complete', 'ring' or an adjacency object, got {kind!r}")
    extra = set(obj) - {"kind", "nodes"}
    if extra:
        raise ConfigError("topology", f"unknown keys {sorted(extra)}")
    n = _as_int(_require(obj, "nodes"), "topology.nodes", minimum=1)
    if kind == "complete":
        return {u: tuple(v for v in range(n) if v != u) for u in range(n)}
    if n < 2:
        raise ConfigError("topology.nodes", "a ring needs at least 2 nodes")
    return {u: tuple(sorted({(u - 1) % n, (u + 1) % n})) for u in range(n)}


def _parse_delay(obj) -> DelayDistribution:
    if not isinstance(obj, dict):
        raise ConfigError("delay", "expected an object")
    kind = obj.get("kind")
    if kind == DETERMINISTIC:
        extra = set(obj) - {"kind", "value"}
        if extra:
            raise ConfigError("delay", f"unknown keys {sorted(extra)}")
        return DelayDistribution.deterministic(
            _as_int(_require(obj, "value"), "delay.value", minimum=1))
    if kind == UNIFORM:
        extra = set(obj) - {"kind", "min", "max"}
        if extra:
            raise ConfigError("delay", f"unknown keys {sorted(extra)}")
        lo = _as_int(_require(obj, "min"), "delay.min", minimum=1)
        hi = _as_int(_require(obj, "max"), "delay.max", minimum=1)
        if hi < lo:
            raise ConfigError("delay.max", f"max {hi} is below min {lo}")
        return DelayDistribution.uniform(lo, hi)
    if kind == POISSON:
        extra = set(obj) - {"kind", "mean"}
        if extra:
            raise ConfigError("delay", f"unknown keys {sorted(extra)}")
        mean = _as_number(_require(obj, "mean"), "delay.mean")
        if mean <= 0:
            raise ConfigError("delay.mean", f"must be > 0, got {mean}")
        if mean <= 1.0:
            # The one-round floor leaves no mass to distribute.
            return DelayDistribution.deterministic(1)
        return DelayDistribution.poisson(mean)
    raise ConfigError("delay.kind",
                      f"expected 'deterministic', 'uniform' or 'poisson', got {kind!r}")


def parse_obj(obj: dict) -> RunConfig:
    """Validate a decoded configuration object into a RunConfig."""
    if not isinstance(obj, dict):
        raise ConfigError("", "configuration root must be an object")
    unknown = set(obj) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")

    algorithm = _require(obj, "algorithm")
    if not isinstance(algorithm, str):
        raise ConfigError("algorithm", f"expected a string, got {algorithm!r}")
    adjacency = _parse_topology(_require(obj, "topology"))
    delay = _parse_delay(obj.get("delay", {"kind": DETERMINISTIC, "value": 1}))

    loss = _as_number(obj.get("lossProbability", 0.0), "lossProbability")
    if not 0.0 <= loss <= 1.0:
        raise ConfigError("lossProbability", f"must be within [0, 1], got {loss}")

    rounds = _as_int(_require(obj, "roundsPerComputation"),
                     "roundsPerComputation", minimum=1)
    computations = _as_int(obj.get("computationsPerRun", 1),
                           "computationsPerRun", minimum=1)
    seed = _as_int(obj.get("seed", DEFAULT_SEED), "seed",
                   minimum=0, maximum=2 ** 64 - 1)
    workers = _as_int(obj.get("workerCount", 1), "workerCount", minimum=1)

    params = obj.get("algorithmParams", {})
    if not isinstance(params, dict):
        raise ConfigError("algorithmParams", "expected an object")

    log_tags = None
    if "logTags" in obj:
        raw_tags = obj["logTags"]
        if (not isinstance(raw_tags, list)
                or any(not isinstance(t, str) for t in raw_tags)):
            raise ConfigError("logTags", "expected a list of strings")
        log_tags = tuple(sorted(set(raw_tags)))

    from .algorithms import get_algorithm  # deferred: algorithms import node API

    try:
        family = get_algorithm(algorithm)
    except KeyError:
        raise UnknownAlgorithmError(algorithm) from None

    config = RunConfig(
        algorithm=algorithm,
        adjacency=adjacency,
        delay=delay,
        loss_probability=loss,
        rounds_per_computation=rounds,
        computations_per_run=computations,
        seed=seed,
        worker_count=workers,
        algorithm_params=dict(family.default_params(algorithm), **params),
        log_tags=log_tags,
    )
    family.validate(config)
    return config


def load(text: str) -> RunConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    return parse_obj(obj)


def load_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load(fh.read())
