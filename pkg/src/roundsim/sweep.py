"""Parameter sweeps over run configs, metric reduction to plot-ready
tables, and the thread-count benchmark.

Each sweep point gets its own seed derived from (base seed, point index);
all variants at a point share it, so cross-variant comparisons are paired
down to the workload.
"""

import copy
import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Optional

from . import config as config_mod
from .algorithms.blockchain import throughput_series
from .algorithms.consensus import mean_latency
from .algorithms.dht import mean_hops
from .algorithms.datalink import utility
from .engine import Engine
from .errors import ConfigError, SimulationError
from .rng import SWEEP, derive_seed
from .runlog import serialize

# metric name -> (reducer over a LogDocument, algorithm ids it applies to)
METRICS = {
    "throughput_series": (
        lambda doc, params: throughput_series(doc, params.get("window", 5)),
        frozenset({"bitcoin", "ethereum"})),
    "mean_latency": (lambda doc, params: mean_latency(doc),
                     frozenset({"pbft", "raft"})),
    "utility": (lambda doc, params: utility(doc),
                frozenset({"abp", "sdl"})),
    "mean_hops": (lambda doc, params: mean_hops(doc),
                  frozenset({"chord", "kademlia"})),
}

_SWEEP_KEYS = {"base", "axis", "points", "variants", "metric", "metricParams"}


@dataclass(frozen=True)
class Sweep:
    base: dict              # raw config document, before axis substitution
    axis: str
    points: tuple
    variants: tuple
    metric: str
    metric_params: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"base": self.base, "axis": self.axis,
                "points": list(self.points), "variants": list(self.variants),
                "metric": self.metric, "metricParams": self.metric_params}


@dataclass(frozen=True)
class Row:
    axis_value: object
    variant: str
    value: float
    sample_count: int
    series: Optional[tuple] = None  # (round, value) pairs, throughput only

    def to_json_obj(self) -> dict:
        obj = {"axisValue": self.axis_value, "variant": self.variant,
               "metricValue": self.value, "sampleCount": self.sample_count}
        if self.series is not None:
            obj["series"] = [[r, v] for r, v in self.series]
        return obj


@dataclass(frozen=True)
class MetricTable:
    header: dict
    rows: tuple

    def to_json_obj(self) -> dict:
        return {"header": self.header,
                "rows": [row.to_json_obj() for row in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True,
                          separators=(",", ":"), allow_nan=False)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)  # csv defaults to RFC-4180 CRLF endings
        writer.writerow(["axisValue", "variant", "metricValue", "sampleCount"])
        for row in self.rows:
            writer.writerow([_num(row.axis_value), row.variant,
                             _num(row.value), row.sample_count])
        return out.getvalue()


def _num(value):
    if isinstance(value, float):
        return "%.6g" % value
    return value


def table_from_json(text: str) -> MetricTable:
    obj = json.loads(text)
    rows = []
    for raw in obj["rows"]:
        series = raw.get("series")
        rows.append(Row(raw["axisValue"], raw["variant"], raw["metricValue"],
                        raw["sampleCount"],
                        None if series is None else
                        tuple((r, v) for r, v in series)))
    return MetricTable(obj["header"], tuple(rows))


def parse_sweep(obj: dict) -> Sweep:
    if not isinstance(obj, dict):
        raise ConfigError("", "sweep root must be an object")
    unknown = set(obj) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown sweep key")
    for key in ("base", "axis", "points", "metric"):
        if key not in obj:
            raise ConfigError(key, "missing required key")
    base = obj["base"]
    if not isinstance(base, dict):
        raise ConfigError("base", "expected a configuration object")
    axis = obj["axis"]
    if not isinstance(axis, str) or not axis:
        raise ConfigError("axis", "expected a parameter path")
    points = obj["points"]
    if not isinstance(points, list):
        raise ConfigError("points", "expected a list")
    variants = obj.get("variants", [base.get("algorithm")])
    if (not isinstance(variants, list) or not variants
            or any(not isinstance(v, str) for v in variants)):
        raise ConfigError("variants", "expected a non-empty list of names")
    metric = obj["metric"]
    if metric not in METRICS:
        raise ConfigError("metric",
                          f"expected one of {sorted(METRICS)}, got {metric!r}")
    allowed = METRICS[metric][1]
    for v in variants:
        if v not in allowed:
            raise ConfigError("variants",
                              f"metric {metric!r} does not apply to {v!r}")
    params = obj.get("metricParams", {})
    if not isinstance(params, dict):
        raise ConfigError("metricParams", "expected an object")
    return Sweep(base, axis, tuple(points), tuple(variants), metric, params)


def load_sweep(text: str) -> Sweep:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    return parse_sweep(obj)


def load_sweep_file(path) -> Sweep:
    with open(path, "r", encoding="utf-8") as fh:
        return load_sweep(fh.read())


def _set_axis(doc: dict, axis: str, value) -> None:
    parts = axis.split(".")
    node = doc
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(axis, "axis path does not resolve in the base config")
        node = node[part]
    node[parts[-1]] = value


def point_config(sweep: Sweep, index: int, variant: str):
    """The fully validated RunConfig for one (point, variant) cell."""
    doc = copy.deepcopy(sweep.base)
    _set_axis(doc, sweep.axis, sweep.points[index])
    doc["algorithm"] = variant
    doc.setdefault("algorithmParams", {})["variant"] = variant
    doc["seed"] = int(derive_seed(doc.get("seed", config_mod.DEFAULT_SEED),
                                  SWEEP, index))
    return config_mod.parse_obj(doc)


def run_sweep(sweep: Sweep) -> MetricTable:
    reducer = METRICS[sweep.metric][0]
    rows = []
    for index, point in enumerate(sweep.points):
        for variant in sweep.variants:
            config = point_config(sweep, index, variant)
            doc = Engine(config).run()
            value, count, series = reducer(doc, sweep.metric_params)
            rows.append(Row(point, variant, value, count,
                            None if series is None else tuple(series)))
    header = {"axis": sweep.axis, "metric": sweep.metric,
              "metricParams": sweep.metric_params,
              "variants": list(sweep.variants),
              "points": list(sweep.points)}
    return MetricTable(header, tuple(rows))


def benchmark_threads(config, thread_counts) -> list:
    """Wall-clock per worker count; logs must agree byte for byte."""
    results = []
    reference = None
    for workers in thread_counts:
        engine = Engine(config.with_(worker_count=workers))
        started = time.perf_counter()
        doc = engine.run()
        elapsed = time.perf_counter() - started
        blob = serialize(doc)
        if reference is None:
            reference = blob
        elif blob != reference:
            raise SimulationError(
                f"log output with {workers} workers differs from "
                f"{thread_counts[0]} workers")
        results.append({"threads": workers,
                        "wallClockSeconds": elapsed,
                        "messages": engine.stats["sent"] + engine.stats["dropped"]})
    return results
