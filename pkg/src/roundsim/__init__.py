"""Round-driven simulator for distributed algorithms.

Runs synchronized receive-compute-send rounds over FIFO channels with
configurable delay and loss, ships eight reference protocols (bitcoin,
ethereum, pbft, raft, abp, sdl, chord, kademlia), and a sweep harness
that reduces tagged run logs to plot-ready tables.
"""

from ._version import __version__
from .config import RunConfig, load, load_file
from .engine import Engine, run
from .errors import (ConfigError, MetricError, RoundsimError, SimulationError,
                     UnknownAlgorithmError)
from .network import DelayDistribution
from .runlog import LogDocument, serialize
from .sweep import (MetricTable, Sweep, benchmark_threads, load_sweep,
                    load_sweep_file, run_sweep)

__all__ = [
    "__version__", "RunConfig", "load", "load_file", "Engine", "run",
    "ConfigError", "MetricError", "RoundsimError", "SimulationError",
    "UnknownAlgorithmError", "DelayDistribution", "LogDocument", "serialize",
    "MetricTable", "Sweep", "benchmark_threads", "load_sweep",
    "load_sweep_file", "run_sweep",
]
