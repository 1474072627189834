"""Node-facing simulation API.

A NodeContext is the only handle an algorithm gets: identity, neighbors,
the inbound packet stream, staged sends, the current round, a private
random stream and a log handle. Each context is owned exclusively by its
node's compute hook; payloads placed on the wire are shared by reference
and must be treated as immutable.
"""

from collections import deque

from .errors import SimulationError


class NodeContext:
    __slots__ = ("id", "neighbors", "in_stream", "out_buffer", "round",
                 "rng", "_neighbor_set", "_logger", "_log_buffer")

    def __init__(self, node_id: int, neighbors: tuple, rng, logger):
        self.id = node_id
        self.neighbors = tuple(neighbors)
        self._neighbor_set = frozenset(neighbors)
        self.in_stream = deque()
        self.out_buffer = []
        self.round = 0
        self.rng = rng
        self._logger = logger
        self._log_buffer = []

    def broadcast(self, payload) -> None:
        """Stage one copy of payload per neighbor; each copy gets its own
        loss trial and delay sample at send time."""
        out = self.out_buffer
        for dest in self.neighbors:
            out.append((dest, payload))

    def unicast(self, dest: int, payload) -> None:
        if dest not in self._neighbor_set:
            raise SimulationError(
                f"node {self.id} has no channel to {dest}; neighbors are "
                f"{sorted(self._neighbor_set)}")
        self.out_buffer.append((dest, payload))

    def in_stream_empty(self) -> bool:
        return not self.in_stream

    def pop_in_stream(self):
        """Remove and return the oldest received packet."""
        if not self.in_stream:
            raise SimulationError(f"node {self.id}: pop on empty in-stream")
        return self.in_stream.popleft()

    def log(self, tag: str, payload) -> None:
        """Buffer a record; the engine merges buffers at the phase barrier."""
        if self._logger.enabled(tag):
            self._log_buffer.append((tag, payload))

    def take_log_buffer(self) -> list:
        buffer = self._log_buffer
        self._log_buffer = []
        return buffer


class AlgorithmNode:
    """Behavior hooks a protocol implements for one node.

    perform_computation runs exactly once per node per round, during the
    compute phase, with exclusive access to the context.
    """

    def initialize(self, ctx: NodeContext, params: dict) -> None:
        pass

    def perform_computation(self, ctx: NodeContext) -> None:
        raise NotImplementedError
